#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace nsv {

/// Sabra shell-model parameters. Shells are numbered n = 1..M with k_n = k0 * ratio^n;
/// vectors are stored 0-based (entry n-1 belongs to shell n).
struct ShellParams {
    int shells = 22;
    double k0 = 1.0 / 16.0;
    double ratio = 2.0;
    double a = 1.0;
    double b = -0.5;
    double c = -0.5;
    double nu = 1e-6;
    double alpha = 0.0;
    double dt = 1e-4;
    double t_total = 1.0;
    std::vector<std::complex<double>> forcing;  ///< size M, zero above the forcing shells
    bool nonlinear = true;

    void validate() const;
    double k(int n) const;            ///< wavenumber of shell n (1-based)
    std::vector<double> wavenumbers() const;
    /// Highest shell carrying forcing (0 if unforced).
    int forcing_top() const;
};

/// Constant complex force amplitude * (1 + i) on shells 1..forced_shells.
std::vector<std::complex<double>> shell_forcing(int shells, int forced_shells, double amplitude);

struct ShellState {
    double time = 0.0;
    std::vector<std::complex<double>> u;
};

/// Seeded initial condition with |u_n| ~ amplitude * k_n^(-1/3) on the first
/// shells and exponentially small tails, random phases.
ShellState shell_initial(const ShellParams& p, std::uint64_t seed, double amplitude);

/// Quadratic Sabra coupling (the bracket times i) without viscosity or forcing.
std::vector<std::complex<double>> sabra_nonlinear(const std::vector<std::complex<double>>& u,
                                                  const ShellParams& p);

/// du_n/dt = [NL_n - nu k_n^2 u_n + f_n] / (1 + alpha^2 k_n^2).
std::vector<std::complex<double>> sabra_rhs_voigt(const ShellState& s, const ShellParams& p);

class SabraStepper {
public:
    explicit SabraStepper(const ShellParams& p);
    void step_in_place(ShellState& s) const;
    ShellState step(const ShellState& s) const;
    const ShellParams& params() const { return params_; }

private:
    void nonlinear_part(const std::vector<std::complex<double>>& u,
                        std::vector<std::complex<double>>& out) const;

    ShellParams params_;
    std::vector<double> k_;
    std::vector<double> inv_weight_;  ///< 1 / (1 + alpha^2 k^2)
    std::vector<double> full_, half_;
    mutable std::vector<std::complex<double>> k1_, k2_, k3_, k4_, tmp_;
};

ShellState sabra_step(const ShellState& s, const ShellParams& p);

/// Norms mirroring the 3D conventions: |u|^2 = sum |u_n|^2, ||u||^2 = sum k_n^2 |u_n|^2.
double shell_norm2(const ShellState& s);
double shell_enstrophy(const ShellState& s, const ShellParams& p);
double shell_alpha_energy(const ShellState& s, const ShellParams& p);
double shell_injection(const ShellState& s, const ShellParams& p);

/// Instantaneous alpha-energy flux from shells <= n to shells > n (2 <= n <= M-2).
double shell_flux(const ShellState& s, const ShellParams& p, int n);

/// Per-shell nonlinear transfer T_n = -Re(conj(u_n) NL_n); flux(n) = sum_{m<=n} T_m.
std::vector<double> shell_transfer(const ShellState& s, const ShellParams& p);

struct ShellSpectrumReport {
    std::vector<double> k;
    std::vector<double> mean_sq;        ///< <|u_n|^2>
    std::vector<double> alpha_energy;   ///< (1 + alpha^2 k_n^2) <|u_n|^2>
    double inertial_slope = 0.0;        ///< log-log slope of <|u_n|^2> below 1/alpha
    double sub_alpha_slope = 0.0;       ///< log-log slope of the alpha-energy spectrum above 1/alpha
    int inertial_shells = 0;
    int sub_alpha_shells = 0;
    int inertial_first = 0, inertial_last = 0;    ///< 1-based shell ranges of the fits
    int sub_alpha_first = 0, sub_alpha_last = 0;
    bool short_window = false;          ///< fewer than 100 large-eddy turnovers
};

/// Spectrum summary from time-averaged |u_n|^2 over a window of `turnovers` large-eddy times.
/// The inertial fit spans forcing_top+2 .. the last shell with k_n < 1/alpha (for alpha = 0, up to
/// where 10% of the dissipation has occurred); the sub-alpha fit spans shells above 1/alpha
/// whose alpha-energy stays within a factor 10 of its value at 1/alpha.
ShellSpectrumReport shell_spectrum(const std::vector<double>& mean_sq, const ShellParams& p,
                                   double turnovers);

/// Piecewise log-log fit comparison: BIC of the best continuous two-segment fit and of a
/// single line over shells [first, last] (1-based) of log y vs log k.
struct SegmentFit {
    double bic_one = 0.0;
    double bic_two = 0.0;
    double slope_one = 0.0;
    double slope_left = 0.0;
    double slope_right = 0.0;
    int breakpoint = 0;  ///< shell index of the joint
    bool two_segments_preferred() const { return bic_two < bic_one; }
};
SegmentFit compare_segment_fits(const std::vector<double>& k, const std::vector<double>& y,
                                int first, int last);

}  // namespace nsv
