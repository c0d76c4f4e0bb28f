#pragma once

#include <span>
#include <vector>

#include "nsv/spectral_field.hpp"

namespace nsv {

enum class Integrator { IfRk4 };

/// Physical and numerical parameters of a Navier-Stokes-Voigt run.
struct SimParams {
    double nu = 0.0;
    double alpha = 0.0;
    SpectralField forcing;  ///< time independent, divergence free, band limited
    double dt = 1e-3;
    double t_total = 1.0;
    Integrator integrator = Integrator::IfRk4;
    /// Drops B(v, v); used for linear-part checks.
    bool nonlinear = true;

    void validate() const;
};

/// Cached diagnostics of a velocity field.
struct Diagnostics {
    double kinetic = 0.0;       ///< (1/2)|v|^2
    double alpha_energy = 0.0;  ///< (1/2)|v|^2 + (alpha^2/2)||v||^2
    double enstrophy = 0.0;     ///< ||v||^2 = (A v, v)
};

struct TrajectoryState {
    double time = 0.0;
    SpectralField velocity;
    Diagnostics diag;

    static TrajectoryState at(double time, SpectralField v, double alpha);
};

Diagnostics diagnose(const SpectralField& v, double alpha);

double kinetic_energy(const SpectralField& v);
double alpha_energy(const SpectralField& v, double alpha);

/// (I + alpha^2 A)^-1 (f - nu A v - B(v, v)).
SpectralField rhs_voigt(const SpectralField& v, const SimParams& p);

/// Integrating-factor RK4 (Lawson) stepper. The linear multiplier
/// nu lambda / (1 + alpha^2 lambda) is integrated exactly per mode; caches the
/// exponential factors for one (nu, alpha, dt). Holds stage buffers, so one
/// stepper serves one trajectory at a time.
class VoigtStepper {
public:
    explicit VoigtStepper(const SimParams& p);

    /// Advances one step; throws BlowUpError on a non-finite coefficient.
    TrajectoryState step(const TrajectoryState& s) const;
    void step_in_place(TrajectoryState& s) const;

    const SimParams& params() const { return params_; }
    /// Advective CFL estimate dt * max|u| / dx (advisory; <= 0.5 is comfortable).
    double cfl(const SpectralField& v) const;

private:
    void nonlinear_part(const SpectralField& v, SpectralField& out) const;

    SimParams params_;
    SpectralField forcing_term_;  ///< (I + alpha^2 A)^-1 f
    std::vector<double> helmholtz_;
    std::vector<double> full_;
    std::vector<double> half_;
    mutable SpectralField k1_, k2_, k3_, k4_, stage_;
};

TrajectoryState step(const TrajectoryState& state, const SimParams& p);

/// Centered-difference residual of the alpha-energy equation on a uniformly
/// sampled window: r_i = (E(i+1) - E(i-1)) / (2 dt) - [(f, v_i) - nu ||v_i||^2].
std::vector<double> energy_balance_residual(std::span<const TrajectoryState> window,
                                            const SimParams& p);

}  // namespace nsv
