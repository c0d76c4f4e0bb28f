#include "nsv/shell.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "nsv/errors.hpp"

namespace nsv {

using cplx = std::complex<double>;

void ShellParams::validate() const {
    if (shells < 4) throw UsageError("shell model needs at least 4 shells");
    if (!(k0 > 0.0)) throw UsageError("k0 must be positive");
    if (!(ratio > 1.0)) throw UsageError("intershell ratio must exceed 1");
    if (std::abs(a + b + c) > 1e-14 * (std::abs(a) + std::abs(b) + std::abs(c))) {
        throw UsageError("Sabra coefficients must satisfy a + b + c = 0");
    }
    if (!(nu >= 0.0)) throw UsageError("nu must be nonnegative");
    if (!(alpha >= 0.0)) throw UsageError("alpha must be nonnegative");
    if (!(dt > 0.0)) throw UsageError("dt must be positive");
    if (forcing.size() != static_cast<std::size_t>(shells)) {
        throw UsageError("forcing must have one entry per shell");
    }
}

double ShellParams::k(int n) const { return k0 * std::pow(ratio, n); }

std::vector<double> ShellParams::wavenumbers() const {
    std::vector<double> out(shells);
    for (int n = 1; n <= shells; ++n) out[n - 1] = k(n);
    return out;
}

int ShellParams::forcing_top() const {
    int top = 0;
    for (int n = 1; n <= static_cast<int>(forcing.size()); ++n) {
        if (forcing[n - 1] != cplx{}) top = n;
    }
    return top;
}

std::vector<cplx> shell_forcing(int shells, int forced_shells, double amplitude) {
    if (forced_shells < 0 || forced_shells > shells) throw UsageError("forced shell count out of range");
    std::vector<cplx> f(shells, cplx{});
    for (int n = 0; n < forced_shells; ++n) f[n] = amplitude * cplx(1.0, 1.0);
    return f;
}

ShellState shell_initial(const ShellParams& p, std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
    ShellState s;
    s.u.resize(p.shells);
    const double k1 = p.k(1);
    for (int n = 1; n <= p.shells; ++n) {
        const double kn = p.k(n);
        const double mag = amplitude * std::pow(kn / k1, -1.0 / 3.0) * std::exp(-kn / (64.0 * k1));
        s.u[n - 1] = std::polar(mag, phase(rng));
    }
    return s;
}

namespace {

inline cplx at(const std::vector<cplx>& u, int n) {
    return (n >= 1 && n <= static_cast<int>(u.size())) ? u[n - 1] : cplx{};
}

void nonlinear_into(const std::vector<cplx>& u, const std::vector<double>& k, double a, double b,
                    double c, std::vector<cplx>& out) {
    const int m = static_cast<int>(u.size());
    constexpr cplx i{0.0, 1.0};
    for (int n = 1; n <= m; ++n) {
        cplx acc{};
        if (n + 2 <= m) acc += a * k[n] * u[n + 1] * std::conj(u[n]);  // k_{n+1} u_{n+2} u*_{n+1}
        if (n >= 2 && n + 1 <= m) acc += b * k[n - 1] * u[n] * std::conj(u[n - 2]);  // k_n u_{n+1} u*_{n-1}
        if (n >= 3) acc -= c * k[n - 2] * u[n - 2] * u[n - 3];  // k_{n-1} u_{n-1} u_{n-2}
        out[n - 1] = i * acc;
    }
}

}  // namespace

std::vector<cplx> sabra_nonlinear(const std::vector<cplx>& u, const ShellParams& p) {
    std::vector<double> k = p.wavenumbers();
    std::vector<cplx> out(u.size());
    nonlinear_into(u, k, p.a, p.b, p.c, out);
    return out;
}

std::vector<cplx> sabra_rhs_voigt(const ShellState& s, const ShellParams& p) {
    std::vector<cplx> out(s.u.size(), cplx{});
    if (p.nonlinear) out = sabra_nonlinear(s.u, p);
    for (int n = 1; n <= p.shells; ++n) {
        const double kn = p.k(n);
        out[n - 1] = (out[n - 1] - p.nu * kn * kn * s.u[n - 1] + p.forcing[n - 1]) /
                     (1.0 + p.alpha * p.alpha * kn * kn);
    }
    return out;
}

SabraStepper::SabraStepper(const ShellParams& p) : params_(p) {
    params_.validate();
    k_ = params_.wavenumbers();
    const std::size_t m = k_.size();
    inv_weight_.resize(m);
    full_.resize(m);
    half_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        inv_weight_[j] = 1.0 / (1.0 + p.alpha * p.alpha * k_[j] * k_[j]);
        const double rate = p.nu * k_[j] * k_[j] * inv_weight_[j];
        full_[j] = std::exp(-rate * p.dt);
        half_[j] = std::exp(-0.5 * rate * p.dt);
    }
    k1_.resize(m);
    k2_.resize(m);
    k3_.resize(m);
    k4_.resize(m);
    tmp_.resize(m);
}

void SabraStepper::nonlinear_part(const std::vector<cplx>& u, std::vector<cplx>& out) const {
    if (params_.nonlinear) {
        nonlinear_into(u, k_, params_.a, params_.b, params_.c, out);
    } else {
        std::fill(out.begin(), out.end(), cplx{});
    }
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (out[j] + params_.forcing[j]) * inv_weight_[j];
}

void SabraStepper::step_in_place(ShellState& s) const {
    const double dt = params_.dt;
    const std::size_t m = s.u.size();
    auto& u = s.u;

    nonlinear_part(u, k1_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = half_[j] * (u[j] + 0.5 * dt * k1_[j]);
    nonlinear_part(tmp_, k2_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = half_[j] * u[j] + 0.5 * dt * k2_[j];
    nonlinear_part(tmp_, k3_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = full_[j] * u[j] + dt * half_[j] * k3_[j];
    nonlinear_part(tmp_, k4_);
    for (std::size_t j = 0; j < m; ++j) {
        u[j] = full_[j] * u[j] +
               dt / 6.0 * (full_[j] * k1_[j] + 2.0 * half_[j] * (k2_[j] + k3_[j]) + k4_[j]);
    }
    s.time += dt;
    for (std::size_t j = 0; j < m; ++j) {
        if (!std::isfinite(u[j].real()) || !std::isfinite(u[j].imag())) {
            throw BlowUpError("non-finite amplitude at t=" + std::to_string(s.time) + " shell " +
                                  std::to_string(j + 1),
                              s.time, {static_cast<int>(j + 1), 0, 0});
        }
    }
}

ShellState SabraStepper::step(const ShellState& s) const {
    ShellState out = s;
    step_in_place(out);
    return out;
}

ShellState sabra_step(const ShellState& s, const ShellParams& p) { return SabraStepper(p).step(s); }

double shell_norm2(const ShellState& s) {
    double sum = 0.0;
    for (const auto& v : s.u) sum += std::norm(v);
    return sum;
}

double shell_enstrophy(const ShellState& s, const ShellParams& p) {
    double sum = 0.0;
    for (int n = 1; n <= p.shells; ++n) sum += p.k(n) * p.k(n) * std::norm(s.u[n - 1]);
    return sum;
}

double shell_alpha_energy(const ShellState& s, const ShellParams& p) {
    return 0.5 * shell_norm2(s) + 0.5 * p.alpha * p.alpha * shell_enstrophy(s, p);
}

double shell_injection(const ShellState& s, const ShellParams& p) {
    double sum = 0.0;
    for (int n = 1; n <= p.shells; ++n) {
        sum += (p.forcing[n - 1] * std::conj(s.u[n - 1])).real();
    }
    return sum;
}

std::vector<double> shell_transfer(const ShellState& s, const ShellParams& p) {
    const auto nl = sabra_nonlinear(s.u, p);
    std::vector<double> t(s.u.size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = -(std::conj(s.u[j]) * nl[j]).real();
    return t;
}

double shell_flux(const ShellState& s, const ShellParams& p, int n) {
    if (n < 2 || n > p.shells - 2) {
        throw UsageError("shell_flux: boundary index " + std::to_string(n) + " outside [2, M-2]");
    }
    const auto t = shell_transfer(s, p);
    double sum = 0.0;
    for (int m = 1; m <= n; ++m) sum += t[m - 1];
    return sum;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rss = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    const double den = n * sxx - sx * sx;
    f.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    f.intercept = (sy - f.slope * sx) / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        f.rss += r * r;
    }
    return f;
}

double slope_between(const std::vector<double>& k, const std::vector<double>& y, int first, int last) {
    if (last - first < 1) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x, v;
    for (int n = first; n <= last; ++n) {
        if (!(y[n - 1] > 0.0)) continue;
        x.push_back(std::log(k[n - 1]));
        v.push_back(std::log(y[n - 1]));
    }
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return fit_line(x, v).slope;
}

// Solves the 3x3 normal equations for y ~ c0 + c1*l(x) + c2*r(x).
double hinge_rss(const std::vector<double>& x, const std::vector<double>& y, double xb,
                 double& left, double& right) {
    double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double basis[3] = {1.0, std::min(x[i] - xb, 0.0), std::max(x[i] - xb, 0.0)};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
            m[r][3] += basis[r] * y[i];
        }
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        }
        for (int c = 0; c < 4; ++c) std::swap(m[col][c], m[piv][c]);
        if (m[col][col] == 0.0) return std::numeric_limits<double>::infinity();
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = 0; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    const double c0 = m[0][3] / m[0][0];
    left = m[1][3] / m[1][1];
    right = m[2][3] / m[2][2];
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = c0 + left * std::min(x[i] - xb, 0.0) + right * std::max(x[i] - xb, 0.0);
        rss += (y[i] - pred) * (y[i] - pred);
    }
    return rss;
}

}  // namespace

SegmentFit compare_segment_fits(const std::vector<double>& k, const std::vector<double>& y,
                                int first, int last) {
    if (first < 1 || last > static_cast<int>(y.size()) || last - first < 4) {
        throw UsageError("compare_segment_fits needs at least 5 shells");
    }
    std::vector<double> x, v;
    for (int n = first; n <= last; ++n) {
        if (!(y[n - 1] > 0.0)) throw UsageError("compare_segment_fits: nonpositive spectrum value");
        x.push_back(std::log(k[n - 1]));
        v.push_back(std::log(y[n - 1]));
    }
    const double n = static_cast<double>(x.size());
    // Floor keeps log(RSS) finite on exact power laws.
    const double floor = 1e-300;
    SegmentFit out;
    const LineFit one = fit_line(x, v);
    out.slope_one = one.slope;
    out.bic_one = n * std::log(std::max(one.rss, floor) / n) + 2.0 * std::log(n);
    out.bic_two = std::numeric_limits<double>::infinity();
    for (std::size_t b = 2; b + 2 < x.size(); ++b) {
        double left = 0.0, right = 0.0;
        const double rss = hinge_rss(x, v, x[b], left, right);
        // Intercept, two slopes and the breakpoint location.
        const double bic = n * std::log(std::max(rss, floor) / n) + 4.0 * std::log(n);
        if (bic < out.bic_two) {
            out.bic_two = bic;
            out.slope_left = left;
            out.slope_right = right;
            out.breakpoint = first + static_cast<int>(b);
        }
    }
    return out;
}

ShellSpectrumReport shell_spectrum(const std::vector<double>& mean_sq, const ShellParams& p,
                                   double turnovers) {
    if (mean_sq.size() != static_cast<std::size_t>(p.shells)) {
        throw UsageError("shell_spectrum: one value per shell required");
    }
    ShellSpectrumReport r;
    r.k = p.wavenumbers();
    r.mean_sq = mean_sq;
    r.alpha_energy.resize(mean_sq.size());
    for (std::size_t j = 0; j < mean_sq.size(); ++j) {
        r.alpha_energy[j] = (1.0 + p.alpha * p.alpha * r.k[j] * r.k[j]) * mean_sq[j];
    }
    r.short_window = turnovers < 100.0;

    // Dissipation range: shells past the point where 10% of the dissipation has occurred.
    double total = 0.0;
    for (std::size_t j = 0; j < mean_sq.size(); ++j) total += p.nu * r.k[j] * r.k[j] * mean_sq[j];
    int last_flux_shell = p.shells;
    double cumulative = 0.0;
    for (int n = 1; n <= p.shells; ++n) {
        cumulative += p.nu * r.k[n - 1] * r.k[n - 1] * mean_sq[n - 1];
        if (total > 0.0 && cumulative > 0.1 * total) {
            last_flux_shell = n - 1;
            break;
        }
    }
    const int first = p.forcing_top() + 2;
    int last_inertial = last_flux_shell;
    int first_sub_alpha = last_flux_shell + 1;
    int last_sub_alpha = last_flux_shell;
    if (p.alpha > 0.0) {
        // Above 1/alpha the Voigt term damps every shell at the same rate nu/alpha^2, so
        // dissipation spreads over the whole sub-alpha range; that range ends where the
        // alpha-energy spectrum falls below a tenth of its value at 1/alpha.
        const double k_alpha = 1.0 / p.alpha;
        int n_alpha = 0;
        for (int n = 1; n <= p.shells; ++n) {
            if (r.k[n - 1] < k_alpha) n_alpha = n;
        }
        last_inertial = n_alpha;
        first_sub_alpha = n_alpha + 1;
        last_sub_alpha = n_alpha;
        const double ref = n_alpha > 0 ? r.alpha_energy[n_alpha - 1] : 0.0;
        for (int n = first_sub_alpha; n <= p.shells && r.alpha_energy[n - 1] >= 0.1 * ref; ++n) {
            last_sub_alpha = n;
        }
    }
    r.inertial_first = first;
    r.inertial_last = last_inertial;
    r.sub_alpha_first = first_sub_alpha;
    r.sub_alpha_last = last_sub_alpha;
    r.inertial_shells = std::max(0, last_inertial - first + 1);
    r.inertial_slope = slope_between(r.k, r.mean_sq, first, last_inertial);
    r.sub_alpha_shells = std::max(0, last_sub_alpha - first_sub_alpha + 1);
    r.sub_alpha_slope = slope_between(r.k, r.alpha_energy, first_sub_alpha, last_sub_alpha);
    return r;
}

}  // namespace nsv
