#include "nsv/voigt.hpp"

#include <cmath>
#include <string>

#include "nsv/errors.hpp"
#include "nsv/operators.hpp"

namespace nsv {

void SimParams::validate() const {
    if (!(nu >= 0.0)) throw UsageError("nu must be nonnegative");
    if (!(alpha >= 0.0)) throw UsageError("alpha must be nonnegative");
    if (!(dt > 0.0)) throw UsageError("dt must be positive");
    if (forcing.empty()) throw UsageError("forcing field is not set");
}

Diagnostics diagnose(const SpectralField& v, double alpha) {
    Diagnostics d;
    const double h = v.norm2();
    d.enstrophy = h1_norm2(v);
    d.kinetic = 0.5 * h;
    d.alpha_energy = 0.5 * h + 0.5 * alpha * alpha * d.enstrophy;
    return d;
}

TrajectoryState TrajectoryState::at(double time, SpectralField v, double alpha) {
    TrajectoryState s;
    s.time = time;
    s.diag = diagnose(v, alpha);
    s.velocity = std::move(v);
    return s;
}

double kinetic_energy(const SpectralField& v) { return 0.5 * v.norm2(); }

double alpha_energy(const SpectralField& v, double alpha) {
    return 0.5 * v.norm2() + 0.5 * alpha * alpha * h1_norm2(v);
}

SpectralField rhs_voigt(const SpectralField& v, const SimParams& p) {
    require_same_lattice(v, p.forcing);
    SpectralField r = p.forcing;
    r.axpy(-p.nu, stokes_apply(v, 1.0));
    if (p.nonlinear) r -= advect_self(v);
    return helmholtz_inverse(r, p.alpha);
}

VoigtStepper::VoigtStepper(const SimParams& p) : params_(p) {
    params_.validate();
    const WaveLattice& lat = p.forcing.lattice();
    const double a2 = p.alpha * p.alpha;
    helmholtz_.assign(lat.size(), 0.0);
    full_.assign(lat.size(), 0.0);
    half_.assign(lat.size(), 0.0);
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        if (!lat.retained(idx)) continue;
        const double lam = lat.eigenvalue(idx);
        helmholtz_[idx] = 1.0 / (1.0 + a2 * lam);
        const double rate = p.nu * lam * helmholtz_[idx];
        full_[idx] = std::exp(-rate * p.dt);
        half_[idx] = std::exp(-0.5 * rate * p.dt);
    }
    forcing_term_ = helmholtz_inverse(p.forcing, p.alpha);
}

void VoigtStepper::nonlinear_part(const SpectralField& v, SpectralField& out) const {
    const std::size_t n = helmholtz_.size();
    if (!params_.nonlinear) {
        out = forcing_term_;
        return;
    }
    advect_self_into(v, out);
    for (int c = 0; c < 3; ++c) {
        auto o = out.component(c);
        const auto f = forcing_term_.component(c);
        for (std::size_t idx = 0; idx < n; ++idx) o[idx] = f[idx] - helmholtz_[idx] * o[idx];
    }
}

void VoigtStepper::step_in_place(TrajectoryState& s) const {
    const double dt = params_.dt;
    const std::size_t n = helmholtz_.size();
    SpectralField& v = s.velocity;
    require_same_lattice(v, forcing_term_);
    if (k1_.empty()) {
        k1_ = k2_ = k3_ = k4_ = stage_ = SpectralField(v.lattice_ptr());
    }

    // Lawson RK4 on w = exp(L t) v:
    //   a = E2 (v + dt/2 k1), b = E2 v + dt/2 k2, c = E v + dt E2 k3
    //   v' = E v + dt/6 (E k1 + 2 E2 (k2 + k3) + k4)
    nonlinear_part(v, k1_);
    for (int c = 0; c < 3; ++c) {
        auto st = stage_.component(c);
        const auto vv = v.component(c);
        const auto a = k1_.component(c);
        for (std::size_t idx = 0; idx < n; ++idx) st[idx] = half_[idx] * (vv[idx] + 0.5 * dt * a[idx]);
    }
    nonlinear_part(stage_, k2_);
    for (int c = 0; c < 3; ++c) {
        auto st = stage_.component(c);
        const auto vv = v.component(c);
        const auto b = k2_.component(c);
        for (std::size_t idx = 0; idx < n; ++idx) st[idx] = half_[idx] * vv[idx] + 0.5 * dt * b[idx];
    }
    nonlinear_part(stage_, k3_);
    for (int c = 0; c < 3; ++c) {
        auto st = stage_.component(c);
        const auto vv = v.component(c);
        const auto b = k3_.component(c);
        for (std::size_t idx = 0; idx < n; ++idx) st[idx] = full_[idx] * vv[idx] + dt * half_[idx] * b[idx];
    }
    nonlinear_part(stage_, k4_);

    const double t_next = s.time + dt;
    const WaveLattice& lat = v.lattice();
    for (int c = 0; c < 3; ++c) {
        auto vv = v.component(c);
        const auto a = k1_.component(c);
        const auto b = k2_.component(c);
        const auto d = k3_.component(c);
        const auto e = k4_.component(c);
        for (std::size_t idx = 0; idx < n; ++idx) {
            vv[idx] = full_[idx] * vv[idx] +
                      dt / 6.0 * (full_[idx] * a[idx] + 2.0 * half_[idx] * (b[idx] + d[idx]) + e[idx]);
        }
        for (std::size_t idx = 0; idx < n; ++idx) {
            if (!std::isfinite(vv[idx].real()) || !std::isfinite(vv[idx].imag())) {
                const auto k = lat.wavevector(idx);
                throw BlowUpError("non-finite coefficient at t=" + std::to_string(t_next) +
                                      " k=(" + std::to_string(k[0]) + "," +
                                      std::to_string(k[1]) + "," + std::to_string(k[2]) + ")",
                                  t_next, k);
            }
        }
    }
    s.time = t_next;
    s.diag = diagnose(v, params_.alpha);
}

TrajectoryState VoigtStepper::step(const TrajectoryState& s) const {
    TrajectoryState out = s;
    step_in_place(out);
    return out;
}

double VoigtStepper::cfl(const SpectralField& v) const {
    const auto u = to_physical(v);
    double umax = 0.0;
    for (std::size_t x = 0; x < u[0].size(); ++x) {
        umax = std::max(umax, std::sqrt(u[0][x] * u[0][x] + u[1][x] * u[1][x] + u[2][x] * u[2][x]));
    }
    const double dx = v.lattice().box_length() / v.lattice().resolution();
    return params_.dt * umax / dx;
}

TrajectoryState step(const TrajectoryState& state, const SimParams& p) {
    return VoigtStepper(p).step(state);
}

std::vector<double> energy_balance_residual(std::span<const TrajectoryState> window,
                                            const SimParams& p) {
    if (window.size() < 3) throw UsageError("energy_balance_residual needs at least 3 samples");
    std::vector<double> r;
    r.reserve(window.size() - 2);
    for (std::size_t i = 1; i + 1 < window.size(); ++i) {
        const double span = window[i + 1].time - window[i - 1].time;
        if (!(span > 0.0)) throw UsageError("energy_balance_residual: samples not increasing in time");
        const double de = alpha_energy(window[i + 1].velocity, p.alpha) -
                          alpha_energy(window[i - 1].velocity, p.alpha);
        const SpectralField& v = window[i].velocity;
        r.push_back(de / span - (inner(p.forcing, v) - p.nu * h1_norm2(v)));
    }
    return r;
}

}  // namespace nsv
