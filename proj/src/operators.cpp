#include "nsv/operators.hpp"

#include <cmath>
#include <limits>

#include "nsv/errors.hpp"
#include "nsv/fft.hpp"

namespace nsv {

namespace {

constexpr Complex kI{0.0, 1.0};

template <typename Multiplier>
SpectralField apply_multiplier(const SpectralField& u, Multiplier&& m) {
    SpectralField out(u.lattice_ptr());
    const WaveLattice& lat = u.lattice();
    for (int c = 0; c < 3; ++c) {
        const auto src = u.component(c);
        auto dst = out.component(c);
        for (std::size_t idx = 0; idx < lat.size(); ++idx) {
            if (lat.retained(idx)) dst[idx] = m(idx) * src[idx];
        }
    }
    return out;
}

void project_in_place(SpectralField& u) {
    const WaveLattice& lat = u.lattice();
    auto ux = u.component(0);
    auto uy = u.component(1);
    auto uz = u.component(2);
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        if (!lat.retained(idx)) {
            ux[idx] = uy[idx] = uz[idx] = Complex{};
            continue;
        }
        const auto k = lat.wavevector(idx);
        const double kx = k[0], ky = k[1], kz = k[2];
        const double k2 = lat.integer_norm2(idx);
        const Complex kdotu = (kx * ux[idx] + ky * uy[idx] + kz * uz[idx]) / k2;
        ux[idx] -= kdotu * kx;
        uy[idx] -= kdotu * ky;
        uz[idx] -= kdotu * kz;
    }
}

struct Scratch {
    std::vector<Complex> spec;
    std::vector<Complex> prod;
    std::array<std::vector<double>, 3> u;
    std::vector<double> grad;
    std::array<std::vector<double>, 3> acc;
    std::array<std::vector<Complex>, 3> hat;
};

Scratch& scratch_for(const FftWorkspace& ws) {
    thread_local Scratch s;
    if (s.spec.size() != ws.complex_size() || s.grad.size() != ws.real_size()) {
        s.spec.assign(ws.complex_size(), Complex{});
        s.prod.assign(ws.complex_size(), Complex{});
        s.grad.assign(ws.real_size(), 0.0);
        for (auto& v : s.u) v.assign(ws.real_size(), 0.0);
        for (auto& v : s.acc) v.assign(ws.real_size(), 0.0);
        for (auto& v : s.hat) v.assign(ws.complex_size(), Complex{});
    }
    return s;
}

/// Copies dealiased modes of hat into out, symmetrizes and projects.
void finish_nonlinear(const std::array<std::vector<Complex>, 3>& hat, SpectralField& out) {
    const WaveLattice& lat = out.lattice();
    for (int c = 0; c < 3; ++c) {
        auto dst = out.component(c);
        std::fill(dst.begin(), dst.end(), Complex{});
        for (std::size_t idx : lat.dealiased_indices()) dst[idx] = hat[c][idx];
    }
    out.enforce_hermitian();
    project_in_place(out);
}

}  // namespace

SpectralField leray_project(const SpectralField& u) {
    SpectralField out = u;
    project_in_place(out);
    return out;
}

SpectralField stokes_apply(const SpectralField& u, double s) {
    const WaveLattice& lat = u.lattice();
    if (s == 0.0) return apply_multiplier(u, [](std::size_t) { return 1.0; });
    if (s == 1.0) return apply_multiplier(u, [&](std::size_t idx) { return lat.eigenvalue(idx); });
    return apply_multiplier(u, [&](std::size_t idx) { return std::pow(lat.eigenvalue(idx), s); });
}

SpectralField helmholtz_inverse(const SpectralField& u, double alpha) {
    if (!(alpha >= 0.0)) throw UsageError("helmholtz_inverse: alpha must be nonnegative");
    const WaveLattice& lat = u.lattice();
    const double a2 = alpha * alpha;
    return apply_multiplier(u, [&](std::size_t idx) { return 1.0 / (1.0 + a2 * lat.eigenvalue(idx)); });
}

SpectralField bilinear_B(const SpectralField& u, const SpectralField& v) {
    require_same_lattice(u, v);
    const WaveLattice& lat = u.lattice();
    FftWorkspace& ws = workspace_for(lat.resolution());
    Scratch& s = scratch_for(ws);
    const std::size_t nr = ws.real_size();

    for (int j = 0; j < 3; ++j) ws.to_physical(u.component(j), s.u[j]);
    for (auto& a : s.acc) std::fill(a.begin(), a.end(), 0.0);

    for (int i = 0; i < 3; ++i) {
        const auto vi = v.component(i);
        for (int j = 0; j < 3; ++j) {
            const auto& kj = lat.physical_component(j);
            for (std::size_t idx = 0; idx < lat.size(); ++idx) s.spec[idx] = kI * (kj[idx] * vi[idx]);
            ws.to_physical(s.spec, s.grad);
            const double* uj = s.u[j].data();
            const double* g = s.grad.data();
            double* acc = s.acc[i].data();
            for (std::size_t x = 0; x < nr; ++x) acc[x] += uj[x] * g[x];
        }
    }
    for (int i = 0; i < 3; ++i) ws.to_spectral(s.acc[i], s.hat[i]);
    SpectralField out(u.lattice_ptr());
    finish_nonlinear(s.hat, out);
    return out;
}

SpectralField advect_self(const SpectralField& u) {
    SpectralField out(u.lattice_ptr());
    advect_self_into(u, out);
    return out;
}

void advect_self_into(const SpectralField& u, SpectralField& out) {
    require_same_lattice(u, out);
    const WaveLattice& lat = u.lattice();
    FftWorkspace& ws = workspace_for(lat.resolution());
    Scratch& s = scratch_for(ws);
    const std::size_t nr = ws.real_size();
    const auto& modes = lat.dealiased_indices();

    for (int j = 0; j < 3; ++j) ws.to_physical(u.component(j), s.u[j]);
    for (auto& h : s.hat) {
        for (std::size_t idx : modes) h[idx] = Complex{};
    }

    // div(u u^T)_i = sum_j d_j (u_i u_j); each symmetric product feeds two components.
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            const double* ui = s.u[i].data();
            const double* uj = s.u[j].data();
            double* g = s.grad.data();
            for (std::size_t x = 0; x < nr; ++x) g[x] = ui[x] * uj[x];
            ws.to_spectral(s.grad, s.prod);
            const auto& ki = lat.physical_component(i);
            const auto& kj = lat.physical_component(j);
            Complex* hi = s.hat[i].data();
            Complex* hj = s.hat[j].data();
            for (std::size_t idx : modes) {
                const Complex ip = kI * s.prod[idx];
                hi[idx] += kj[idx] * ip;
                if (j != i) hj[idx] += ki[idx] * ip;
            }
        }
    }
    finish_nonlinear(s.hat, out);
}

double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w) {
    require_same_lattice(u, w);
    return inner(bilinear_B(u, v), w);
}

SpectralField band_project(const SpectralField& u, const ShellBand& band) {
    if (band.lo > band.hi) throw UsageError("band_project: lower edge exceeds upper edge");
    const WaveLattice& lat = u.lattice();
    return apply_multiplier(u, [&](std::size_t idx) {
        return band.contains(std::sqrt(lat.eigenvalue(idx))) ? 1.0 : 0.0;
    });
}

std::vector<double> energy_spectrum(const SpectralField& u) {
    const WaveLattice& lat = u.lattice();
    const int half = lat.resolution() / 2;
    const auto bins = static_cast<std::size_t>(std::lround(std::sqrt(3.0) * half)) + 1;
    std::vector<double> spectrum(bins, 0.0);
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        const double w = lat.weight(idx);
        if (w == 0.0) continue;
        const Vec3c v = u.at(idx);
        const double e = std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
        const auto shell = static_cast<std::size_t>(
            std::lround(std::sqrt(static_cast<double>(lat.integer_norm2(idx)))));
        spectrum[shell] += 0.5 * w * e;
    }
    return spectrum;
}

std::optional<double> gevrey_norm(const SpectralField& u, double r, double tau) {
    if (!(tau >= 0.0)) throw UsageError("gevrey_norm: tau must be nonnegative");
    const WaveLattice& lat = u.lattice();
    const double log_max = std::log(std::numeric_limits<double>::max());
    // Terms are combined in log space; any single term above DBL_MAX is out of range.
    std::vector<double> logs;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        const double w = lat.weight(idx);
        if (w == 0.0) continue;
        const Vec3c v = u.at(idx);
        const double e = std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
        if (e == 0.0) continue;
        const double kappa = std::sqrt(lat.eigenvalue(idx));
        const double lt = std::log(w * e) + 2.0 * r * std::log(kappa) + 2.0 * tau * kappa;
        if (lt > log_max) return std::nullopt;
        logs.push_back(lt);
        peak = std::max(peak, lt);
    }
    if (logs.empty()) return 0.0;
    double sum = 0.0;
    for (double lt : logs) sum += std::exp(lt - peak);
    const double log_total = peak + std::log(sum);
    if (log_total > log_max) return std::nullopt;
    return std::exp(0.5 * log_total);
}

namespace {

/// sum_k weight(k) * lambda(k)^power * |u_k|^2 over stored modes.
double weighted_norm2(const SpectralField& u, int power) {
    const WaveLattice& lat = u.lattice();
    const auto& lam = lat.eigenvalues();
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto comp = u.component(c);
        for (std::size_t idx = 0; idx < lat.size(); ++idx) {
            double m = lat.weight(idx) * std::norm(comp[idx]);
            for (int p = 0; p < power; ++p) m *= lam[idx];
            sum += m;
        }
    }
    return sum;
}

}  // namespace

double h1_norm2(const SpectralField& u) { return weighted_norm2(u, 1); }

double stokes_norm2(const SpectralField& u) { return weighted_norm2(u, 2); }

std::array<std::vector<double>, 3> to_physical(const SpectralField& u) {
    FftWorkspace& ws = workspace_for(u.lattice().resolution());
    std::array<std::vector<double>, 3> out;
    for (int c = 0; c < 3; ++c) {
        out[c].resize(ws.real_size());
        ws.to_physical(u.component(c), out[c]);
    }
    return out;
}

SpectralField from_physical(LatticePtr lattice, const std::array<std::vector<double>, 3>& values) {
    FftWorkspace& ws = workspace_for(lattice->resolution());
    SpectralField out(lattice);
    for (int c = 0; c < 3; ++c) {
        if (values[c].size() != ws.real_size()) throw UsageError("from_physical: wrong grid size");
        ws.to_spectral(values[c], out.component(c));
    }
    out.enforce_hermitian();
    return out;
}

}  // namespace nsv
