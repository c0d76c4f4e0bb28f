#include "nsv/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nsv/errors.hpp"
#include "nsv/operators.hpp"

namespace nsv {

SpectralField::SpectralField(LatticePtr lattice)
    : lattice_(std::move(lattice)), data_(3 * lattice_->size(), Complex{}) {}

Vec3c SpectralField::at(std::size_t idx) const {
    const std::size_t n = lattice_->size();
    return {data_[idx], data_[n + idx], data_[2 * n + idx]};
}

void SpectralField::set(std::size_t idx, const Vec3c& value) {
    const std::size_t n = lattice_->size();
    data_[idx] = value[0];
    data_[n + idx] = value[1];
    data_[2 * n + idx] = value[2];
}

void SpectralField::set_mode(std::array<int, 3> k, const Vec3c& value) {
    const WaveLattice& lat = *lattice_;
    const std::size_t idx = lat.index(k[0], k[1], k[2]);
    const Vec3c conj_value{std::conj(value[0]), std::conj(value[1]), std::conj(value[2])};
    if (k[2] < 0) {
        set(idx, conj_value);
        return;
    }
    set(idx, value);
    if (k[2] == 0) set(lat.partner(idx), conj_value);
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same_lattice(*this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    require_same_lattice(*this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : data_) c *= s;
    return *this;
}

void SpectralField::axpy(double s, const SpectralField& other) {
    require_same_lattice(*this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

double SpectralField::norm2() const { return inner(*this, *this); }

double SpectralField::norm() const { return std::sqrt(norm2()); }

double SpectralField::max_divergence() const {
    const WaveLattice& lat = *lattice_;
    double worst = 0.0;
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        if (!lat.retained(idx)) continue;
        const Vec3c u = at(idx);
        const double amp = std::sqrt(std::norm(u[0]) + std::norm(u[1]) + std::norm(u[2]));
        if (amp == 0.0) continue;
        const auto k = lat.physical(idx);
        const Complex div = k[0] * u[0] + k[1] * u[1] + k[2] * u[2];
        worst = std::max(worst, std::abs(div) / (amp * std::sqrt(lat.eigenvalue(idx))));
    }
    return worst;
}

bool SpectralField::is_hermitian() const {
    const WaveLattice& lat = *lattice_;
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        const Vec3c u = at(idx);
        if (!lat.retained(idx)) {
            if (u[0] != Complex{} || u[1] != Complex{} || u[2] != Complex{}) return false;
            continue;
        }
        if (lat.wavevector(idx)[2] != 0) continue;
        const Vec3c p = at(lat.partner(idx));
        for (int c = 0; c < 3; ++c) {
            if (u[c] != std::conj(p[c])) return false;
        }
    }
    return true;
}

void SpectralField::enforce_hermitian() {
    const WaveLattice& lat = *lattice_;
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        if (!lat.retained(idx)) {
            set(idx, Vec3c{});
            continue;
        }
        if (lat.wavevector(idx)[2] != 0) continue;
        const std::size_t p = lat.partner(idx);
        if (p < idx) continue;
        Vec3c u = at(idx);
        const Vec3c v = at(p);
        for (int c = 0; c < 3; ++c) u[c] = 0.5 * (u[c] + std::conj(v[c]));
        set(idx, u);
        set(p, Vec3c{std::conj(u[0]), std::conj(u[1]), std::conj(u[2])});
    }
}

bool SpectralField::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& c) {
        return std::isfinite(c.real()) && std::isfinite(c.imag());
    });
}

void SpectralField::zero_outside_mask() {
    const WaveLattice& lat = *lattice_;
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        if (!lat.dealiased(idx)) set(idx, Vec3c{});
    }
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

double inner(const SpectralField& u, const SpectralField& v) {
    require_same_lattice(u, v);
    const WaveLattice& lat = u.lattice();
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto a = u.component(c);
        const auto b = v.component(c);
        for (std::size_t idx = 0; idx < lat.size(); ++idx) {
            const double w = lat.weight(idx);
            if (w == 0.0) continue;
            sum += w * (a[idx].real() * b[idx].real() + a[idx].imag() * b[idx].imag());
        }
    }
    return sum;
}

void require_same_lattice(const SpectralField& a, const SpectralField& b) {
    if (a.empty() || b.empty()) throw UsageError("operation on an empty field");
    if (a.lattice_ptr() != b.lattice_ptr() && !(a.lattice() == b.lattice())) {
        throw UsageError("fields live on different lattices");
    }
}

namespace {

SpectralField gaussian_on(LatticePtr lattice, std::uint64_t seed, auto&& keep) {
    SpectralField u(lattice);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const WaveLattice& lat = *lattice;
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        // Draw for every stored mode so the stream does not depend on the filter.
        Vec3c v;
        for (auto& c : v) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            c = Complex(re, im);
        }
        if (lat.retained(idx) && keep(idx)) u.set(idx, v);
    }
    u.enforce_hermitian();
    return leray_project(u);
}

}  // namespace

SpectralField random_white_field(LatticePtr lattice, std::uint64_t seed) {
    const WaveLattice* lat = lattice.get();
    return gaussian_on(std::move(lattice), seed,
                       [lat](std::size_t idx) { return lat->dealiased(idx); });
}

SpectralField random_band_field(LatticePtr lattice, std::uint64_t seed, double kappa_lo,
                                double kappa_hi, double amplitude) {
    if (kappa_lo > kappa_hi) throw UsageError("forcing band lower edge exceeds upper edge");
    const WaveLattice* lat = lattice.get();
    SpectralField f = gaussian_on(std::move(lattice), seed, [&](std::size_t idx) {
        const double kappa = std::sqrt(lat->eigenvalue(idx));
        return lat->dealiased(idx) && kappa >= kappa_lo && kappa <= kappa_hi;
    });
    const double norm = f.norm();
    if (norm == 0.0) throw UsageError("forcing band contains no lattice modes");
    f *= amplitude / norm;
    return f;
}

SpectralField random_field(LatticePtr lattice, std::uint64_t seed, double energy,
                           double peak_shell) {
    if (!(peak_shell > 0.0)) throw UsageError("spectrum peak shell must be positive");
    SpectralField u = random_white_field(lattice, seed);
    const WaveLattice& lat = *lattice;
    const std::vector<double> spectrum = energy_spectrum(u);
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        if (!lat.retained(idx)) continue;
        const double kn = std::sqrt(static_cast<double>(lat.integer_norm2(idx)));
        const auto shell = static_cast<std::size_t>(std::lround(kn));
        if (spectrum[shell] <= 0.0) continue;
        const double n = static_cast<double>(shell);
        const double target = std::pow(n, 4) * std::exp(-2.0 * n * n / (peak_shell * peak_shell));
        const double s = std::sqrt(target / spectrum[shell]);
        Vec3c v = u.at(idx);
        for (auto& c : v) c *= s;
        u.set(idx, v);
    }
    const double current = 0.5 * u.norm2();
    if (current > 0.0) u *= std::sqrt(energy / current);
    return u;
}

SpectralField single_mode(LatticePtr lattice, std::array<int, 3> k, double norm2) {
    SpectralField u(lattice);
    const double kk = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
    if (kk == 0.0) throw UsageError("single_mode needs a nonzero wavevector");
    int axis = 0;
    for (int c = 1; c < 3; ++c) {
        if (std::abs(k[c]) < std::abs(k[axis])) axis = c;
    }
    std::array<double, 3> p{};
    p[axis] = 1.0;
    const double proj = k[axis] / kk;
    for (int c = 0; c < 3; ++c) p[c] -= proj * k[c];
    const double pn = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    const double amp = std::sqrt(0.5 * norm2);
    u.set_mode(k, Vec3c{amp * p[0] / pn, amp * p[1] / pn, amp * p[2] / pn});
    return u;
}

}  // namespace nsv
