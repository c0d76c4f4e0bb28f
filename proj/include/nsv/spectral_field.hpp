#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "nsv/lattice.hpp"

namespace nsv {

using Complex = std::complex<double>;
using Vec3c = std::array<Complex, 3>;

/// Real periodic vector field held as Fourier coefficients on a WaveLattice.
///
/// Coefficients are the Fourier-series amplitudes u(x) = sum_k u_k exp(i k.x),
/// so the coefficient l2 norm equals the volume-averaged physical L2 norm.
/// Storage is component-major: three blocks of lattice().size() values.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(LatticePtr lattice);

    const WaveLattice& lattice() const { return *lattice_; }
    const LatticePtr& lattice_ptr() const { return lattice_; }
    bool empty() const { return !lattice_; }

    std::span<Complex> component(int c) {
        return {data_.data() + c * lattice_->size(), lattice_->size()};
    }
    std::span<const Complex> component(int c) const {
        return {data_.data() + c * lattice_->size(), lattice_->size()};
    }
    std::span<Complex> data() { return data_; }
    std::span<const Complex> data() const { return data_; }

    Vec3c at(std::size_t idx) const;
    void set(std::size_t idx, const Vec3c& value);

    /// Sets the coefficient of wavevector k and keeps the field real by writing
    /// the conjugate at -k when that partner is stored.
    void set_mode(std::array<int, 3> k, const Vec3c& value);

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);
    /// this += s * other
    void axpy(double s, const SpectralField& other);

    /// |u|^2 over the full lattice.
    double norm2() const;
    double norm() const;

    /// max_k |k.u_k| / (|k| |u_k|) over modes with nonzero amplitude.
    double max_divergence() const;
    /// True when every kz = 0 coefficient equals the conjugate of its partner
    /// and excluded modes are zero.
    bool is_hermitian() const;
    /// Restores exact Hermitian symmetry on the kz = 0 plane (averaging
    /// partners) and zeroes excluded modes.
    void enforce_hermitian();
    bool all_finite() const;

    void zero_outside_mask();

    friend bool operator==(const SpectralField&, const SpectralField&) = default;

private:
    LatticePtr lattice_;
    std::vector<Complex> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Real inner product (u, v) = sum_k Re(u_k . conj(v_k)) over the full lattice.
double inner(const SpectralField& u, const SpectralField& v);

void require_same_lattice(const SpectralField& a, const SpectralField& b);

/// Divergence-free field with prescribed shell spectrum E(n) ~ n^4 exp(-2 n^2 / n0^2),
/// restricted to the dealias mask and scaled so that (1/2)|u|^2 = energy.
SpectralField random_field(LatticePtr lattice, std::uint64_t seed, double energy,
                           double peak_shell);

/// Divergence-free field with independent Gaussian coefficients on the dealias mask.
SpectralField random_white_field(LatticePtr lattice, std::uint64_t seed);

/// Divergence-free real field with Gaussian coefficients on modes kappa_lo <= sqrt(lambda) <= kappa_hi,
/// scaled to |f| = amplitude.
SpectralField random_band_field(LatticePtr lattice, std::uint64_t seed, double kappa_lo,
                                double kappa_hi, double amplitude);

/// Real divergence-free single-mode field at wavevector k with |u|^2 = norm2.
/// The polarization is the first unit vector orthogonal to k (taken against
/// the coordinate axis least aligned with k).
SpectralField single_mode(LatticePtr lattice, std::array<int, 3> k, double norm2 = 1.0);

}  // namespace nsv
