#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

namespace nsv {

/// Wavevector grid of a periodic box [0, L]^3 resolved by N points per axis.
///
/// Coefficients are stored in the real-to-complex half layout used by FFTW:
/// kx, ky in FFT order over N values, kz in [0, N/2]. Modes with kz = 0 appear
/// together with their Hermitian partners; every other stored mode stands for
/// itself and its (unstored) conjugate at -k, which is what weight() encodes.
///
/// The zero wavevector and every Nyquist wavevector (some |k_i| = N/2) are
/// excluded: their weight is 0 and fields keep them at zero.
class WaveLattice {
public:
    explicit WaveLattice(int resolution, double box_length = 2.0 * std::numbers::pi);

    int resolution() const { return n_; }
    double box_length() const { return box_length_; }
    /// 2*pi/L, the physical wavenumber of the unit lattice vector.
    double kappa_unit() const { return kappa_unit_; }

    /// Number of stored modes, N * N * (N/2 + 1).
    std::size_t size() const { return size_; }
    int nz() const { return nz_; }

    std::array<int, 3> wavevector(std::size_t idx) const {
        return {kx_[idx], ky_[idx], kz_[idx]};
    }
    /// Physical wavevector components (2*pi/L) * k.
    std::array<double, 3> physical(std::size_t idx) const {
        return {kappa_unit_ * kx_[idx], kappa_unit_ * ky_[idx], kappa_unit_ * kz_[idx]};
    }
    int integer_norm2(std::size_t idx) const { return k2_[idx]; }
    /// Physical wavevector component arrays, one entry per stored mode.
    const std::vector<double>& physical_component(int c) const { return kphys_[c]; }
    const std::vector<double>& eigenvalues() const { return lambda_; }
    /// Stokes eigenvalue lambda(k) = (2*pi/L)^2 |k|^2.
    double eigenvalue(std::size_t idx) const { return kappa_unit_ * kappa_unit_ * k2_[idx]; }
    double lambda1() const { return kappa_unit_ * kappa_unit_; }

    /// Multiplicity of the stored mode in full-lattice sums: 0 (excluded), 1 or 2.
    double weight(std::size_t idx) const { return weight_[idx]; }
    bool retained(std::size_t idx) const { return weight_[idx] > 0.0; }
    /// 2/3-rule mask: 3|k_i| < N for every component.
    bool dealiased(std::size_t idx) const { return mask_[idx] != 0; }

    /// Storage indices of all dealiased modes, ascending.
    const std::vector<std::size_t>& dealiased_indices() const { return mask_list_; }

    /// Largest |k_i| kept by the dealias mask.
    int max_dealiased_component() const { return kmax_; }
    /// Largest sqrt(lambda) over dealiased modes.
    double kappa_max() const;

    /// Storage index of wavevector k; for kz < 0 returns the index of -k (the
    /// caller conjugates). Components must lie in (-N/2, N/2].
    std::size_t index(int kx, int ky, int kz) const;
    bool stores_directly(int kz) const { return kz >= 0; }

    /// Index of the Hermitian partner -k for modes in the kz = 0 plane.
    std::size_t partner(std::size_t idx) const;

    bool operator==(const WaveLattice& other) const {
        return n_ == other.n_ && box_length_ == other.box_length_;
    }

private:
    int n_;
    int nz_;
    double box_length_;
    double kappa_unit_;
    int kmax_;
    std::size_t size_;
    std::vector<int> kx_, ky_, kz_, k2_;
    std::array<std::vector<double>, 3> kphys_;
    std::vector<double> lambda_;
    std::vector<double> weight_;
    std::vector<unsigned char> mask_;
    std::vector<std::size_t> mask_list_;
};

using LatticePtr = std::shared_ptr<const WaveLattice>;

inline LatticePtr make_lattice(int resolution, double box_length = 2.0 * std::numbers::pi) {
    return std::make_shared<const WaveLattice>(resolution, box_length);
}

/// Half-open band [lo, hi) in sqrt(lambda); hi = +inf means "up to the truncation limit".
struct ShellBand {
    double lo = 0.0;
    double hi = 0.0;

    ShellBand() = default;
    ShellBand(double lo_, double hi_);

    bool contains(double kappa) const { return lo <= kappa && kappa < hi; }
    bool unbounded() const;

    friend bool operator==(const ShellBand&, const ShellBand&) = default;
};

}  // namespace nsv
