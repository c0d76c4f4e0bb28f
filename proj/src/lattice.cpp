#include "nsv/lattice.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nsv/errors.hpp"

namespace nsv {

WaveLattice::WaveLattice(int resolution, double box_length)
    : n_(resolution), nz_(resolution / 2 + 1), box_length_(box_length) {
    if (resolution < 4 || resolution % 2 != 0) {
        throw UsageError("lattice resolution must be even and >= 4, got " +
                         std::to_string(resolution));
    }
    if (!(box_length > 0.0) || !std::isfinite(box_length)) {
        throw UsageError("box length must be positive");
    }
    kappa_unit_ = 2.0 * std::numbers::pi / box_length_;
    kmax_ = (n_ - 1) / 3;  // largest k with 3k < N
    size_ = static_cast<std::size_t>(n_) * n_ * nz_;
    kx_.resize(size_);
    ky_.resize(size_);
    kz_.resize(size_);
    k2_.resize(size_);
    weight_.resize(size_);
    mask_.resize(size_);
    for (auto& v : kphys_) v.resize(size_);
    lambda_.resize(size_);

    const int half = n_ / 2;
    std::size_t idx = 0;
    for (int i = 0; i < n_; ++i) {
        const int kx = i <= half ? i : i - n_;
        for (int j = 0; j < n_; ++j) {
            const int ky = j <= half ? j : j - n_;
            for (int l = 0; l < nz_; ++l, ++idx) {
                const int kz = l;
                kx_[idx] = kx;
                ky_[idx] = ky;
                kz_[idx] = kz;
                k2_[idx] = kx * kx + ky * ky + kz * kz;
                kphys_[0][idx] = kappa_unit_ * kx;
                kphys_[1][idx] = kappa_unit_ * ky;
                kphys_[2][idx] = kappa_unit_ * kz;
                lambda_[idx] = kappa_unit_ * kappa_unit_ * k2_[idx];
                const bool nyquist = kx == half || ky == half || kz == half;
                const bool zero = kx == 0 && ky == 0 && kz == 0;
                weight_[idx] = (nyquist || zero) ? 0.0 : (kz == 0 ? 1.0 : 2.0);
                mask_[idx] = (!nyquist && !zero && 3 * std::abs(kx) < n_ &&
                              3 * std::abs(ky) < n_ && 3 * kz < n_)
                                 ? 1
                                 : 0;
                if (mask_[idx]) mask_list_.push_back(idx);
            }
        }
    }
}

double WaveLattice::kappa_max() const {
    return kappa_unit_ * std::sqrt(3.0 * kmax_ * kmax_);
}

std::size_t WaveLattice::index(int kx, int ky, int kz) const {
    const int half = n_ / 2;
    auto in_range = [half](int k) { return k > -half && k <= half; };
    if (!in_range(kx) || !in_range(ky) || !in_range(kz)) {
        throw UsageError("wavevector outside the lattice");
    }
    if (kz < 0) {
        kx = -kx;
        ky = -ky;
        kz = -kz;
        // -(N/2) is not representable; N/2 is the same aliased mode.
        if (kx == -half) kx = half;
        if (ky == -half) ky = half;
    }
    const int i = kx >= 0 ? kx : kx + n_;
    const int j = ky >= 0 ? ky : ky + n_;
    return (static_cast<std::size_t>(i) * n_ + j) * nz_ + kz;
}

std::size_t WaveLattice::partner(std::size_t idx) const {
    const std::size_t plane = idx / nz_;
    const int l = static_cast<int>(idx % nz_);
    const int i = static_cast<int>(plane / n_);
    const int j = static_cast<int>(plane % n_);
    const int pi = (n_ - i) % n_;
    const int pj = (n_ - j) % n_;
    return (static_cast<std::size_t>(pi) * n_ + pj) * nz_ + l;
}

ShellBand::ShellBand(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo >= 0.0)) throw UsageError("band lower edge must be nonnegative");
    if (lo > hi) throw UsageError("band lower edge exceeds upper edge");
}

bool ShellBand::unbounded() const { return hi == std::numeric_limits<double>::infinity(); }

}  // namespace nsv
