#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace nsv {

/// Owns FFTW plans and buffers for one N^3 real <-> N*N*(N/2+1) complex transform.
/// Not thread safe; use workspace_for() to get a per-thread instance.
class FftWorkspace {
public:
    explicit FftWorkspace(int n);
    ~FftWorkspace();
    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;

    int resolution() const { return n_; }
    std::size_t real_size() const { return real_size_; }
    std::size_t complex_size() const { return complex_size_; }

    /// Unnormalized inverse transform: out(x) = sum_k in_k exp(i k.x).
    void to_physical(std::span<const std::complex<double>> in, std::span<double> out);
    /// Normalized forward transform: out_k = N^-3 sum_x in(x) exp(-i k.x).
    void to_spectral(std::span<const double> in, std::span<std::complex<double>> out);

private:
    int n_;
    std::size_t real_size_;
    std::size_t complex_size_;
    double* real_buf_;
    fftw_complex* complex_buf_;
    fftw_plan forward_;
    fftw_plan backward_;
};

/// Thread-local cached workspace for resolution n.
FftWorkspace& workspace_for(int n);

}  // namespace nsv
