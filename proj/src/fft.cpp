#include "nsv/fft.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <new>

namespace nsv {

namespace {
// The FFTW planner is not reentrant; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

FftWorkspace::FftWorkspace(int n)
    : n_(n),
      real_size_(static_cast<std::size_t>(n) * n * n),
      complex_size_(static_cast<std::size_t>(n) * n * (n / 2 + 1)) {
    std::lock_guard lock(planner_mutex());
    real_buf_ = fftw_alloc_real(real_size_);
    complex_buf_ = fftw_alloc_complex(complex_size_);
    if (!real_buf_ || !complex_buf_) throw std::bad_alloc();
    // FFTW_ESTIMATE keeps plan selection (and so rounding) reproducible run to run.
    forward_ = fftw_plan_dft_r2c_3d(n, n, n, real_buf_, complex_buf_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_3d(n, n, n, complex_buf_, real_buf_, FFTW_ESTIMATE);
}

FftWorkspace::~FftWorkspace() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_buf_);
    fftw_free(complex_buf_);
}

void FftWorkspace::to_physical(std::span<const std::complex<double>> in, std::span<double> out) {
    auto* dst = reinterpret_cast<std::complex<double>*>(complex_buf_);
    std::copy(in.begin(), in.end(), dst);
    fftw_execute(backward_);  // c2r destroys its input, hence the copy
    std::copy(real_buf_, real_buf_ + real_size_, out.begin());
}

void FftWorkspace::to_spectral(std::span<const double> in, std::span<std::complex<double>> out) {
    std::copy(in.begin(), in.end(), real_buf_);
    fftw_execute(forward_);
    const double scale = 1.0 / static_cast<double>(real_size_);
    const auto* src = reinterpret_cast<const std::complex<double>*>(complex_buf_);
    for (std::size_t i = 0; i < complex_size_; ++i) out[i] = src[i] * scale;
}

FftWorkspace& workspace_for(int n) {
    thread_local std::map<int, std::unique_ptr<FftWorkspace>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftWorkspace>(n);
    return *slot;
}

}  // namespace nsv
