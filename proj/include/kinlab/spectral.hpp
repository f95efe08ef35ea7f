#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "kinlab/error.hpp"

namespace kinlab {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// Real <-> half-complex FFT of fixed size n. Owns its buffers and plans;
/// not shareable across threads, but independent instances are.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        if (n < 2) throw domain_error("RealFft: size must be >= 2");
        real_ = fftw_alloc_real(n);
        spec_ = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard lock(detail::fftw_planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
    }

    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    ~RealFft() {
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(backward_);
        }
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t n_modes() const noexcept { return n_ / 2 + 1; }

    /// Unnormalised forward transform.
    void forward(std::span<const double> x, std::vector<std::complex<double>>& out) {
        for (std::size_t i = 0; i < n_; ++i) real_[i] = x[i];
        fftw_execute(forward_);
        out.resize(n_modes());
        for (std::size_t k = 0; k < n_modes(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
    }

    /// Inverse transform including the 1/n normalisation.
    void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
        for (std::size_t k = 0; k < n_modes(); ++k) {
            spec_[k][0] = in[k].real();
            spec_[k][1] = in[k].imag();
        }
        fftw_execute(backward_);
        out.resize(n_);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
    }

private:
    std::size_t n_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

} // namespace kinlab
