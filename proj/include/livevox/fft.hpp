#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>

#include <fftw3.h>

namespace livevox::detail {

// FFTW's planner is not re-entrant; execution with a fixed plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Transforms two real signals at once: they go in as the real and imaginary parts of one
/// complex length-n buffer, and a half spectrum written back into the same buffer comes out
/// as a real signal. One complex FFT is cheaper than two real ones at the sizes we run.
/// Plans use FFTW_ESTIMATE so a given length always gets the same plan and the same bits.
class PairFft {
public:
    explicit PairFft(std::size_t n) : n_(n), buffer_(fftw_alloc_complex(n)) {
        std::lock_guard lock(fftw_planner_mutex());
        const int len = static_cast<int>(n);
        forward_ = fftw_plan_dft_1d(len, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(len, buffer_, reinterpret_cast<double*>(buffer_), FFTW_ESTIMATE);
    }

    ~PairFft() {
        {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(inverse_);
        }
        fftw_free(buffer_);
    }

    PairFft(const PairFft&) = delete;
    PairFft& operator=(const PairFft&) = delete;

    std::size_t size() const noexcept { return n_; }

    /// Full complex buffer: x + i·y before forward(), Z = DFT(x + i·y) after.
    std::span<std::complex<double>> buffer() noexcept {
        return {reinterpret_cast<std::complex<double>*>(buffer_), n_};
    }

    void forward() { fftw_execute(forward_); }

    /// Bins 0..n/2 of the buffer are read as a Hermitian half spectrum; afterwards the first
    /// n doubles of the buffer hold the unnormalized real inverse.
    void inverse() { fftw_execute(inverse_); }
    std::span<const double> real_output() const noexcept { return {reinterpret_cast<const double*>(buffer_), n_}; }

private:
    std::size_t n_;
    fftw_complex* buffer_;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

}  // namespace livevox::detail
