#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "livevox/audio.hpp"
#include "livevox/fft.hpp"
#include "livevox/framing.hpp"

namespace livevox {

/// Positive lag: x is delayed relative to y, so shift(y, lag) aligns y to x.
struct LagEstimate {
    SampleIndex lag = 0;
    double peak_value = 0.0;
    SampleIndex max_lag = 0;

    friend bool operator==(const LagEstimate&, const LagEstimate&) = default;
};

struct FrameLagVote {
    std::size_t frame_index = 0;
    SampleIndex lag = 0;
    bool included = false;

    friend bool operator==(const FrameLagVote&, const FrameLagVote&) = default;
};

struct FineLag {
    SampleIndex lag = 0;
    std::vector<FrameLagVote> votes;
};

/// Cross-spectrum bins below this magnitude are zeroed instead of whitened.
inline constexpr double kPhatEpsilon = 1e-12;

namespace detail {

/// Smallest power of two that holds a linear (non-wrapping) correlation of the two lengths.
inline std::size_t correlation_length(std::size_t len_x, std::size_t len_y) {
    return std::bit_ceil(len_x + len_y - 1);
}

inline void check_gcc_args(const MonoSignal& x, const MonoSignal& y, SampleIndex max_lag) {
    require_same_rate(x, y);
    if (x.empty() || y.empty()) fail_input("GCC-PHAT needs non-empty signals");
    const auto n = static_cast<SampleIndex>(correlation_length(x.size(), y.size()));
    if (max_lag <= 0 || max_lag >= n) {
        fail_input("max_lag " + std::to_string(max_lag) + " outside (0, " + std::to_string(n) + ")");
    }
}

inline std::complex<double> phat_weight(std::complex<double> cross) {
    // sqrt(norm) rather than abs: hypot's overflow care costs more than the whole FFT pass here.
    const double mag = std::sqrt(std::norm(cross));
    return mag < kPhatEpsilon ? std::complex<double>{} : cross / mag;
}

/// Scans lags 0, -1, +1, -2, +2, ... so a strict '>' implements the tie-break
/// (smallest |lag|, then negative first).
template <class CorrAt>
LagEstimate pick_peak(CorrAt&& corr_at, SampleIndex max_lag) {
    LagEstimate best{0, corr_at(SampleIndex{0}), max_lag};
    for (SampleIndex k = 1; k <= max_lag; ++k) {
        for (SampleIndex lag : {-k, k}) {
            const double v = corr_at(lag);
            if (v > best.peak_value) {
                best.lag = lag;
                best.peak_value = v;
            }
        }
    }
    return best;
}

/// Reusable GCC-PHAT workspace for a fixed transform length.
class GccPhatEngine {
public:
    explicit GccPhatEngine(std::size_t transform_length) : fft_(transform_length) {}

    std::size_t transform_length() const noexcept { return fft_.size(); }

    LagEstimate estimate(std::span<const Sample> x, std::span<const Sample> y, SampleIndex max_lag) {
        const std::size_t n = fft_.size();
        const std::size_t mask = n - 1;
        auto z = fft_.buffer();
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = {i < x.size() ? x[i] : 0.0, i < y.size() ? y[i] : 0.0};
        }
        fft_.forward();

        // Z = X + iY with X, Y Hermitian, so X[k] = (Z[k] + conj Z[-k]) / 2 and
        // Y[k] = (Z[k] - conj Z[-k]) / 2i. Writing bin k in place is safe: bin -k sits at
        // index >= n/2 and is never overwritten before it is read.
        for (std::size_t k = 0; k <= n / 2; ++k) {
            const auto a = z[k];
            const auto b = std::conj(z[(n - k) & mask]);
            const auto xk = 0.5 * (a + b);
            const auto yk = std::complex<double>(0.0, -0.5) * (a - b);
            z[k] = phat_weight(xk * std::conj(yk));
        }
        fft_.inverse();

        const auto corr = fft_.real_output();
        const double norm = 1.0 / static_cast<double>(n);
        const auto sn = static_cast<SampleIndex>(n);
        return pick_peak([&](SampleIndex lag) { return corr[static_cast<std::size_t>(lag >= 0 ? lag : sn + lag)] * norm; },
                         max_lag);
    }

private:
    PairFft fft_;
};

}  // namespace detail

/// GCC-PHAT time-delay estimate restricted to |lag| <= max_lag.
///
/// Both signals are zero-padded to a power-of-two length N >= len(x) + len(y) - 1, so the
/// correlation is linear. The cross-spectrum X·conj(Y) is whitened bin by bin, inverse
/// transformed and divided by N; the lag with the largest real value wins.
inline LagEstimate gcc_phat(const MonoSignal& x, const MonoSignal& y, SampleIndex max_lag) {
    detail::check_gcc_args(x, y, max_lag);
    detail::GccPhatEngine engine(detail::correlation_length(x.size(), y.size()));
    return engine.estimate(x.samples(), y.samples(), max_lag);
}

/// Direct-summation evaluation of the same PHAT-weighted correlation. O(N·len), for tests.
inline LagEstimate gcc_phat_naive(const MonoSignal& x, const MonoSignal& y, SampleIndex max_lag) {
    detail::check_gcc_args(x, y, max_lag);
    const std::size_t n = detail::correlation_length(x.size(), y.size());
    const std::size_t mask = n - 1;
    const std::size_t half = n / 2;

    std::vector<double> cos_table(n), sin_table(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        cos_table[j] = std::cos(angle);
        sin_table[j] = std::sin(angle);
    }

    // Real input: bins 0..N/2 determine the rest by conjugate symmetry.
    auto dft = [&](std::span<const Sample> s) {
        std::vector<std::complex<double>> out(half + 1);
        for (std::size_t k = 0; k <= half; ++k) {
            double re = 0.0, im = 0.0;
            std::size_t idx = 0;
            for (std::size_t t = 0; t < s.size(); ++t) {
                re += s[t] * cos_table[idx];
                im -= s[t] * sin_table[idx];
                idx = (idx + k) & mask;
            }
            out[k] = {re, im};
        }
        return out;
    };

    const auto xs = dft(x.samples());
    const auto ys = dft(y.samples());
    std::vector<std::complex<double>> cross(half + 1);
    for (std::size_t k = 0; k <= half; ++k) cross[k] = detail::phat_weight(xs[k] * std::conj(ys[k]));

    auto corr_at = [&](SampleIndex lag) {
        const std::size_t m = static_cast<std::size_t>(lag >= 0 ? lag : static_cast<SampleIndex>(n) + lag);
        double acc = cross[0].real() + ((m & 1) ? -cross[half].real() : cross[half].real());
        std::size_t idx = m & mask;
        for (std::size_t k = 1; k < half; ++k) {
            acc += 2.0 * (cross[k].real() * cos_table[idx] - cross[k].imag() * sin_table[idx]);
            idx = (idx + m) & mask;
        }
        return acc / static_cast<double>(n);
    };
    return detail::pick_peak(corr_at, max_lag);
}

/// Lag that shifts the studio stems onto the live recording, estimated on the accompaniments.
inline LagEstimate coarse_align(const MonoSignal& live_acc, const MonoSignal& rec_acc, double max_lag_seconds) {
    require_same_rate(live_acc, rec_acc);
    if (!(max_lag_seconds > 0.0)) fail_input("coarse max lag must be positive");
    if (live_acc.size() == 0 || rec_acc.size() == 0) fail_input("coarse alignment needs non-empty accompaniments");
    const auto requested = static_cast<SampleIndex>(seconds_to_samples(max_lag_seconds, live_acc.sample_rate()));
    // Short clips: lags past the padded length cannot occur, so the bound is capped there.
    const auto n = static_cast<SampleIndex>(detail::correlation_length(live_acc.size(), rec_acc.size()));
    return gcc_phat(live_acc, rec_acc, std::min(requested, n - 1));
}

/// Most frequent lag among the votes marked included; ties go to the smallest |lag|, then
/// the negative one. Zero when nothing is included.
inline SampleIndex mode_lag(std::span<const FrameLagVote> votes) {
    std::map<SampleIndex, std::size_t> counts;
    for (const auto& v : votes) {
        if (v.included) ++counts[v.lag];
    }
    SampleIndex best = 0;
    std::size_t best_count = 0;
    for (const auto& [lag, count] : counts) {
        const bool better = count > best_count ||
                            (count == best_count && (std::llabs(lag) < std::llabs(best) ||
                                                     (std::llabs(lag) == std::llabs(best) && lag < best)));
        if (better) {
            best = lag;
            best_count = count;
        }
    }
    return best;
}

/// Population standard deviation of the included votes, in samples.
inline double lag_dispersion(std::span<const FrameLagVote> votes) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : votes) {
        if (!v.included) continue;
        sum += static_cast<double>(v.lag);
        ++n;
    }
    if (n == 0) return 0.0;
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto& v : votes) {
        if (v.included) sq += (static_cast<double>(v.lag) - mean) * (static_cast<double>(v.lag) - mean);
    }
    return std::sqrt(sq / static_cast<double>(n));
}

/// Per-frame GCC-PHAT between the live and gain-matched studio vocal stems, reduced to the
/// most frequent lag. Frames where either side sits below the silence floor do not vote.
inline FineLag framewise_fine_lag(const MonoSignal& live_voc, const MonoSignal& rec_voc_scaled, double frame_seconds,
                                  double hop_seconds, double max_shift_seconds, double silence_floor_dbfs) {
    require_same_rate(live_voc, rec_voc_scaled);
    require_same_length(live_voc, rec_voc_scaled);
    const int rate = live_voc.sample_rate();
    const Framing framing = make_framing(frame_seconds, hop_seconds, rate, live_voc.size());
    const auto max_lag = static_cast<SampleIndex>(seconds_to_samples(max_shift_seconds, rate));

    FineLag result;
    if (framing.count == 0) return result;

    const std::size_t n = detail::correlation_length(framing.frame_length, framing.frame_length);
    if (max_lag <= 0 || max_lag >= static_cast<SampleIndex>(n)) {
        fail_input("fine-lag bound of " + std::to_string(max_lag) + " samples does not fit a frame of " +
                   std::to_string(framing.frame_length) + " samples");
    }
    detail::GccPhatEngine engine(n);
    result.votes.reserve(framing.count);
    for (std::size_t i = 0; i < framing.count; ++i) {
        const auto live = live_voc.samples().subspan(framing.start(i), framing.frame_length);
        const auto rec = rec_voc_scaled.samples().subspan(framing.start(i), framing.frame_length);
        FrameLagVote vote{i, 0, false};
        if (rms_dbfs(live) >= silence_floor_dbfs && rms_dbfs(rec) >= silence_floor_dbfs) {
            vote.lag = engine.estimate(live, rec, max_lag).lag;
            vote.included = true;
        }
        result.votes.push_back(vote);
    }
    result.lag = mode_lag(result.votes);
    return result;
}

}  // namespace livevox
