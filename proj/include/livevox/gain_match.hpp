#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "livevox/audio.hpp"
#include "livevox/framing.hpp"

namespace livevox {

struct FrameCorrelation {
    std::size_t frame_index = 0;
    std::size_t start_sample = 0;
    double pearson_r = std::numeric_limits<double>::quiet_NaN();  // NaN when !usable
    bool usable = false;

    friend bool operator==(const FrameCorrelation& a, const FrameCorrelation& b) {
        const bool same_r = a.pearson_r == b.pearson_r || (std::isnan(a.pearson_r) && std::isnan(b.pearson_r));
        return a.frame_index == b.frame_index && a.start_sample == b.start_sample && same_r && a.usable == b.usable;
    }
};

struct ScaleEstimate {
    double alpha = 0.0;
    std::size_t frame_index = 0;
    double pearson_r = 0.0;
    std::size_t frame_count = 0;

    friend bool operator==(const ScaleEstimate&, const ScaleEstimate&) = default;
};

/// Periodic Hann window: 0.5 - 0.5·cos(2πn/N).
inline std::vector<double> periodic_hann(std::size_t length) {
    std::vector<double> w(length);
    for (std::size_t i = 0; i < length; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(length));
    }
    return w;
}

/// Pearson r of two equal-length sequences; NaN if either has zero variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double r = cov / std::sqrt(var_a * var_b);
    return std::clamp(r, -1.0, 1.0);
}

/// Pearson correlation of Hann-windowed aligned frames.
inline std::vector<FrameCorrelation> framewise_pearson(const MonoSignal& live_voc, const MonoSignal& rec_voc,
                                                       double frame_seconds, double hop_seconds) {
    require_same_rate(live_voc, rec_voc);
    require_same_length(live_voc, rec_voc);
    const Framing framing = make_framing(frame_seconds, hop_seconds, live_voc.sample_rate(), live_voc.size());
    if (framing.count == 0) {
        fail_input("signals of " + std::to_string(live_voc.size()) + " samples are shorter than one frame of " +
                   std::to_string(framing.frame_length));
    }

    const auto window = periodic_hann(framing.frame_length);
    std::vector<double> wa(framing.frame_length), wb(framing.frame_length);
    std::vector<FrameCorrelation> out;
    out.reserve(framing.count);
    for (std::size_t i = 0; i < framing.count; ++i) {
        const std::size_t start = framing.start(i);
        for (std::size_t t = 0; t < framing.frame_length; ++t) {
            wa[t] = live_voc[start + t] * window[t];
            wb[t] = rec_voc[start + t] * window[t];
        }
        FrameCorrelation fc{i, start};
        fc.pearson_r = pearson(wa, wb);
        fc.usable = std::isfinite(fc.pearson_r);
        out.push_back(fc);
    }
    return out;
}

/// Usable frame with the highest r, earliest on ties.
inline FrameCorrelation best_frame(std::span<const FrameCorrelation> correlations) {
    if (correlations.empty()) fail_input("no frames to choose from");
    const FrameCorrelation* best = nullptr;
    for (const auto& fc : correlations) {
        if (fc.usable && (best == nullptr || fc.pearson_r > best->pearson_r)) best = &fc;
    }
    if (best == nullptr) {
        fail(ErrorKind::degenerate,
             "no usable frames among " + std::to_string(correlations.size()) + " (zero-variance stems, e.g. silence)");
    }
    return *best;
}

/// Closed-form least squares: argmin over alpha of ||alpha·rec - live||².
inline double least_squares_scale(std::span<const Sample> rec_frame, std::span<const Sample> live_frame) {
    if (rec_frame.size() != live_frame.size() || rec_frame.empty()) {
        fail_input("least-squares frames must have equal non-zero length");
    }
    double dot = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < rec_frame.size(); ++i) {
        dot += rec_frame[i] * live_frame[i];
        norm += rec_frame[i] * rec_frame[i];
    }
    if (norm <= 0.0) fail(ErrorKind::degenerate, "studio frame has zero energy; scale is undefined");
    return dot / norm;
}

inline double least_squares_scale(const MonoSignal& rec_frame, const MonoSignal& live_frame) {
    return least_squares_scale(rec_frame.samples(), live_frame.samples());
}

struct ScaleFit {
    ScaleEstimate estimate;
    std::vector<FrameCorrelation> correlations;
};

/// Gain for the studio vocal stem, fitted on the raw samples of the best-correlated frame.
/// Also returns every frame's correlation for reporting.
inline ScaleFit fit_scale(const MonoSignal& live_voc, const MonoSignal& rec_voc, double frame_seconds,
                          double hop_seconds) {
    ScaleFit fit;
    fit.correlations = framewise_pearson(live_voc, rec_voc, frame_seconds, hop_seconds);
    const FrameCorrelation best = best_frame(fit.correlations);
    const std::size_t frame_length = seconds_to_samples(frame_seconds, live_voc.sample_rate());
    fit.estimate.alpha = least_squares_scale(rec_voc.samples().subspan(best.start_sample, frame_length),
                                             live_voc.samples().subspan(best.start_sample, frame_length));
    fit.estimate.frame_index = best.frame_index;
    fit.estimate.pearson_r = best.pearson_r;
    fit.estimate.frame_count = fit.correlations.size();
    return fit;
}

inline ScaleEstimate estimate_scale(const MonoSignal& live_voc, const MonoSignal& rec_voc, double frame_seconds,
                                    double hop_seconds) {
    return fit_scale(live_voc, rec_voc, frame_seconds, hop_seconds).estimate;
}

}  // namespace livevox
