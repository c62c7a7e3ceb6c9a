#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <future>
#include <string>
#include <utility>

#include "livevox/alignment.hpp"
#include "livevox/audio.hpp"
#include "livevox/gain_match.hpp"
#include "livevox/report.hpp"
#include "livevox/separation.hpp"

namespace livevox {

struct Extraction {
    MonoSignal residual;
    ExtractionReport report;
};

namespace detail {

template <class Fn>
auto run_stage(ExtractionReport& report, const char* stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
        report.durations.push_back(
            {stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
    };
    try {
        auto result = fn();
        record();
        return result;
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage '") + stage + "': " + e.what());
    }
}

inline std::string format(const char* fmt, double a, double b = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

inline void collect_warnings(ExtractionReport& r) {
    if (r.lag_dispersion > r.resolved.dispersion_warning_samples) {
        r.warnings.push_back(format("lag-dispersion: fine-lag votes spread %.1f samples (threshold %.0f); "
                                    "the recordings likely differ in tempo and cannot cancel with a single lag",
                                    r.lag_dispersion, r.resolved.dispersion_warning_samples));
    }
    if (r.scale.alpha <= 0.0) {
        r.warnings.push_back(format("non-positive-scale: alpha = %.6g; the studio vocal appears polarity-inverted "
                                    "or uncorrelated with the live vocal",
                                    r.scale.alpha));
    }
    std::size_t included = 0;
    for (const auto& v : r.fine_votes) included += v.included ? 1 : 0;
    if (included == 0) {
        r.warnings.push_back("no-fine-lag-votes: every frame fell below the silence floor; fine lag defaulted to 0");
    }
    if (r.coarse_lag.lag == r.coarse_lag.max_lag || r.coarse_lag.lag == -r.coarse_lag.max_lag) {
        r.warnings.push_back(format("coarse-lag-at-bound: lag %.0f sits on the search bound of %.0f samples",
                                    static_cast<double>(r.coarse_lag.lag), static_cast<double>(r.coarse_lag.max_lag)));
    }
}

}  // namespace detail

/// Full extraction: separate both recordings, align the studio vocal stem onto the live one
/// via the accompaniments, match its gain, refine the lag, and subtract.
inline Extraction extract_live_vocals(const std::filesystem::path& live_path,
                                      const std::filesystem::path& studio_path, const PipelineConfig& config) {
    config.validate();
    ExtractionReport report;
    report.config = config;
    report.live_label = live_path.string();
    report.studio_label = studio_path.string();

    auto stems = detail::run_stage(report, "separation", [&] {
        auto live_job = std::async(std::launch::async, [&] { return separate(config.live_separator, live_path); });
        StemPair studio_stems = separate(config.studio_separator, studio_path);
        StemPair live_stems = live_job.get();
        return std::pair{std::move(live_stems), std::move(studio_stems)};
    });
    const StemPair& live = stems.first;
    const StemPair& studio = stems.second;
    const int rate = live.vocals.sample_rate();
    if (studio.vocals.sample_rate() != rate) {
        fail_input("live and studio recordings differ in sample rate (" + std::to_string(rate) + " Hz vs " +
                   std::to_string(studio.vocals.sample_rate()) + " Hz); resample one of them first");
    }
    report.resolved = resolve(config, rate);

    report.coarse_lag = detail::run_stage(report, "coarse_align", [&] {
        return coarse_align(live.accompaniment, studio.accompaniment, config.coarse_max_lag_seconds);
    });

    auto vocals = detail::run_stage(report, "coarse_shift", [&] {
        return match_lengths(live.vocals, shift(studio.vocals, report.coarse_lag.lag));
    });
    const MonoSignal& live_voc = vocals.first;
    MonoSignal& rec_voc = vocals.second;

    auto fit = detail::run_stage(report, "gain_match", [&] {
        return fit_scale(live_voc, rec_voc, config.frame_seconds, config.hop_seconds);
    });
    report.scale = fit.estimate;
    report.frame_correlations = std::move(fit.correlations);
    rec_voc = scale(rec_voc, report.scale.alpha);

    auto fine = detail::run_stage(report, "fine_lag", [&] {
        return framewise_fine_lag(live_voc, rec_voc, config.frame_seconds, config.hop_seconds,
                                  config.fine_max_shift_seconds, config.silence_floor_dbfs);
    });
    report.fine_lag = fine.lag;
    report.fine_votes = std::move(fine.votes);
    report.lag_dispersion = lag_dispersion(report.fine_votes);

    MonoSignal residual = detail::run_stage(report, "subtract", [&] {
        auto [live_final, rec_final] = match_lengths(live_voc, shift(rec_voc, report.fine_lag));
        return subtract(live_final, rec_final);
    });
    report.residual_rms_dbfs = rms_dbfs(residual);
    report.residual_samples = residual.size();
    detail::collect_warnings(report);
    return {std::move(residual), std::move(report)};
}

}  // namespace livevox
