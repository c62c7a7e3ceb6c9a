#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "livevox/alignment.hpp"
#include "livevox/error.hpp"
#include "livevox/framing.hpp"
#include "livevox/gain_match.hpp"
#include "livevox/separation.hpp"
#include "livevox/wav.hpp"

namespace livevox {

struct PipelineConfig {
    double coarse_max_lag_seconds = 20.0;
    double fine_max_shift_seconds = 0.25;
    double frame_seconds = 1.0;
    double hop_seconds = 0.5;
    double silence_floor_dbfs = -60.0;
    WavEncoding output_encoding = WavEncoding::float32;
    SeparatorSpec live_separator;
    SeparatorSpec studio_separator;

    void validate() const {
        for (auto [name, value] : {std::pair{"coarse max lag", coarse_max_lag_seconds},
                                   std::pair{"fine max shift", fine_max_shift_seconds},
                                   std::pair{"frame", frame_seconds}, std::pair{"hop", hop_seconds}}) {
            if (!(value > 0.0) || !std::isfinite(value)) fail_input(std::string(name) + " duration must be positive");
        }
        if (hop_seconds > frame_seconds) fail_input("hop must not exceed frame length");
        if (std::isnan(silence_floor_dbfs)) fail_input("silence floor must be a number");
        live_separator.validate();
        studio_separator.validate();
    }
};

/// Config durations resolved to samples at the rate the run actually used.
struct ResolvedParameters {
    int sample_rate = 0;
    std::size_t frame_samples = 0;
    std::size_t hop_samples = 0;
    std::size_t fine_max_lag_samples = 0;
    std::size_t coarse_max_lag_samples = 0;
    double dispersion_warning_samples = 0.0;

    friend bool operator==(const ResolvedParameters&, const ResolvedParameters&) = default;
};

inline ResolvedParameters resolve(const PipelineConfig& cfg, int sample_rate) {
    ResolvedParameters p;
    p.sample_rate = sample_rate;
    p.frame_samples = seconds_to_samples(cfg.frame_seconds, sample_rate);
    p.hop_samples = seconds_to_samples(cfg.hop_seconds, sample_rate);
    p.fine_max_lag_samples = seconds_to_samples(cfg.fine_max_shift_seconds, sample_rate);
    p.coarse_max_lag_samples = seconds_to_samples(cfg.coarse_max_lag_seconds, sample_rate);
    // 5 ms, floored: 220 samples at 44.1 kHz.
    p.dispersion_warning_samples = std::floor(0.005 * sample_rate);
    return p;
}

struct StageDuration {
    std::string stage;
    double seconds = 0.0;

    friend bool operator==(const StageDuration&, const StageDuration&) = default;
};

struct ExtractionReport {
    std::string live_label;
    std::string studio_label;
    LagEstimate coarse_lag;
    SampleIndex fine_lag = 0;
    std::vector<FrameLagVote> fine_votes;
    ScaleEstimate scale;
    std::vector<FrameCorrelation> frame_correlations;
    double lag_dispersion = 0.0;
    double residual_rms_dbfs = kSilenceDbfs;
    std::size_t residual_samples = 0;
    std::vector<std::string> warnings;
    PipelineConfig config;
    ResolvedParameters resolved;
    std::vector<StageDuration> durations;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

// JSON has no infinities; non-finite reals travel as strings.
inline ordered_json real_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double real_from_json(const ordered_json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        fail_input("report: '" + s + "' is not a number");
    }
    return j.get<double>();
}

inline ordered_json separator_to_json(const SeparatorSpec& s) {
    return {{"mode", to_string(s.mode)},
            {"command_template", s.command_template},
            {"stems_dir", s.stems_dir.string()},
            {"timeout_seconds", s.timeout_seconds}};
}

inline SeparatorSpec separator_from_json(const ordered_json& j) {
    SeparatorSpec s;
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "external_command") {
        s.mode = SeparatorMode::external_command;
    } else if (mode == "pre_separated") {
        s.mode = SeparatorMode::pre_separated;
    } else {
        fail_input("report: unknown separator mode '" + mode + "'");
    }
    s.command_template = j.at("command_template").get<std::string>();
    s.stems_dir = j.at("stems_dir").get<std::string>();
    s.timeout_seconds = j.at("timeout_seconds").get<double>();
    return s;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ExtractionReport& r) {
    using detail::ordered_json;
    using detail::real_to_json;

    ordered_json votes = ordered_json::array();
    for (const auto& v : r.fine_votes) {
        votes.push_back({{"frame_index", v.frame_index}, {"lag", v.lag}, {"included", v.included}});
    }
    ordered_json frames = ordered_json::array();
    for (const auto& f : r.frame_correlations) {
        frames.push_back({{"frame_index", f.frame_index},
                          {"start_sample", f.start_sample},
                          {"pearson_r", f.usable ? ordered_json(f.pearson_r) : ordered_json(nullptr)},
                          {"usable", f.usable}});
    }
    ordered_json durations = ordered_json::array();
    for (const auto& d : r.durations) durations.push_back({{"stage", d.stage}, {"seconds", d.seconds}});

    const auto& c = r.config;
    const auto& p = r.resolved;
    return {
        {"live", r.live_label},
        {"studio", r.studio_label},
        {"coarse_lag", {{"lag", r.coarse_lag.lag},
                        {"peak_value", real_to_json(r.coarse_lag.peak_value)},
                        {"max_lag", r.coarse_lag.max_lag}}},
        {"fine_lag", r.fine_lag},
        {"fine_votes", votes},
        {"lag_dispersion", real_to_json(r.lag_dispersion)},
        {"scale", {{"alpha", real_to_json(r.scale.alpha)},
                   {"frame_index", r.scale.frame_index},
                   {"pearson_r", real_to_json(r.scale.pearson_r)},
                   {"frame_count", r.scale.frame_count}}},
        {"frame_correlations", frames},
        {"residual_rms_dbfs", real_to_json(r.residual_rms_dbfs)},
        {"residual_samples", r.residual_samples},
        {"warnings", r.warnings},
        {"config", {{"coarse_max_lag_seconds", c.coarse_max_lag_seconds},
                    {"fine_max_shift_seconds", c.fine_max_shift_seconds},
                    {"frame_seconds", c.frame_seconds},
                    {"hop_seconds", c.hop_seconds},
                    {"silence_floor_dbfs", real_to_json(c.silence_floor_dbfs)},
                    {"output_encoding", to_string(c.output_encoding)},
                    {"live_separator", detail::separator_to_json(c.live_separator)},
                    {"studio_separator", detail::separator_to_json(c.studio_separator)}}},
        {"resolved", {{"sample_rate", p.sample_rate},
                      {"frame_samples", p.frame_samples},
                      {"hop_samples", p.hop_samples},
                      {"fine_max_lag_samples", p.fine_max_lag_samples},
                      {"coarse_max_lag_samples", p.coarse_max_lag_samples},
                      {"dispersion_warning_samples", p.dispersion_warning_samples},
                      {"pearson_window", "periodic_hann"},
                      {"scale_fit_samples", "raw"},
                      {"fine_lag_silence_gate_dbfs", real_to_json(c.silence_floor_dbfs)}}},
        {"durations", durations},
    };
}

inline ExtractionReport report_from_json(const nlohmann::ordered_json& j) {
    using detail::real_from_json;
    ExtractionReport r;
    try {
        r.live_label = j.at("live").get<std::string>();
        r.studio_label = j.at("studio").get<std::string>();
        const auto& cl = j.at("coarse_lag");
        r.coarse_lag = {cl.at("lag").get<SampleIndex>(), real_from_json(cl.at("peak_value")),
                        cl.at("max_lag").get<SampleIndex>()};
        r.fine_lag = j.at("fine_lag").get<SampleIndex>();
        for (const auto& v : j.at("fine_votes")) {
            r.fine_votes.push_back(
                {v.at("frame_index").get<std::size_t>(), v.at("lag").get<SampleIndex>(), v.at("included").get<bool>()});
        }
        r.lag_dispersion = real_from_json(j.at("lag_dispersion"));
        const auto& sc = j.at("scale");
        r.scale = {real_from_json(sc.at("alpha")), sc.at("frame_index").get<std::size_t>(),
                   real_from_json(sc.at("pearson_r")), sc.at("frame_count").get<std::size_t>()};
        for (const auto& f : j.at("frame_correlations")) {
            FrameCorrelation fc;
            fc.frame_index = f.at("frame_index").get<std::size_t>();
            fc.start_sample = f.at("start_sample").get<std::size_t>();
            fc.usable = f.at("usable").get<bool>();
            if (!f.at("pearson_r").is_null()) fc.pearson_r = f.at("pearson_r").get<double>();
            r.frame_correlations.push_back(fc);
        }
        r.residual_rms_dbfs = real_from_json(j.at("residual_rms_dbfs"));
        r.residual_samples = j.at("residual_samples").get<std::size_t>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();

        const auto& c = j.at("config");
        r.config.coarse_max_lag_seconds = c.at("coarse_max_lag_seconds").get<double>();
        r.config.fine_max_shift_seconds = c.at("fine_max_shift_seconds").get<double>();
        r.config.frame_seconds = c.at("frame_seconds").get<double>();
        r.config.hop_seconds = c.at("hop_seconds").get<double>();
        r.config.silence_floor_dbfs = real_from_json(c.at("silence_floor_dbfs"));
        r.config.output_encoding = parse_encoding(c.at("output_encoding").get<std::string>());
        r.config.live_separator = detail::separator_from_json(c.at("live_separator"));
        r.config.studio_separator = detail::separator_from_json(c.at("studio_separator"));

        const auto& p = j.at("resolved");
        r.resolved.sample_rate = p.at("sample_rate").get<int>();
        r.resolved.frame_samples = p.at("frame_samples").get<std::size_t>();
        r.resolved.hop_samples = p.at("hop_samples").get<std::size_t>();
        r.resolved.fine_max_lag_samples = p.at("fine_max_lag_samples").get<std::size_t>();
        r.resolved.coarse_max_lag_samples = p.at("coarse_max_lag_samples").get<std::size_t>();
        r.resolved.dispersion_warning_samples = p.at("dispersion_warning_samples").get<double>();

        for (const auto& d : j.at("durations")) {
            r.durations.push_back({d.at("stage").get<std::string>(), d.at("seconds").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        fail_input(std::string("malformed report: ") + e.what());
    }
    return r;
}

inline void write_report(const ExtractionReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail_input("cannot open '" + path.string() + "' for writing");
    out << to_json(report).dump(2) << '\n';
    if (!out) fail_input("failed writing '" + path.string() + "'");
}

inline ExtractionReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_input("cannot open '" + path.string() + "' for reading");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail_input("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return report_from_json(j);
}

}  // namespace livevox
