// livevox: extract live vocals from a performance recording by cancelling the studio track.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "livevox/livevox.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitSeparator = 3;
constexpr int kExitDegenerate = 4;

int exit_code(livevox::ErrorKind kind) {
    switch (kind) {
        case livevox::ErrorKind::input: return kExitInput;
        case livevox::ErrorKind::separator: return kExitSeparator;
        case livevox::ErrorKind::degenerate: return kExitDegenerate;
    }
    return 1;
}

livevox::SeparatorSpec pick_separator(const std::string& stems_dir, const std::string& command, double timeout,
                                      const char* which) {
    if (!stems_dir.empty()) return livevox::SeparatorSpec::pre_separated(stems_dir);
    if (command.empty()) {
        livevox::fail_input(std::string("no separator for the ") + which +
                            " input: pass --separator-cmd or --" + which + "-stems");
    }
    return livevox::SeparatorSpec::external(command, timeout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extract live vocals by aligning, gain-matching and subtracting the studio vocal stem"};
    app.require_subcommand(1);

    auto* extract = app.add_subcommand("extract", "Run the extraction pipeline on a live/studio pair");
    std::string live, studio, out, report_path, separator_cmd, live_stems, studio_stems, encoding = "float32";
    livevox::PipelineConfig config;
    double timeout = livevox::kDefaultSeparatorTimeoutSeconds;

    extract->add_option("--live", live, "Live performance recording (WAV)")->required();
    extract->add_option("--studio", studio, "Released studio track (WAV)")->required();
    extract->add_option("--out", out, "Residual (extracted live vocals) WAV to write")->required();
    extract->add_option("--report", report_path, "Write the JSON extraction report here");
    extract->add_option("--separator-cmd", separator_cmd,
                        "Separator command template with {input} and {outdir} placeholders");
    extract->add_option("--separator-timeout", timeout, "Separator timeout in seconds")->capture_default_str();
    extract->add_option("--live-stems", live_stems, "Directory with pre-separated live stems");
    extract->add_option("--studio-stems", studio_stems, "Directory with pre-separated studio stems");
    extract->add_option("--coarse-max-lag", config.coarse_max_lag_seconds, "Coarse alignment bound, seconds")
        ->capture_default_str();
    extract->add_option("--fine-max-shift", config.fine_max_shift_seconds, "Per-frame fine lag bound, seconds")
        ->capture_default_str();
    extract->add_option("--frame", config.frame_seconds, "Analysis frame length, seconds")->capture_default_str();
    extract->add_option("--hop", config.hop_seconds, "Analysis hop, seconds")->capture_default_str();
    extract->add_option("--silence-floor", config.silence_floor_dbfs, "Fine-lag silence gate, dBFS")
        ->capture_default_str();
    extract->add_option("--encoding", encoding, "Output encoding")
        ->check(CLI::IsMember({"float32", "pcm16"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        config.output_encoding = livevox::parse_encoding(encoding);
        config.live_separator = pick_separator(live_stems, separator_cmd, timeout, "live");
        config.studio_separator = pick_separator(studio_stems, separator_cmd, timeout, "studio");

        const auto result = livevox::extract_live_vocals(live, studio, config);
        livevox::write_wav(result.residual, out, config.output_encoding);
        if (!report_path.empty()) livevox::write_report(result.report, report_path);

        const auto& r = result.report;
        std::cerr << "coarse lag " << r.coarse_lag.lag << " samples, alpha " << r.scale.alpha << " (frame "
                  << r.scale.frame_index << ", r=" << r.scale.pearson_r << "), fine lag " << r.fine_lag
                  << " samples, residual " << r.residual_rms_dbfs << " dBFS\n";
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    } catch (const livevox::Error& e) {
        std::cerr << "livevox: " << livevox::to_string(e.kind()) << " error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "livevox: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
