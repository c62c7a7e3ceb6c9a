#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "livevox/audio.hpp"
#include "livevox/error.hpp"
#include "livevox/separation.hpp"
#include "livevox/wav.hpp"

/// Synthetic ground-truth fixtures: a studio mix, a simulated live performance built from it
/// (delay, gain, optional live vocal, crowd noise, tempo drift), exact stems for both, and the
/// metrics used to score an extraction against the known truth.
namespace livevox::harness {

struct FixtureSpec {
    SampleIndex delay_samples = 0;
    double playback_gain = 1.0;
    std::optional<double> live_vocal_gain_dbfs;
    std::optional<double> noise_floor_dbfs;
    double tempo_ratio = 1.0;
    std::uint64_t seed = 1;
    double duration_seconds = 10.0;
    int sample_rate = 44100;

    void validate() const {
        if (delay_samples < 0) fail_input("fixture delay must be >= 0 samples");
        if (!(playback_gain > 0.0)) fail_input("fixture playback gain must be > 0");
        if (!(duration_seconds > 0.0)) fail_input("fixture duration must be > 0");
        if (!(tempo_ratio > 0.9 && tempo_ratio < 1.1)) fail_input("fixture tempo ratio must lie in (0.9, 1.1)");
        if (sample_rate <= 0) fail_input("fixture sample rate must be positive");
    }

    friend bool operator==(const FixtureSpec&, const FixtureSpec&) = default;
};

/// Flat `key = value` text; '#' starts a comment. Optional levels may be omitted or `none`.
inline FixtureSpec parse_fixture_spec(std::istream& in) {
    FixtureSpec spec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos) fail_input("fixture spec line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            std::size_t used = 0;
            auto real = [&] {
                const double v = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
                return v;
            };
            auto optional_real = [&]() -> std::optional<double> {
                if (value == "none" || value.empty()) return std::nullopt;
                return real();
            };
            auto integer = [&] {
                const long long v = std::stoll(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
                return v;
            };
            if (key == "delay_samples") {
                spec.delay_samples = integer();
            } else if (key == "playback_gain") {
                spec.playback_gain = real();
            } else if (key == "live_vocal_gain_dbfs") {
                spec.live_vocal_gain_dbfs = optional_real();
            } else if (key == "noise_floor_dbfs") {
                spec.noise_floor_dbfs = optional_real();
            } else if (key == "tempo_ratio") {
                spec.tempo_ratio = real();
            } else if (key == "seed") {
                spec.seed = static_cast<std::uint64_t>(integer());
            } else if (key == "duration_seconds") {
                spec.duration_seconds = real();
            } else if (key == "sample_rate") {
                spec.sample_rate = static_cast<int>(integer());
            } else {
                fail_input("fixture spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            }
        } catch (const std::logic_error&) {
            fail_input("fixture spec line " + std::to_string(line_no) + ": bad value '" + value + "' for " + key);
        }
    }
    spec.validate();
    return spec;
}

inline FixtureSpec load_fixture_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_input("cannot open fixture spec '" + path.string() + "'");
    return parse_fixture_spec(in);
}

inline std::string format_fixture_spec(const FixtureSpec& spec) {
    auto real = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto optional_real = [&](const std::optional<double>& v) { return v ? real(*v) : std::string("none"); };
    std::ostringstream out;
    out << "delay_samples = " << spec.delay_samples << '\n'
        << "playback_gain = " << real(spec.playback_gain) << '\n'
        << "live_vocal_gain_dbfs = " << optional_real(spec.live_vocal_gain_dbfs) << '\n'
        << "noise_floor_dbfs = " << optional_real(spec.noise_floor_dbfs) << '\n'
        << "tempo_ratio = " << real(spec.tempo_ratio) << '\n'
        << "seed = " << spec.seed << '\n'
        << "duration_seconds = " << real(spec.duration_seconds) << '\n'
        << "sample_rate = " << spec.sample_rate << '\n';
    return out.str();
}

struct FixtureBundle {
    std::filesystem::path root;
    std::filesystem::path studio_mix;
    std::filesystem::path live_mix;
    std::filesystem::path studio_stems_dir;
    std::filesystem::path live_stems_dir;
    std::filesystem::path truth_live_vocal;  // live timeline; silent when the spec has no live vocal
    FixtureSpec spec_echo;

    bool has_live_vocal() const { return spec_echo.live_vocal_gain_dbfs.has_value(); }
};

inline constexpr const char* kSpecFile = "fixture.spec";

inline FixtureBundle bundle_layout(const std::filesystem::path& dir) {
    FixtureBundle b;
    b.root = dir;
    b.studio_mix = dir / "studio_mix.wav";
    b.live_mix = dir / "live_mix.wav";
    b.studio_stems_dir = dir / "studio_stems";
    b.live_stems_dir = dir / "live_stems";
    b.truth_live_vocal = dir / "truth_live_vocal.wav";
    return b;
}

inline FixtureBundle load_bundle(const std::filesystem::path& dir) {
    FixtureBundle b = bundle_layout(dir);
    b.spec_echo = load_fixture_spec(dir / kSpecFile);
    for (const auto& p : {b.studio_mix, b.live_mix, b.studio_stems_dir / kVocalsFile,
                          b.studio_stems_dir / kAccompanimentFile, b.live_stems_dir / kVocalsFile,
                          b.live_stems_dir / kAccompanimentFile, b.truth_live_vocal}) {
        if (!std::filesystem::exists(p)) fail_input("fixture bundle is missing '" + p.string() + "'");
    }
    return b;
}

namespace detail {

inline constexpr double kStudioStemDbfs = -14.0;

enum Stream : std::uint32_t { accompaniment_stream = 1, studio_vocal_stream = 2, live_vocal_stream = 3, noise_stream = 4 };

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

inline void normalize_rms(std::vector<double>& s, double target_dbfs) {
    const double mean_square = energy(s) / static_cast<double>(s.size());
    if (mean_square <= 0.0) return;
    const double gain = std::pow(10.0, target_dbfs / 20.0) / std::sqrt(mean_square);
    for (auto& v : s) v *= gain;
}

/// Partials spread log-uniformly over 55 Hz to 6 kHz, a pulsing noise bed on top.
inline std::vector<double> synth_accompaniment(std::size_t n, int rate, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> out(n, 0.0);
    const double two_pi = 2.0 * std::numbers::pi;

    for (int p = 0; p < 16; ++p) {
        const double freq = 55.0 * std::pow(6000.0 / 55.0, unit(rng));
        const double amp = 1.0 / std::sqrt(freq / 55.0);
        const double phase = two_pi * unit(rng);
        const double lfo_rate = 0.1 + 0.4 * unit(rng);
        const double lfo_phase = two_pi * unit(rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / rate;
            const double lfo = 0.6 + 0.4 * std::sin(two_pi * lfo_rate * t + lfo_phase);
            out[i] += amp * lfo * std::sin(two_pi * freq * t + phase);
        }
    }

    // Beat-synchronous noise bursts (2 Hz), lightly low-passed.
    const double decay = std::exp(-1.0 / (0.08 * rate));
    const std::size_t beat = static_cast<std::size_t>(rate / 2);
    double env = 0.0, lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % beat == 0) env = 1.0;
        env *= decay;
        lp = 0.6 * lp + 0.4 * gauss(rng);
        out[i] += 0.5 * (0.25 + env) * lp;
    }
    normalize_rms(out, kStudioStemDbfs);
    return out;
}

/// Sung-line stand-in: a gliding harmonic tone with vibrato and syllable-rate envelope,
/// plus band-limited breath noise.
inline std::vector<double> synth_vocal(std::size_t n, int rate, std::mt19937_64& rng, double f0_low, double f0_high) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> out(n, 0.0);

    constexpr int kHarmonics = 24;
    std::vector<double> phases(kHarmonics, 0.0);
    for (auto& ph : phases) ph = two_pi * unit(rng);

    double log_f0 = std::log(f0_low);
    double target = log_f0;
    std::size_t next_note = 0;
    const double glide = std::exp(-1.0 / (0.03 * rate));
    const double vib_rate = 5.0 + unit(rng);
    const double syl_rate = 3.5 + 2.0 * unit(rng);
    const double syl_phase = two_pi * unit(rng);
    double hp_prev_in = 0.0, hp = 0.0, lp = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        if (i == next_note) {
            target = std::log(f0_low) + (std::log(f0_high) - std::log(f0_low)) * unit(rng);
            next_note += static_cast<std::size_t>((0.25 + 0.35 * unit(rng)) * rate);
        }
        log_f0 = glide * log_f0 + (1.0 - glide) * target;
        const double t = static_cast<double>(i) / rate;
        const double f0 = std::exp(log_f0) * (1.0 + 0.015 * std::sin(two_pi * vib_rate * t));

        double tone = 0.0;
        for (int k = 0; k < kHarmonics; ++k) {
            const double fk = f0 * (k + 1);
            phases[k] += two_pi * fk / rate;
            if (phases[k] > two_pi) phases[k] -= two_pi;
            if (fk >= 5000.0) continue;
            // Crude formant tilt: a bump near 700 Hz and a second near 2.5 kHz.
            const double formant = 1.0 + 2.0 * std::exp(-std::pow((fk - 700.0) / 400.0, 2)) +
                                   std::exp(-std::pow((fk - 2500.0) / 600.0, 2));
            tone += formant / (k + 1) * std::sin(phases[k]);
        }

        // Breath noise: first-order high-pass then low-pass.
        const double w = gauss(rng);
        hp = 0.95 * (hp + w - hp_prev_in);
        hp_prev_in = w;
        lp = 0.5 * lp + 0.5 * hp;

        const double syllable = 0.35 + 0.65 * (0.5 - 0.5 * std::cos(two_pi * syl_rate * t + syl_phase));
        out[i] = syllable * (tone + 0.35 * lp);
    }
    return out;
}

/// Alternating sung phrases (1 to 3 s) and rests (1.5 to 3 s) with 20 ms fades.
inline void apply_phrase_gate(std::vector<double>& s, int rate, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t fade = static_cast<std::size_t>(0.02 * rate);
    std::size_t i = static_cast<std::size_t>(unit(rng) * rate);
    std::vector<double> gate(s.size(), 0.0);
    while (i < s.size()) {
        const std::size_t len = static_cast<std::size_t>((1.0 + 2.0 * unit(rng)) * rate);
        for (std::size_t k = 0; k < len && i + k < s.size(); ++k) {
            double g = 1.0;
            if (k < fade) g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(k) / fade);
            if (len - k <= fade) g = std::min(g, 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(len - k) / fade));
            gate[i + k] = g;
        }
        i += len + static_cast<std::size_t>((1.5 + 1.5 * unit(rng)) * rate);
    }
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= gate[k];
}

/// Pink-ish noise (Paul Kellet's economy filter).
inline std::vector<double> synth_crowd_noise(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> out(n);
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    for (auto& v : out) {
        const double w = gauss(rng);
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        v = b0 + b1 + b2 + w * 0.1848;
    }
    return out;
}

/// Linear-interpolation resampling: out[i] = s(i·ratio). ratio > 1 plays faster.
inline std::vector<double> resample_linear(const std::vector<double>& s, double ratio) {
    if (ratio == 1.0) return s;
    const auto last = static_cast<double>(s.size() - 1);
    const auto m = static_cast<std::size_t>(std::floor(last / ratio)) + 1;
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double pos = static_cast<double>(i) * ratio;
        const auto k = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(k);
        out[i] = k + 1 < s.size() ? s[k] + frac * (s[k + 1] - s[k]) : s[k];
    }
    return out;
}

inline void write_stems(const std::filesystem::path& dir, std::vector<double> vocals, std::vector<double> acc,
                        int rate) {
    std::filesystem::create_directories(dir);
    write_wav(MonoSignal(std::move(vocals), rate), dir / kVocalsFile);
    write_wav(MonoSignal(std::move(acc), rate), dir / kAccompanimentFile);
}

}  // namespace detail

/// Synthesizes a fixture into out_dir. Output depends only on the spec.
inline FixtureBundle generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir) {
    using namespace detail;
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail_input("cannot create fixture directory '" + out_dir.string() + "': " + ec.message());

    const int rate = spec.sample_rate;
    const std::size_t n = static_cast<std::size_t>(std::llround(spec.duration_seconds * rate));
    if (n < 2) fail_input("fixture duration too short");

    auto acc_rng = make_rng(spec.seed, accompaniment_stream);
    auto voc_rng = make_rng(spec.seed, studio_vocal_stream);
    const auto acc = synth_accompaniment(n, rate, acc_rng);
    auto voc = synth_vocal(n, rate, voc_rng, 180.0, 420.0);
    normalize_rms(voc, kStudioStemDbfs);

    std::vector<double> studio_mix(n);
    for (std::size_t i = 0; i < n; ++i) studio_mix[i] = voc[i] + acc[i];

    const auto played_voc = resample_linear(voc, spec.tempo_ratio);
    const auto played_acc = resample_linear(acc, spec.tempo_ratio);
    const auto delay = static_cast<std::size_t>(spec.delay_samples);
    const std::size_t m = played_voc.size() + delay;
    const double g = spec.playback_gain;

    std::vector<double> live_vocal(m, 0.0);
    if (spec.live_vocal_gain_dbfs) {
        auto rng = make_rng(spec.seed, live_vocal_stream);
        live_vocal = synth_vocal(m, rate, rng, 140.0, 330.0);
        apply_phrase_gate(live_vocal, rate, rng);
        normalize_rms(live_vocal, *spec.live_vocal_gain_dbfs);
    }
    std::vector<double> noise(m, 0.0);
    if (spec.noise_floor_dbfs) {
        auto rng = make_rng(spec.seed, noise_stream);
        noise = synth_crowd_noise(m, rng);
        normalize_rms(noise, *spec.noise_floor_dbfs);
    }

    std::vector<double> live_voc(m, 0.0), live_acc(m, 0.0), live_mix(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double pv = i >= delay ? g * played_voc[i - delay] : 0.0;
        const double pa = i >= delay ? g * played_acc[i - delay] : 0.0;
        live_voc[i] = pv + live_vocal[i];
        live_acc[i] = pa + noise[i];
        live_mix[i] = live_voc[i] + live_acc[i];
    }

    FixtureBundle b = bundle_layout(out_dir);
    b.spec_echo = spec;
    write_wav(MonoSignal(std::move(studio_mix), rate), b.studio_mix);
    write_wav(MonoSignal(std::move(live_mix), rate), b.live_mix);
    write_wav(MonoSignal(live_vocal, rate), b.truth_live_vocal);
    write_stems(b.studio_stems_dir, voc, acc, rate);
    write_stems(b.live_stems_dir, std::move(live_voc), std::move(live_acc), rate);

    std::ofstream spec_out(out_dir / kSpecFile, std::ios::trunc);
    if (!spec_out) fail_input("cannot write fixture spec into '" + out_dir.string() + "'");
    spec_out << format_fixture_spec(spec);
    return b;
}

inline constexpr double kPerfectDb = std::numeric_limits<double>::infinity();

/// 10·log10(|ref|² / |ref − est|²); +inf when est equals ref exactly.
inline double snr_db(std::span<const Sample> reference, std::span<const Sample> estimate) {
    if (reference.size() != estimate.size()) fail_input("snr_db needs equal lengths");
    const double signal = energy(reference);
    if (signal == 0.0) fail_input("snr_db reference is all zeros");
    double error = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - estimate[i];
        error += d * d;
    }
    if (error == 0.0) return kPerfectDb;
    return 10.0 * std::log10(signal / error);
}

inline double snr_db(const MonoSignal& reference, const MonoSignal& estimate) {
    require_same_rate(reference, estimate);
    return snr_db(reference.samples(), estimate.samples());
}

struct Scorecard {
    /// Leftover playback energy relative to the playback in the live vocal stem, in dB.
    /// Without a live vocal this is simply residual vs live vocal stem.
    double cancellation_db = 0.0;
    std::optional<double> live_vocal_snr_db;
    /// Residual energy vs the unprocessed live vocal stem, live vocal included.
    double residual_vs_live_db = 0.0;
    double residual_rms_dbfs = 0.0;
    std::size_t compared_samples = 0;
};

namespace detail {

inline double ratio_db(double num, double den) {
    if (den == 0.0) fail_input("reference energy is zero; ratio undefined");
    if (num == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / den);
}

}  // namespace detail

/// Scores a residual against the fixture truth over the common length. The residual lives on
/// the live timeline, as does the stored truth vocal, so no further alignment is applied.
inline Scorecard score_extraction(const FixtureBundle& bundle, const MonoSignal& residual) {
    const MonoSignal live_stem = load_mono(bundle.live_stems_dir / kVocalsFile);
    const MonoSignal truth = load_mono(bundle.truth_live_vocal);
    require_same_rate(live_stem, residual);
    const std::size_t n = std::min({residual.size(), live_stem.size(), truth.size()});
    if (n == 0) fail_input("nothing to score: residual and fixture share no samples");

    const auto res = residual.samples().first(n);
    const auto live = live_stem.samples().first(n);
    const auto voice = truth.samples().first(n);

    Scorecard card;
    card.compared_samples = n;
    card.residual_rms_dbfs = rms_dbfs(res);
    card.residual_vs_live_db = detail::ratio_db(energy(res), energy(live));
    if (bundle.has_live_vocal()) {
        double leftover = 0.0, playback = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            leftover += (res[i] - voice[i]) * (res[i] - voice[i]);
            playback += (live[i] - voice[i]) * (live[i] - voice[i]);
        }
        card.cancellation_db = detail::ratio_db(leftover, playback);
        card.live_vocal_snr_db = snr_db(voice, res);
    } else {
        card.cancellation_db = card.residual_vs_live_db;
    }
    return card;
}

inline nlohmann::ordered_json to_json(const Scorecard& card) {
    auto real = [](double v) -> nlohmann::ordered_json {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    return {{"cancellation_db", real(card.cancellation_db)},
            {"live_vocal_snr_db", card.live_vocal_snr_db ? real(*card.live_vocal_snr_db) : nlohmann::ordered_json(nullptr)},
            {"residual_vs_live_db", real(card.residual_vs_live_db)},
            {"residual_rms_dbfs", real(card.residual_rms_dbfs)},
            {"compared_samples", card.compared_samples}};
}

}  // namespace livevox::harness
