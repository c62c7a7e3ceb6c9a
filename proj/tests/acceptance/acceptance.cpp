// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "livevox/harness.hpp"
#include "livevox/livevox.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace livevox;
using livevox::testing::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-26s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

PipelineConfig config_for(const harness::FixtureBundle& b) {
    PipelineConfig c;
    c.live_separator = SeparatorSpec::pre_separated(b.live_stems_dir);
    c.studio_separator = SeparatorSpec::pre_separated(b.studio_stems_dir);
    return c;
}

harness::FixtureBundle make_fixture(const std::filesystem::path& dir, SampleIndex delay, double gain,
                                    std::optional<double> live_vocal_dbfs, double tempo, double duration,
                                    std::uint64_t seed) {
    harness::FixtureSpec s;
    s.delay_samples = delay;
    s.playback_gain = gain;
    s.live_vocal_gain_dbfs = live_vocal_dbfs;
    s.tempo_ratio = tempo;
    s.duration_seconds = duration;
    s.sample_rate = 44100;
    s.seed = seed;
    return harness::generate_fixture(s, dir);
}

std::vector<char> file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
    TempDir scratch("livevox-acceptance-");

    criterion("gcc-phat-oracle", [] {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(20240611);
        std::uniform_int_distribution<std::size_t> len(16, 2048);
        int pairs = 0;
        double worst_peak = 0.0;
        for (; pairs < 200; ++pairs) {
            // lx + ly stays <= 4096 so the correlation fits in N <= 4096 as well.
            const std::size_t lx = len(rng), ly = len(rng);
            const auto x = testing::noise_signal(lx, rng());
            auto y_raw = testing::white_noise(ly, rng());
            // Half the pairs carry a genuine delayed copy so the peak is not just noise.
            if (pairs % 2 == 0) {
                const std::size_t d = rng() % std::min<std::size_t>(lx, 400);
                for (std::size_t i = 0; i < ly && i + d < lx; ++i) y_raw[i] += x.samples()[i + d];
            }
            const MonoSignal y(std::move(y_raw), 44100);
            const auto n = static_cast<SampleIndex>(std::bit_ceil(lx + ly - 1));
            const SampleIndex max_lag = std::min<SampleIndex>(1 + static_cast<SampleIndex>(rng() % 512), n - 1);
            const auto fast = gcc_phat(x, y, max_lag);
            const auto slow = gcc_phat_naive(x, y, max_lag);
            if (fast.lag != slow.lag) {
                return Outcome{false, fmt("pair %.0f: lag %.0f vs naive %.0f", pairs, fast.lag, slow.lag)};
            }
            worst_peak = std::max(worst_peak, std::abs(fast.peak_value - slow.peak_value));
        }
        const double t = seconds_since(t0);
        return Outcome{worst_peak <= 1e-9 && t < 60.0,
                       fmt("%.0f pairs, max |peak diff| %.2e, %.1f s", pairs, worst_peak, t)};
    });

    criterion("exact-lag-recovery", [] {
        constexpr int rate = 44100;
        const std::size_t len = 5 * rate;
        // The 20 s bound, capped for the shorter pairs at their padded length.
        std::string detail;
        bool ok = true;
        std::mt19937_64 rng(7);
        SampleIndex bound = 0;
        for (SampleIndex d : {0, 1, 441, 44100, 881999}) {
            const auto base = testing::white_noise(len, 100 + static_cast<std::uint64_t>(d));
            std::vector<double> delayed(static_cast<std::size_t>(d) + len, 0.0);
            std::copy(base.begin(), base.end(), delayed.begin() + d);
            const MonoSignal x(delayed, rate), y(base, rate);
            const auto clean_est = coarse_align(x, y, 20.0);
            const auto clean = clean_est.lag;
            bound = std::max(bound, clean_est.max_lag);

            // 10 dB SNR relative to the signal power, independent noise on each side.
            const double sigma = 0.1 * std::sqrt(0.1);
            std::normal_distribution<double> g(0.0, sigma);
            std::vector<double> xn(delayed), yn(base);
            for (auto& v : xn) v += g(rng);
            for (auto& v : yn) v += g(rng);
            const auto noisy = coarse_align(MonoSignal(std::move(xn), rate), MonoSignal(std::move(yn), rate), 20.0).lag;
            ok = ok && clean == d && std::abs(noisy - d) <= 1;
            detail += fmt("d=%.0f->%.0f/%.0f ", static_cast<double>(d), static_cast<double>(clean),
                          static_cast<double>(noisy));
        }
        ok = ok && bound == 882000;
        return Outcome{ok, detail + fmt("(bound %.0f)", static_cast<double>(bound))};
    });

    criterion("closed-form-scale", [] {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> gain(-3.0, 3.0);
        double worst_rel = 0.0, worst_orth = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto rec = testing::white_noise(512, rng());
            auto live = testing::white_noise(512, rng(), 0.05);
            const double a = gain(rng);
            for (std::size_t k = 0; k < 512; ++k) live[k] += a * rec[k];
            const double closed = least_squares_scale(rec, live);
            const double numeric = testing::numeric_min_scale(rec, live);
            worst_rel = std::max(worst_rel, std::abs(closed - numeric) / std::abs(numeric));
            double dot = 0.0, rn = 0.0, en = 0.0;
            for (std::size_t k = 0; k < 512; ++k) {
                const double e = closed * rec[k] - live[k];
                dot += e * rec[k];
                rn += rec[k] * rec[k];
                en += e * e;
            }
            worst_orth = std::max(worst_orth, std::abs(dot) / (std::sqrt(rn) * std::sqrt(en)));
        }
        const double t = seconds_since(t0);
        return Outcome{worst_rel <= 1e-6 && worst_orth <= 1e-6 && t < 10.0,
                       fmt("max rel err %.2e, max orthogonality %.2e, %.2f s", worst_rel, worst_orth, t)};
    });

    // Lip-sync fixture reused by the parameter, end-to-end and determinism checks.
    const auto lipsync = make_fixture(scratch / "lipsync", 88200, 0.8, std::nullopt, 1.0, 60.0, 11);

    criterion("report-parameters", [&] {
        const auto out = extract_live_vocals(lipsync.live_mix, lipsync.studio_mix, config_for(lipsync));
        write_report(out.report, scratch / "lipsync_report.json");
        const auto p = read_report(scratch / "lipsync_report.json").resolved;
        const bool ok = p.sample_rate == 44100 && p.frame_samples == 44100 && p.hop_samples == 22050 &&
                        p.fine_max_lag_samples == 11025 && p.coarse_max_lag_samples == 882000;
        return Outcome{ok, fmt("frame %.0f hop %.0f fine %.0f", p.frame_samples, p.hop_samples,
                               p.fine_max_lag_samples) +
                               fmt(" coarse %.0f", p.coarse_max_lag_samples)};
    });

    criterion("lip-sync-end-to-end", [&] {
        const auto t0 = Clock::now();
        const auto out = extract_live_vocals(lipsync.live_mix, lipsync.studio_mix, config_for(lipsync));
        const double t = seconds_since(t0);
        const auto& r = out.report;
        const bool ok = r.residual_rms_dbfs <= -40.0 && r.coarse_lag.lag == 88200 &&
                        std::abs(r.scale.alpha - 0.8) <= 1e-6 && t < 30.0;
        return Outcome{ok, fmt("residual %.1f dBFS, lag %.0f, alpha %.9f", r.residual_rms_dbfs,
                               static_cast<double>(r.coarse_lag.lag), r.scale.alpha) +
                               fmt(", %.2f s", t)};
    });

    criterion("live-vocal-end-to-end", [&] {
        const auto b = make_fixture(scratch / "live", 88200, 0.8, -10.0, 1.0, 60.0, 11);
        const auto out = extract_live_vocals(b.live_mix, b.studio_mix, config_for(b));
        const auto card = harness::score_extraction(b, out.residual);
        const double snr = card.live_vocal_snr_db.value_or(-std::numeric_limits<double>::infinity());
        return Outcome{snr >= 20.0 && card.cancellation_db <= -25.0,
                       fmt("snr %.1f dB, cancellation %.1f dB", snr, card.cancellation_db)};
    });

    criterion("tempo-mismatch-warning", [&] {
        const auto b = make_fixture(scratch / "tempo", 88200, 0.8, std::nullopt, 1.005, 60.0, 11);
        const auto out = extract_live_vocals(b.live_mix, b.studio_mix, config_for(b));
        bool found = false;
        for (const auto& w : out.report.warnings) found = found || w.rfind("lag-dispersion", 0) == 0;
        return Outcome{found, fmt("dispersion %.1f samples, %.0f warnings", out.report.lag_dispersion,
                                  static_cast<double>(out.report.warnings.size()))};
    });

    criterion("determinism", [&] {
        for (const char* name : {"run_a.wav", "run_b.wav"}) {
            const auto out = extract_live_vocals(lipsync.live_mix, lipsync.studio_mix, config_for(lipsync));
            write_wav(out.residual, scratch / name);
        }
        const auto a = file_bytes(scratch / "run_a.wav");
        const auto b = file_bytes(scratch / "run_b.wav");
        return Outcome{!a.empty() && a == b, fmt("%.0f vs %.0f bytes", a.size(), b.size())};
    });

    criterion("performance-3.5-min", [&] {
        const auto b = make_fixture(scratch / "long", 88200, 0.8, -10.0, 1.0, 210.0, 5);
        const auto t0 = Clock::now();
        const auto out = extract_live_vocals(b.live_mix, b.studio_mix, config_for(b));
        const double t = seconds_since(t0);
        return Outcome{t < 10.0, fmt("%.2f s for %.0f samples", t, static_cast<double>(out.residual.size()))};
    });

    std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
