#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "livevox/gain_match.hpp"
#include "support/oracles.hpp"

using namespace livevox;
using Catch::Approx;
using livevox::testing::noise_signal;

TEST_CASE("periodic Hann window") {
    const auto w = periodic_hann(4);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == Approx(0.5));
    CHECK(w[2] == Approx(1.0));
    CHECK(w[3] == Approx(0.5));
}

TEST_CASE("framewise_pearson") {
    constexpr int rate = 1000;
    const auto rec = noise_signal(5 * rate, 1, rate);

    SECTION("identical frames correlate perfectly") {
        for (const auto& f : framewise_pearson(rec, rec, 1.0, 0.5)) {
            CHECK(f.usable);
            CHECK(f.pearson_r == Approx(1.0).margin(1e-12));
        }
    }
    SECTION("negative scaling anticorrelates") {
        for (const auto& f : framewise_pearson(scale(rec, -2.0), rec, 1.0, 0.5)) {
            CHECK(f.pearson_r == Approx(-1.0).margin(1e-12));
        }
    }
    SECTION("frame geometry") {
        const auto frames = framewise_pearson(rec, rec, 1.0, 0.5);
        REQUIRE(frames.size() == 9);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            CHECK(frames[i].frame_index == i);
            CHECK(frames[i].start_sample == i * 500);
        }
    }
    SECTION("matches a reference Pearson on explicitly windowed frames") {
        const auto live = noise_signal(5 * rate, 2, rate);
        const auto mixed = subtract(live, scale(rec, -0.5));
        const auto frames = framewise_pearson(mixed, rec, 1.0, 0.5);
        const auto w = periodic_hann(1000);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            std::vector<double> a(1000), b(1000);
            for (std::size_t t = 0; t < 1000; ++t) {
                a[t] = mixed[i * 500 + t] * w[t];
                b[t] = rec[i * 500 + t] * w[t];
            }
            CHECK(frames[i].pearson_r == Approx(testing::reference_pearson(a, b)).margin(1e-12));
        }
    }
    SECTION("zero-variance frames are unusable") {
        std::vector<double> v(rec.data());
        std::fill(v.begin(), v.begin() + 2000, 0.0);
        const auto gapped = MonoSignal(v, rate);
        const auto frames = framewise_pearson(gapped, rec, 1.0, 0.5);
        CHECK_FALSE(frames[0].usable);
        CHECK(std::isnan(frames[0].pearson_r));
        CHECK_FALSE(frames[2].usable);
        CHECK(frames[3].usable);
    }
    SECTION("positive scaling leaves r unchanged") {
        const auto live = noise_signal(5 * rate, 3, rate);
        const auto a = framewise_pearson(live, rec, 1.0, 0.5);
        const auto b = framewise_pearson(scale(live, 7.5), rec, 1.0, 0.5);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].pearson_r == Approx(b[i].pearson_r).margin(1e-12));
    }
    SECTION("errors") {
        CHECK_THROWS_AS(framewise_pearson(rec.slice(0, 999), rec.slice(0, 999), 1.0, 0.5), Error);
        CHECK_THROWS_AS(framewise_pearson(rec, rec.slice(0, 999), 1.0, 0.5), Error);
    }
    SECTION("44.1 kHz defaults give 44100-sample frames and a 22050-sample hop") {
        const auto s = noise_signal(3 * 44100, 4);
        const auto frames = framewise_pearson(s, s, 1.0, 0.5);
        REQUIRE(frames.size() == 5);
        CHECK(frames[1].start_sample == 22050);
        const auto f = make_framing(1.0, 0.5, 44100, s.size());
        CHECK(f.frame_length == 44100);
        CHECK(f.hop == 22050);
    }
}

TEST_CASE("best_frame") {
    auto fc = [](std::size_t i, double r, bool usable = true) {
        return FrameCorrelation{i, i * 10, usable ? r : std::numeric_limits<double>::quiet_NaN(), usable};
    };
    CHECK(best_frame(std::vector{fc(0, 0.2), fc(1, 0.9), fc(2, 0.9)}).frame_index == 1);
    CHECK(best_frame(std::vector{fc(0, 0.0, false), fc(1, -0.3)}).frame_index == 1);
    try {
        best_frame(std::vector{fc(0, 0.0, false), fc(1, 0.0, false)});
        FAIL("expected degenerate error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate);
    }
    CHECK_THROWS_AS(best_frame(std::vector<FrameCorrelation>{}), Error);
}

TEST_CASE("least_squares_scale") {
    const auto rec = noise_signal(512, 5);
    CHECK(least_squares_scale(rec, scale(rec, 2.0)) == Approx(2.0).epsilon(1e-15));
    CHECK(least_squares_scale(MonoSignal({1.0, 0.0}, 8000), MonoSignal({0.0, 1.0}, 8000)) == 0.0);
    CHECK_THROWS_AS(least_squares_scale(MonoSignal::zeros(4, 8000), rec.slice(0, 4)), Error);
    CHECK_THROWS_AS(least_squares_scale(rec, rec.slice(0, 4)), Error);

    SECTION("matches a numeric minimizer and is the global minimum") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> alpha(-3.0, 3.0), probe(-10.0, 10.0);
        for (int trial = 0; trial < 20; ++trial) {
            const auto r = noise_signal(512, rng());
            const auto noise = noise_signal(512, rng());
            const auto live = subtract(scale(r, alpha(rng)), noise);
            const double a = least_squares_scale(r, live);
            const double numeric = testing::numeric_min_scale(r.samples(), live.samples());
            CHECK(std::abs(a - numeric) <= 1e-6 * std::max(1.0, std::abs(a)));
            const double best = testing::squared_error(r.samples(), live.samples(), a);
            for (int p = 0; p < 10; ++p) {
                CHECK(best <= testing::squared_error(r.samples(), live.samples(), probe(rng)));
            }
        }
    }

    SECTION("residual is orthogonal to the studio frame") {
        const auto live = noise_signal(512, 6);
        const double a = least_squares_scale(rec, live);
        const auto residual = subtract(scale(rec, a), live);
        double dot = 0;
        for (std::size_t i = 0; i < rec.size(); ++i) dot += residual[i] * rec[i];
        CHECK(std::abs(dot) <= 1e-6 * std::sqrt(energy(rec.samples()) * energy(residual.samples())));
    }
}

TEST_CASE("estimate_scale") {
    constexpr int rate = 2000;
    const auto rec = noise_signal(10 * rate, 8, rate);

    SECTION("uniform 0.5 gain") {
        const auto est = estimate_scale(scale(rec, 0.5), rec, 1.0, 0.5);
        CHECK(est.alpha == Approx(0.5).epsilon(1e-12));
        CHECK(est.pearson_r == Approx(1.0).margin(1e-12));
        CHECK(est.frame_count == 19);
        CHECK(est.frame_index < est.frame_count);
    }

    SECTION("exact 0.8 gain") {
        CHECK(std::abs(estimate_scale(scale(rec, 0.8), rec, 1.0, 0.5).alpha - 0.8) <= 1e-9);
    }

    SECTION("picks the clean frame among interfered ones") {
        // Interference everywhere except [6 s, 7 s); frame 12 covers exactly that second.
        auto interference = noise_signal(10 * rate, 9, rate, 0.2).data();
        std::fill(interference.begin() + 6 * rate, interference.begin() + 7 * rate, 0.0);
        const auto live = subtract(scale(rec, 0.7), MonoSignal(interference, rate));
        const auto fit = fit_scale(live, rec, 1.0, 0.5);
        // oracle: the clean frame has r = 1 exactly, every other frame is well below
        CHECK(fit.correlations[12].pearson_r == Approx(1.0).margin(1e-12));
        for (const auto& f : fit.correlations) {
            if (f.frame_index != 12) CHECK(f.pearson_r < 0.9);
        }
        CHECK(fit.estimate.frame_index == 12);
        CHECK(fit.estimate.alpha == Approx(0.7).epsilon(0.02));
    }

    SECTION("silent studio stem is degenerate") {
        try {
            estimate_scale(rec, MonoSignal::zeros(rec.size(), rate), 1.0, 0.5);
            FAIL("expected degenerate error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::degenerate);
        }
    }
}
