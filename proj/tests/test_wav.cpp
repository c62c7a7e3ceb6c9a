#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>
#include <random>
#include <vector>

#include "livevox/wav.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace livevox;
using livevox::testing::TempDir;

namespace {

// Hand-rolled minimal RIFF writer so decode tests do not depend on write_wav.
void write_raw_wav(const std::filesystem::path& path, std::uint16_t format, std::uint16_t channels,
                   std::uint32_t rate, std::uint16_t bits, const std::vector<unsigned char>& payload) {
    std::vector<unsigned char> b;
    auto u16 = [&](std::uint16_t v) { b.push_back(v & 0xFF); b.push_back(v >> 8); };
    auto u32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF); };
    auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
    tag("RIFF");
    u32(static_cast<std::uint32_t>(4 + 8 + 16 + 8 + payload.size()));
    tag("WAVE");
    tag("LIST");  // unrelated chunk before fmt must be skipped
    u32(2);
    u16(0);
    tag("fmt ");
    u32(16);
    u16(format);
    u16(channels);
    u32(rate);
    u32(rate * channels * bits / 8);
    u16(static_cast<std::uint16_t>(channels * bits / 8));
    u16(bits);
    tag("data");
    u32(static_cast<std::uint32_t>(payload.size()));
    b.insert(b.end(), payload.begin(), payload.end());
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST_CASE("PCM16 decoding divides by 32768") {
    TempDir dir;
    write_raw_wav(dir / "a.wav", 1, 1, 44100, 16, {0xFF, 0x7F, 0x00, 0x00, 0x00, 0x80});
    const auto clip = load_wav(dir / "a.wav");
    REQUIRE(clip.frames() == 3);
    CHECK(clip.channel(0)[0] == 32767.0 / 32768.0);
    CHECK(clip.channel(0)[1] == 0.0);
    CHECK(clip.channel(0)[2] == -1.0);
    CHECK(clip.sample_rate() == 44100);
}

TEST_CASE("PCM24 decoding divides by 8388608 with sign extension") {
    TempDir dir;
    write_raw_wav(dir / "a.wav", 1, 2, 48000, 24, {0xFF, 0xFF, 0x7F, 0x00, 0x00, 0x80});
    const auto clip = load_wav(dir / "a.wav");
    REQUIRE(clip.channels() == 2);
    REQUIRE(clip.frames() == 1);
    CHECK(clip.channel(0)[0] == 8388607.0 / 8388608.0);
    CHECK(clip.channel(1)[0] == -1.0);
}

TEST_CASE("three seconds of 44.1 kHz stereo") {
    TempDir dir;
    std::vector<unsigned char> payload(132300 * 2 * 2, 0);
    write_raw_wav(dir / "s.wav", 1, 2, 44100, 16, payload);
    const auto clip = load_wav(dir / "s.wav");
    CHECK(clip.channels() == 2);
    CHECK(clip.frames() == 132300);
}

TEST_CASE("float32 round trip is bit-exact") {
    TempDir dir;
    // Values representable in single precision survive exactly.
    std::vector<double> l, r;
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> u(-1.5f, 1.5f);
    for (int i = 0; i < 1000; ++i) {
        l.push_back(u(rng));
        r.push_back(u(rng));
    }
    const AudioClip clip({l, r}, 96000);
    write_wav(clip, dir / "f.wav", WavEncoding::float32);
    CHECK(load_wav(dir / "f.wav") == clip);
}

TEST_CASE("pcm16 writes clamp and quantize") {
    TempDir dir;
    SECTION("out-of-range sample clamps to full scale") {
        write_wav(MonoSignal({1.5, -2.0}, 44100), dir / "c.wav", WavEncoding::pcm16);
        const auto back = load_mono(dir / "c.wav");
        CHECK(back[0] == Catch::Approx(1.0).margin(1.0 / 32768));
        CHECK(back[1] == -1.0);
    }
    SECTION("in-range error within one code") {
        const auto s = testing::white_noise(10000, 3, 0.3);
        std::vector<double> clipped(s);
        for (auto& v : clipped) v = std::clamp(v, -1.0, 1.0);
        write_wav(MonoSignal(clipped, 44100), dir / "q.wav", WavEncoding::pcm16);
        const auto back = load_mono(dir / "q.wav");
        double worst = 0;
        for (std::size_t i = 0; i < clipped.size(); ++i) worst = std::max(worst, std::abs(back[i] - clipped[i]));
        CHECK(worst <= 1.0 / 32768);
    }
}

TEST_CASE("load_wav error reporting") {
    TempDir dir;
    CHECK_THROWS_WITH(load_wav(dir / "missing.wav"), Catch::Matchers::ContainsSubstring("cannot open"));

    std::ofstream(dir / "junk.wav") << "this is not audio";
    CHECK_THROWS_WITH(load_wav(dir / "junk.wav"), Catch::Matchers::ContainsSubstring("not a RIFF/WAVE"));

    write_raw_wav(dir / "u8.wav", 1, 1, 8000, 8, {0x80, 0x80});
    CHECK_THROWS_WITH(load_wav(dir / "u8.wav"), Catch::Matchers::ContainsSubstring("unsupported encoding"));

    write_raw_wav(dir / "empty.wav", 1, 1, 8000, 16, {});
    CHECK_THROWS_WITH(load_wav(dir / "empty.wav"), Catch::Matchers::ContainsSubstring("no audio frames"));

    try {
        load_wav(dir / "junk.wav");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::input);
    }
}

TEST_CASE("write_wav reports unwritable paths") {
    TempDir dir;
    CHECK_THROWS_AS(write_wav(MonoSignal({0.0}, 44100), dir / "no" / "such" / "dir.wav"), Error);
}
