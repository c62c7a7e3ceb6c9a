#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "livevox/audio.hpp"
#include "livevox/error.hpp"

namespace livevox {

enum class WavEncoding { float32, pcm16 };

inline std::string to_string(WavEncoding e) { return e == WavEncoding::float32 ? "float32" : "pcm16"; }

inline WavEncoding parse_encoding(const std::string& name) {
    if (name == "float32") return WavEncoding::float32;
    if (name == "pcm16") return WavEncoding::pcm16;
    fail_input("unknown encoding '" + name + "' (expected float32 or pcm16)");
}

namespace detail::wav {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline std::uint32_t read_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline std::uint16_t read_u16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

class Writer {
public:
    void u16(std::uint16_t v) { bytes.push_back(v & 0xFF); bytes.push_back(v >> 8); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back((v >> (8 * i)) & 0xFF);
    }
    void tag(const char* t) { bytes.insert(bytes.end(), t, t + 4); }

    std::vector<unsigned char> bytes;
};

struct Format {
    std::uint16_t tag = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t block_align = 0;
    std::uint16_t bits = 0;
};

inline double decode(const unsigned char* p, const Format& fmt) {
    if (fmt.tag == kFormatFloat) {
        return std::bit_cast<float>(read_u32(p));
    }
    if (fmt.bits == 16) {
        auto code = static_cast<std::int16_t>(read_u16(p));
        return code / 32768.0;
    }
    // 24-bit: sign-extend from the top byte
    std::int32_t code = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 | std::int32_t(std::int8_t(p[2])) << 16;
    return code / 8388608.0;
}

}  // namespace detail::wav

/// Reads RIFF/WAVE with PCM16, PCM24 or IEEE float32 samples.
inline AudioClip load_wav(const std::filesystem::path& path) {
    using namespace detail::wav;
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_input("cannot open '" + path.string() + "' for reading");
    std::vector<unsigned char> bytes(static_cast<std::size_t>(std::filesystem::file_size(path)));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
    const std::string where = "'" + path.string() + "': ";

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        fail_input(where + "not a RIFF/WAVE file");
    }

    Format fmt;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::size_t size = read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = bytes.size() - body;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || size > available) fail_input(where + "malformed fmt chunk");
            const unsigned char* f = bytes.data() + body;
            fmt.tag = read_u16(f);
            fmt.channels = read_u16(f + 2);
            fmt.sample_rate = read_u32(f + 4);
            fmt.block_align = read_u16(f + 12);
            fmt.bits = read_u16(f + 14);
            if (fmt.tag == kFormatExtensible) {
                if (size < 40) fail_input(where + "malformed WAVE_FORMAT_EXTENSIBLE fmt chunk");
                fmt.tag = read_u16(f + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            if (!have_fmt) fail_input(where + "data chunk precedes fmt chunk");
            data = bytes.data() + body;
            // Tolerate writers that leave a streaming placeholder size.
            data_size = std::min(size, available);
            break;
        }
        if (size > available) break;
        pos = body + size + (size & 1);
    }

    if (!have_fmt) fail_input(where + "missing fmt chunk");
    if (data == nullptr) fail_input(where + "missing data chunk");
    if (fmt.channels == 0) fail_input(where + "zero channels in header");
    if (fmt.sample_rate == 0) fail_input(where + "zero sample rate in header");

    const bool supported = (fmt.tag == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24)) ||
                           (fmt.tag == kFormatFloat && fmt.bits == 32);
    if (!supported) {
        fail_input(where + "unsupported encoding (format tag " + std::to_string(fmt.tag) + ", " +
                   std::to_string(fmt.bits) + " bits); expected PCM16, PCM24 or float32");
    }
    const std::size_t bytes_per_sample = fmt.bits / 8;
    if (fmt.block_align != bytes_per_sample * fmt.channels) {
        fail_input(where + "block align " + std::to_string(fmt.block_align) + " inconsistent with " +
                   std::to_string(fmt.channels) + " channels of " + std::to_string(fmt.bits) + " bits");
    }

    const std::size_t frames = data_size / fmt.block_align;
    if (frames == 0) fail_input(where + "no audio frames in data chunk");

    std::vector<std::vector<Sample>> channels(fmt.channels, std::vector<Sample>(frames));
    for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char* frame = data + i * fmt.block_align;
        for (std::size_t c = 0; c < fmt.channels; ++c) {
            const double v = decode(frame + c * bytes_per_sample, fmt);
            if (!std::isfinite(v)) fail_input(where + "non-finite float sample at frame " + std::to_string(i));
            channels[c][i] = v;
        }
    }
    return AudioClip(std::move(channels), static_cast<int>(fmt.sample_rate));
}

/// float32 stores samples verbatim (narrowed to single precision); pcm16 clamps to [-1, 1]
/// and rounds to the nearest code.
inline void write_wav(const AudioClip& clip, const std::filesystem::path& path,
                      WavEncoding encoding = WavEncoding::float32) {
    using namespace detail::wav;
    const bool is_float = encoding == WavEncoding::float32;
    const std::uint16_t bits = is_float ? 32 : 16;
    const auto channels = static_cast<std::uint16_t>(clip.channels());
    const std::uint16_t block_align = channels * (bits / 8);
    const std::uint64_t data_bytes = std::uint64_t(clip.frames()) * block_align;
    if (data_bytes > 0xFFFFFFF0ull) fail_input("audio too long for a RIFF/WAVE file");

    Writer w;
    w.bytes.reserve(static_cast<std::size_t>(data_bytes) + 64);
    const std::uint32_t fmt_size = is_float ? 18 : 16;
    const std::uint32_t fact_size = is_float ? 12 : 0;
    w.tag("RIFF");
    w.u32(static_cast<std::uint32_t>(4 + 8 + fmt_size + fact_size + 8 + data_bytes));
    w.tag("WAVE");
    w.tag("fmt ");
    w.u32(fmt_size);
    w.u16(is_float ? kFormatFloat : kFormatPcm);
    w.u16(channels);
    w.u32(static_cast<std::uint32_t>(clip.sample_rate()));
    w.u32(static_cast<std::uint32_t>(clip.sample_rate()) * block_align);
    w.u16(block_align);
    w.u16(bits);
    if (is_float) {
        w.u16(0);
        w.tag("fact");
        w.u32(4);
        w.u32(static_cast<std::uint32_t>(clip.frames()));
    }
    w.tag("data");
    w.u32(static_cast<std::uint32_t>(data_bytes));
    for (std::size_t i = 0; i < clip.frames(); ++i) {
        for (int c = 0; c < clip.channels(); ++c) {
            const double v = clip.channel(c)[i];
            if (is_float) {
                w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
            } else {
                const double clamped = std::clamp(v, -1.0, 1.0);
                const long code = std::clamp(std::lround(clamped * 32768.0), -32768L, 32767L);
                w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
            }
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_input("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
    if (!out) fail_input("failed writing '" + path.string() + "'");
}

inline void write_wav(const MonoSignal& s, const std::filesystem::path& path,
                      WavEncoding encoding = WavEncoding::float32) {
    write_wav(AudioClip(s), path, encoding);
}

inline MonoSignal load_mono(const std::filesystem::path& path) { return to_mono(load_wav(path)); }

}  // namespace livevox
