#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "livevox/error.hpp"

namespace livevox {

/// Converts seconds to whole samples, rounding half away from zero.
inline std::size_t seconds_to_samples(double seconds, int sample_rate) {
    return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

/// Aligned analysis frames over two equal-length signals. The last partial frame is dropped.
struct Framing {
    std::size_t frame_length = 0;
    std::size_t hop = 0;
    std::size_t count = 0;

    std::size_t start(std::size_t frame_index) const { return frame_index * hop; }
};

inline Framing make_framing(double frame_seconds, double hop_seconds, int sample_rate, std::size_t signal_length) {
    if (!(frame_seconds > 0.0)) fail_input("frame length must be positive");
    if (!(hop_seconds > 0.0) || hop_seconds > frame_seconds) {
        fail_input("hop must satisfy 0 < hop <= frame (got hop " + std::to_string(hop_seconds) + " s, frame " +
                   std::to_string(frame_seconds) + " s)");
    }
    Framing f;
    f.frame_length = seconds_to_samples(frame_seconds, sample_rate);
    f.hop = seconds_to_samples(hop_seconds, sample_rate);
    if (f.frame_length == 0 || f.hop == 0) fail_input("frame and hop must each span at least one sample");
    f.count = signal_length >= f.frame_length ? (signal_length - f.frame_length) / f.hop + 1 : 0;
    return f;
}

}  // namespace livevox
