#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "livevox/error.hpp"

namespace livevox {

using Sample = double;
using SampleIndex = std::int64_t;

namespace detail {

inline void require_positive_rate(int sample_rate) {
    if (sample_rate <= 0) fail_input("sample rate must be positive, got " + std::to_string(sample_rate));
}

inline void require_finite(std::span<const Sample> samples) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) fail_input("non-finite sample at index " + std::to_string(i));
    }
}

}  // namespace detail

/// Single-channel signal at a fixed rate. Immutable once built.
class MonoSignal {
public:
    MonoSignal() = default;

    MonoSignal(std::vector<Sample> samples, int sample_rate)
        : samples_(std::move(samples)), sample_rate_(sample_rate) {
        detail::require_positive_rate(sample_rate_);
        detail::require_finite(samples_);
    }

    static MonoSignal zeros(std::size_t length, int sample_rate) {
        return MonoSignal(std::vector<Sample>(length, 0.0), sample_rate);
    }

    std::span<const Sample> samples() const noexcept { return samples_; }
    const std::vector<Sample>& data() const noexcept { return samples_; }
    int sample_rate() const noexcept { return sample_rate_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    Sample operator[](std::size_t i) const { return samples_[i]; }
    double duration_seconds() const { return static_cast<double>(samples_.size()) / sample_rate_; }

    /// Copy of samples [start, start + length).
    MonoSignal slice(std::size_t start, std::size_t length) const {
        if (start + length > samples_.size()) fail_input("slice out of range");
        return MonoSignal(std::vector<Sample>(samples_.begin() + static_cast<std::ptrdiff_t>(start),
                                              samples_.begin() + static_cast<std::ptrdiff_t>(start + length)),
                          sample_rate_);
    }

    friend bool operator==(const MonoSignal&, const MonoSignal&) = default;

private:
    std::vector<Sample> samples_;
    int sample_rate_ = 1;
};

/// Multichannel audio; every channel holds the same number of samples.
class AudioClip {
public:
    AudioClip(std::vector<std::vector<Sample>> channels, int sample_rate)
        : channels_(std::move(channels)), sample_rate_(sample_rate) {
        detail::require_positive_rate(sample_rate_);
        if (channels_.empty()) fail_input("audio clip needs at least one channel");
        for (const auto& ch : channels_) {
            if (ch.size() != channels_.front().size()) fail_input("audio clip channels differ in length");
            detail::require_finite(ch);
        }
    }

    explicit AudioClip(const MonoSignal& mono) : AudioClip({mono.data()}, mono.sample_rate()) {}

    int sample_rate() const noexcept { return sample_rate_; }
    int channels() const noexcept { return static_cast<int>(channels_.size()); }
    std::size_t frames() const noexcept { return channels_.front().size(); }
    std::span<const Sample> channel(int index) const { return channels_.at(static_cast<std::size_t>(index)); }

    /// Moves one channel out, leaving it empty.
    std::vector<Sample> release_channel(int index) { return std::move(channels_.at(static_cast<std::size_t>(index))); }

    friend bool operator==(const AudioClip&, const AudioClip&) = default;

private:
    std::vector<std::vector<Sample>> channels_;
    int sample_rate_;
};

/// Unweighted mean across channels.
inline MonoSignal to_mono(const AudioClip& clip) {
    if (clip.channels() == 1) {
        auto ch = clip.channel(0);
        return MonoSignal({ch.begin(), ch.end()}, clip.sample_rate());
    }
    std::vector<Sample> out(clip.frames(), 0.0);
    for (int c = 0; c < clip.channels(); ++c) {
        auto ch = clip.channel(c);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += ch[i];
    }
    const double n = clip.channels();
    for (auto& v : out) v /= n;
    return MonoSignal(std::move(out), clip.sample_rate());
}

inline MonoSignal to_mono(AudioClip&& clip) {
    if (clip.channels() == 1) return MonoSignal(clip.release_channel(0), clip.sample_rate());
    return to_mono(static_cast<const AudioClip&>(clip));
}

/// Positive lag delays the signal (prepends zeros); negative lag drops leading samples.
inline MonoSignal shift(const MonoSignal& s, SampleIndex lag) {
    if (lag == 0) return s;
    const auto len = static_cast<SampleIndex>(s.size());
    std::vector<Sample> out;
    if (lag > 0) {
        out.assign(static_cast<std::size_t>(lag), 0.0);
        out.insert(out.end(), s.data().begin(), s.data().end());
    } else {
        if (-lag >= len) {
            fail_input("negative shift of " + std::to_string(-lag) + " samples would empty a signal of length " +
                       std::to_string(len));
        }
        out.assign(s.data().begin() + static_cast<std::ptrdiff_t>(-lag), s.data().end());
    }
    return MonoSignal(std::move(out), s.sample_rate());
}

inline void require_same_rate(const MonoSignal& a, const MonoSignal& b) {
    if (a.sample_rate() != b.sample_rate()) {
        fail_input("sample rate mismatch: " + std::to_string(a.sample_rate()) + " Hz vs " +
                   std::to_string(b.sample_rate()) + " Hz");
    }
}

inline void require_same_length(const MonoSignal& a, const MonoSignal& b) {
    if (a.size() != b.size()) {
        fail_input("length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " samples");
    }
}

inline MonoSignal pad_to(const MonoSignal& s, std::size_t length) {
    if (s.size() >= length) return s;
    std::vector<Sample> out = s.data();
    out.resize(length, 0.0);
    return MonoSignal(std::move(out), s.sample_rate());
}

/// Zero-pads the shorter signal at the end so both have the longer length.
inline std::pair<MonoSignal, MonoSignal> match_lengths(const MonoSignal& a, const MonoSignal& b) {
    require_same_rate(a, b);
    const std::size_t n = std::max(a.size(), b.size());
    return {pad_to(a, n), pad_to(b, n)};
}

inline MonoSignal scale(const MonoSignal& s, double alpha) {
    if (!std::isfinite(alpha)) fail_input("scale factor must be finite");
    std::vector<Sample> out(s.size());
    std::transform(s.data().begin(), s.data().end(), out.begin(), [alpha](Sample v) { return alpha * v; });
    return MonoSignal(std::move(out), s.sample_rate());
}

inline MonoSignal subtract(const MonoSignal& live, const MonoSignal& rec) {
    require_same_rate(live, rec);
    require_same_length(live, rec);
    std::vector<Sample> out(live.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = live[i] - rec[i];
    return MonoSignal(std::move(out), live.sample_rate());
}

inline constexpr double kSilenceDbfs = -std::numeric_limits<double>::infinity();

inline double energy(std::span<const Sample> s) {
    double acc = 0.0;
    for (Sample v : s) acc += v * v;
    return acc;
}

inline double rms_dbfs(std::span<const Sample> s) {
    if (s.empty()) fail_input("rms of an empty signal");
    const double mean_square = energy(s) / static_cast<double>(s.size());
    if (mean_square == 0.0) return kSilenceDbfs;
    return 10.0 * std::log10(mean_square);
}

/// 20·log10(RMS); negative infinity for digital silence.
inline double rms_dbfs(const MonoSignal& s) { return rms_dbfs(s.samples()); }

}  // namespace livevox
