#pragma once

// Mono waveform type plus RIFF WAV I/O (PCM16 and float32 only).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dhauds/errors.hpp"

namespace dhauds {

struct Waveform {
    std::vector<double> samples;
    int sample_rate = 0;

    std::size_t size() const { return samples.size(); }
    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
    bool finite() const {
        return std::all_of(samples.begin(), samples.end(),
                           [](double s) { return std::isfinite(s); });
    }
};

/// Mean-square power over the full clip.
inline double rms_power(const Waveform& w) {
    if (w.samples.empty()) throw Error("rms_power: empty waveform");
    double acc = 0.0;
    for (const double s : w.samples) acc += s * s;
    return acc / static_cast<double>(w.samples.size());
}

enum class ShiftDirection { left, right };

/// Shift by round(fraction * len) samples, zero-padding the vacated region.
/// Length is preserved. fraction must lie in [0, 1).
inline Waveform temporal_shift(const Waveform& w, ShiftDirection dir, double fraction) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw Error("temporal_shift: fraction out of [0, 1)");
    const std::size_t len = w.samples.size();
    const std::size_t n = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(len)));
    Waveform out;
    out.sample_rate = w.sample_rate;
    out.samples.assign(len, 0.0);
    if (dir == ShiftDirection::right) {
        for (std::size_t i = n; i < len; ++i) out.samples[i] = w.samples[i - n];
    } else {
        for (std::size_t i = 0; i + n < len; ++i) out.samples[i] = w.samples[i + n];
    }
    return out;
}

enum class WavEncoding { pcm16, float32 };

namespace detail {

inline void put_u16(std::string& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline void put_u32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

/// Reads a PCM WAV file. Multichannel content is averaged down to mono,
/// 16-bit samples are scaled by 1/32768.
inline Waveform load_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_wav: cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw IoError("load_wav: malformed RIFF header in " + path.string());

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= n) {
        const std::uint32_t chunk_len = detail::get_u32(p + off + 4);
        const unsigned char* body = p + off + 8;
        if (off + 8 + chunk_len > n)
            throw IoError("load_wav: truncated chunk in " + path.string());
        if (std::memcmp(p + off, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw IoError("load_wav: malformed fmt chunk in " + path.string());
            format = detail::get_u16(body);
            channels = detail::get_u16(body + 2);
            rate = detail::get_u32(body + 4);
            bits = detail::get_u16(body + 14);
            have_fmt = true;
        } else if (std::memcmp(p + off, "data", 4) == 0) {
            data = body;
            data_len = chunk_len;
        }
        off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }
    if (!have_fmt || data == nullptr)
        throw IoError("load_wav: missing fmt or data chunk in " + path.string());
    if (channels == 0 || rate == 0)
        throw IoError("load_wav: malformed fmt chunk in " + path.string());

    const bool pcm16 = (format == 1 && bits == 16);
    const bool f32 = (format == 3 && bits == 32);
    if (!pcm16 && !f32)
        throw IoError("load_wav: unsupported encoding (format " + std::to_string(format) +
                      ", " + std::to_string(bits) + " bit) in " + path.string());

    const std::size_t bytes_per = bits / 8u;
    const std::size_t frames = data_len / (bytes_per * channels);

    Waveform w;
    w.sample_rate = static_cast<int>(rate);
    w.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
            const unsigned char* s = data + (i * channels + c) * bytes_per;
            if (pcm16) {
                const auto v = static_cast<std::int16_t>(detail::get_u16(s));
                acc += v / 32768.0;
            } else {
                float v;
                std::memcpy(&v, s, 4);
                acc += v;
            }
        }
        w.samples[i] = acc / channels;
    }
    return w;
}

/// Writes a mono WAV file. Amplitudes are clipped to [-1, 1] before int16
/// quantization; float32 output is written verbatim.
inline void save_wav(const Waveform& w, const std::filesystem::path& path,
                     WavEncoding enc = WavEncoding::float32) {
    if (w.sample_rate <= 0) throw Error("save_wav: invalid sample rate");
    const std::uint16_t bits = (enc == WavEncoding::pcm16) ? 16 : 32;
    const std::uint16_t format = (enc == WavEncoding::pcm16) ? 1 : 3;
    const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * bits / 8);

    std::string b;
    b.reserve(44 + data_len);
    b.append("RIFF");
    detail::put_u32(b, 36 + data_len);
    b.append("WAVE");
    b.append("fmt ");
    detail::put_u32(b, 16);
    detail::put_u16(b, format);
    detail::put_u16(b, 1);  // mono
    detail::put_u32(b, static_cast<std::uint32_t>(w.sample_rate));
    detail::put_u32(b, static_cast<std::uint32_t>(w.sample_rate) * bits / 8);
    detail::put_u16(b, bits / 8);
    detail::put_u16(b, bits);
    b.append("data");
    detail::put_u32(b, data_len);

    if (enc == WavEncoding::pcm16) {
        for (const double s : w.samples) {
            const double clipped = std::clamp(s, -1.0, 1.0);
            const auto v = static_cast<std::int16_t>(std::llround(clipped * 32767.0));
            detail::put_u16(b, static_cast<std::uint16_t>(v));
        }
    } else {
        for (const double s : w.samples) {
            const float v = static_cast<float>(s);
            char raw[4];
            std::memcpy(raw, &v, 4);
            b.append(raw, 4);
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_wav: cannot open " + path.string() + " for writing");
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
    if (!out) throw IoError("save_wav: write failed for " + path.string());
}

}  // namespace dhauds
