#pragma once

// Phase-vocoder time stretching and the derived pitch shifter.
//
// Analysis frames are taken at a (possibly fractional) hop of hs * rate and
// re-synthesized at a fixed hop hs. Per-bin instantaneous frequency is
// estimated from the wrapped phase increment and integrated at the synthesis
// hop, which preserves partial frequencies while the duration changes.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/fft.hpp"
#include "dhauds/resample.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

namespace detail {

/// 2048-sample window at 44.1 kHz, scaled to the nearest power of two for
/// other rates; hop is a quarter window.
inline std::size_t vocoder_window(int sample_rate) {
    const double scaled = 2048.0 * sample_rate / 44100.0;
    std::size_t win = next_pow2(static_cast<std::size_t>(std::llround(scaled)));
    return std::max<std::size_t>(win, 256);
}

inline double wrap_phase(double x) {
    return x - 2.0 * std::numbers::pi * std::round(x / (2.0 * std::numbers::pi));
}

/// Stretches so that output length = round(len / rate). rate > 1 shortens
/// (faster tempo), rate < 1 lengthens.
inline Waveform stretch_by_rate(const Waveform& w, double rate) {
    if (rate <= 0.0) throw Error("time_stretch: rate must be positive");
    const std::size_t len = w.samples.size();
    const std::size_t out_len =
        static_cast<std::size_t>(std::llround(static_cast<double>(len) / rate));
    Waveform out;
    out.sample_rate = w.sample_rate;
    out.samples.assign(out_len, 0.0);
    if (len == 0 || out_len == 0) return out;

    const std::size_t win = vocoder_window(w.sample_rate);
    const std::size_t hs = win / 4;
    const double ha = static_cast<double>(hs) * rate;
    const std::size_t n_bins = win / 2 + 1;

    std::vector<double> hann(win);
    for (std::size_t i = 0; i < win; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                       static_cast<double>(win));

    // Synthesis frames run past the end so every retained sample has full
    // window overlap; dividing by a partial window sum would amplify the
    // phase-modified residual at the edges.
    const std::size_t n_frames = (out_len + hs - 1) / hs + 1;

    std::vector<double> acc((n_frames - 1) * hs + win, 0.0);
    std::vector<double> norm(acc.size(), 0.0);
    std::vector<double> prev_phase(n_bins, 0.0);
    std::vector<double> syn_phase(n_bins, 0.0);
    std::vector<std::complex<double>> buf(win);

    std::ptrdiff_t prev_pos = 0;
    for (std::size_t k = 0; k < n_frames; ++k) {
        std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(
            std::llround(static_cast<double>(k) * ha));
        const auto max_pos = static_cast<std::ptrdiff_t>(len) - 1;
        if (pos > max_pos) pos = max_pos;

        for (std::size_t i = 0; i < win; ++i) {
            const std::size_t src = static_cast<std::size_t>(pos) + i;
            buf[i] = {src < len ? w.samples[src] * hann[i] : 0.0, 0.0};
        }
        fft_inplace(buf);

        for (std::size_t j = 0; j < n_bins; ++j) {
            const double mag = std::abs(buf[j]);
            const double phase = std::arg(buf[j]);
            const double bin_freq =
                2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(win);
            if (k == 0) {
                syn_phase[j] = phase;
            } else {
                const double hop_k = static_cast<double>(pos - prev_pos);
                double inst_freq = bin_freq;
                if (hop_k > 0.0) {
                    const double delta =
                        wrap_phase(phase - prev_phase[j] - bin_freq * hop_k);
                    inst_freq = bin_freq + delta / hop_k;
                }
                syn_phase[j] += inst_freq * static_cast<double>(hs);
            }
            prev_phase[j] = phase;
            buf[j] = std::polar(mag, syn_phase[j]);
        }
        // Rebuild the negative-frequency half for a real output frame.
        for (std::size_t j = n_bins; j < win; ++j) buf[j] = std::conj(buf[win - j]);
        fft_inplace(buf, true);

        const std::size_t dst = k * hs;
        for (std::size_t i = 0; i < win; ++i) {
            acc[dst + i] += buf[i].real() * hann[i];
            norm[dst + i] += hann[i] * hann[i];
        }
        prev_pos = pos;
    }

    for (std::size_t i = 0; i < out_len; ++i)
        out.samples[i] = norm[i] > 1e-9 ? acc[i] / std::max(norm[i], 1e-3) : 0.0;
    return out;
}

}  // namespace detail

/// Tempo change with pitch preserved. Positive percent speeds playback up
/// (shorter output), negative slows it down; rate = 1 + percent / 100.
inline Waveform time_stretch(const Waveform& w, double percent) {
    if (percent == 0.0) throw Error("time_stretch: percent must be nonzero");
    if (std::abs(percent) >= 50.0) throw Error("time_stretch: |percent| must be < 50");
    return detail::stretch_by_rate(w, 1.0 + percent / 100.0);
}

/// Pitch change with duration preserved: stretch by 2^(semitones/12), then
/// resample back so the output length equals the input length exactly.
inline Waveform pitch_shift(const Waveform& w, double semitones) {
    if (semitones == 0.0) throw Error("pitch_shift: semitones must be nonzero");
    if (std::abs(semitones) > 24.0) throw Error("pitch_shift: |semitones| must be <= 24");
    const double factor = std::pow(2.0, semitones / 12.0);

    Waveform stretched = detail::stretch_by_rate(w, 1.0 / factor);
    Waveform out;
    out.sample_rate = w.sample_rate;
    out.samples = detail::resample_ratio(stretched.samples, 1.0 / factor);
    out.samples.resize(w.samples.size(), 0.0);
    return out;
}

}  // namespace dhauds
