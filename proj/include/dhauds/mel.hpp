#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/fft.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

struct MelConfig {
    int n_mels = 64;
    std::size_t window = 0;  // samples
    std::size_t hop = 0;     // samples
    double fmin = 0.0;
    double fmax = 0.0;  // 0 means Nyquist
    double energy_floor = 1e-10;

    /// 25 ms window, 10 ms hop, fmin 0, fmax Nyquist.
    static MelConfig defaults(int sample_rate) {
        MelConfig c;
        c.window = static_cast<std::size_t>(std::llround(0.025 * sample_rate));
        c.hop = static_cast<std::size_t>(std::llround(0.010 * sample_rate));
        c.fmax = sample_rate / 2.0;
        return c;
    }
};

/// Log mel-filterbank energies, n_mels rows by n_frames columns.
struct MelFeature {
    std::vector<double> bins;  // row-major, bins[m * n_frames + t]
    int n_mels = 0;
    std::size_t n_frames = 0;
    std::size_t frame_hop = 0;

    double at(int m, std::size_t t) const { return bins[static_cast<std::size_t>(m) * n_frames + t]; }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular filterbank weights over FFT bins 0..n_fft/2. Row-major,
/// n_mels by (n_fft/2 + 1).
inline std::vector<double> mel_filterbank(int n_mels, std::size_t n_fft, int sample_rate,
                                          double fmin, double fmax) {
    const std::size_t n_bins = n_fft / 2 + 1;
    std::vector<double> weights(static_cast<std::size_t>(n_mels) * n_bins, 0.0);
    const double mel_lo = hz_to_mel(fmin);
    const double mel_hi = hz_to_mel(fmax);
    std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
    for (std::size_t k = 0; k < edges.size(); ++k)
        edges[k] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(k) /
                                          static_cast<double>(n_mels + 1));
    for (int m = 0; m < n_mels; ++m) {
        const double left = edges[static_cast<std::size_t>(m)];
        const double center = edges[static_cast<std::size_t>(m) + 1];
        const double right = edges[static_cast<std::size_t>(m) + 2];
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double f = static_cast<double>(b) * sample_rate / static_cast<double>(n_fft);
            double w = 0.0;
            if (f >= left && f <= center && center > left)
                w = (f - left) / (center - left);
            else if (f > center && f <= right && right > center)
                w = (right - f) / (right - center);
            weights[static_cast<std::size_t>(m) * n_bins + b] = w;
        }
    }
    return weights;
}

inline MelFeature mel_spectrogram(const Waveform& w, const MelConfig& cfg_in = {}) {
    MelConfig cfg = cfg_in;
    if (cfg.window == 0) {
        const MelConfig d = MelConfig::defaults(w.sample_rate);
        cfg.window = d.window;
        cfg.hop = d.hop;
    }
    if (cfg.fmax <= 0.0) cfg.fmax = w.sample_rate / 2.0;
    if (cfg.n_mels < 1) throw ConfigError("mel: n_mels must be >= 1");
    if (cfg.hop == 0 || cfg.window < cfg.hop) throw ConfigError("mel: window must be >= hop > 0");
    if (cfg.fmin < 0.0 || cfg.fmin >= cfg.fmax || cfg.fmax > w.sample_rate / 2.0 + 1e-9)
        throw ConfigError("mel: invalid filterbank bounds");

    const std::size_t n_fft = next_pow2(cfg.window);
    const std::size_t n_bins = n_fft / 2 + 1;
    const std::size_t len = w.samples.size();
    const std::size_t n_frames =
        len >= cfg.window ? 1 + (len - cfg.window) / cfg.hop : 1;

    const std::vector<double> fb =
        mel_filterbank(cfg.n_mels, n_fft, w.sample_rate, cfg.fmin, cfg.fmax);

    std::vector<double> hann(cfg.window);
    for (std::size_t i = 0; i < cfg.window; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                       static_cast<double>(cfg.window));

    MelFeature out;
    out.n_mels = cfg.n_mels;
    out.n_frames = n_frames;
    out.frame_hop = cfg.hop;
    out.bins.assign(static_cast<std::size_t>(cfg.n_mels) * n_frames, 0.0);

    std::vector<std::complex<double>> buf(n_fft);
    std::vector<double> power(n_bins);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const std::size_t start = t * cfg.hop;
        std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
        for (std::size_t i = 0; i < cfg.window && start + i < len; ++i)
            buf[i] = {w.samples[start + i] * hann[i], 0.0};
        fft_inplace(buf);
        for (std::size_t b = 0; b < n_bins; ++b) power[b] = std::norm(buf[b]);
        for (int m = 0; m < cfg.n_mels; ++m) {
            double e = 0.0;
            const double* row = fb.data() + static_cast<std::size_t>(m) * n_bins;
            for (std::size_t b = 0; b < n_bins; ++b) e += row[b] * power[b];
            out.bins[static_cast<std::size_t>(m) * n_frames + t] =
                std::log(std::max(e, cfg.energy_floor));
        }
    }
    return out;
}

}  // namespace dhauds
