#pragma once

// Band-limited sample rate conversion with a windowed-sinc kernel.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

namespace detail {

/// Resamples by an arbitrary ratio (output rate / input rate). The sinc
/// kernel is Blackman-windowed; when decimating, its cutoff is lowered to
/// the output Nyquist to suppress aliasing.
inline std::vector<double> resample_ratio(const std::vector<double>& in, double ratio,
                                          int zero_crossings = 32) {
    if (ratio <= 0.0) throw Error("resample: ratio must be positive");
    const std::size_t out_len = static_cast<std::size_t>(
        std::llround(static_cast<double>(in.size()) * ratio));
    std::vector<double> out(out_len, 0.0);
    if (in.empty() || out_len == 0) return out;

    const double cutoff = std::min(1.0, ratio);      // fraction of input Nyquist
    const double half_width = zero_crossings / cutoff;
    const auto n_in = static_cast<std::ptrdiff_t>(in.size());

    for (std::size_t i = 0; i < out_len; ++i) {
        const double t = static_cast<double>(i) / ratio;  // position in input samples
        const auto j_lo = static_cast<std::ptrdiff_t>(std::ceil(t - half_width));
        const auto j_hi = static_cast<std::ptrdiff_t>(std::floor(t + half_width));
        double acc = 0.0;
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(j_lo, 0);
             j <= std::min(j_hi, n_in - 1); ++j) {
            const double x = (t - static_cast<double>(j)) * cutoff;
            double kernel;
            if (std::abs(x) < 1e-12) {
                kernel = 1.0;
            } else {
                const double px = std::numbers::pi * x;
                kernel = std::sin(px) / px;
            }
            // Blackman window over [-half_width, half_width]
            const double u = (t - static_cast<double>(j)) / half_width;
            if (u < -1.0 || u > 1.0) continue;
            const double pu = std::numbers::pi * (u + 1.0);
            const double win = 0.42 - 0.5 * std::cos(pu) + 0.08 * std::cos(2.0 * pu);
            acc += in[static_cast<std::size_t>(j)] * kernel * win;
        }
        out[i] = acc * cutoff;
    }
    return out;
}

}  // namespace detail

/// Band-limited resampling to a new rate. Output length is
/// round(len * target / source).
inline Waveform resample(const Waveform& w, int target_rate, int zero_crossings = 32) {
    if (target_rate <= 0) throw Error("resample: target rate must be positive");
    if (w.sample_rate <= 0) throw Error("resample: source rate must be positive");
    if (target_rate == w.sample_rate) return w;
    Waveform out;
    out.sample_rate = target_rate;
    out.samples = detail::resample_ratio(
        w.samples, static_cast<double>(target_rate) / w.sample_rate, zero_crossings);
    return out;
}

}  // namespace dhauds
