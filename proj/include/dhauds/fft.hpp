#pragma once

// Iterative radix-2 FFT, power-of-two sizes. Sufficient for the analysis
// windows used here; no external FFT dependency.

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "dhauds/errors.hpp"

namespace dhauds {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw Error("fft: size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

/// Magnitude spectrum of a real signal zero-padded to the next power of two.
/// Returns bins 0..n/2 (inclusive).
inline std::vector<double> magnitude_spectrum(const std::vector<double>& signal,
                                              std::size_t min_size = 0) {
    std::size_t n = next_pow2(std::max(signal.size(), std::max<std::size_t>(min_size, 2)));
    std::vector<std::complex<double>> buf(n, {0.0, 0.0});
    for (std::size_t i = 0; i < signal.size(); ++i) buf[i] = {signal[i], 0.0};
    fft_inplace(buf);
    std::vector<double> mag(n / 2 + 1);
    for (std::size_t i = 0; i <= n / 2; ++i) mag[i] = std::abs(buf[i]);
    return mag;
}

/// Frequency (Hz) of the strongest spectral peak. Quadratic interpolation
/// around the peak bin gives sub-bin resolution.
inline double dominant_frequency(const std::vector<double>& signal, int sample_rate) {
    const std::vector<double> mag = magnitude_spectrum(signal, 1 << 14);
    std::size_t peak = 1;
    for (std::size_t i = 1; i + 1 < mag.size(); ++i)
        if (mag[i] > mag[peak]) peak = i;
    const std::size_t n = (mag.size() - 1) * 2;
    double delta = 0.0;
    if (peak > 0 && peak + 1 < mag.size()) {
        const double a = mag[peak - 1], b = mag[peak], c = mag[peak + 1];
        const double denom = a - 2.0 * b + c;
        if (std::abs(denom) > 1e-12) delta = 0.5 * (a - c) / denom;
    }
    return (static_cast<double>(peak) + delta) * sample_rate / static_cast<double>(n);
}

}  // namespace dhauds
