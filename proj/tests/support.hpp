#pragma once

// Shared helpers for tests: synthetic tones and a synthetic noise root that
// satisfies every default pool.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "dhauds/noise.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/tables.hpp"
#include "dhauds/wave.hpp"

namespace testsupport {

inline dhauds::Waveform sine(double freq, double seconds, int rate, double amp = 1.0) {
    dhauds::Waveform w;
    w.sample_rate = rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
    return w;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Writes a noise root with every type referenced by the default pools.
/// Sources are seeded filtered noise, two files per type, different lengths
/// so both the windowing and the tiling path get exercised.
inline std::filesystem::path make_noise_root(const std::filesystem::path& dir,
                                             int sample_rate = 16000,
                                             double seconds_long = 2.0,
                                             double seconds_short = 0.4) {
    namespace fs = std::filesystem;
    using namespace dhauds;
    fs::create_directories(dir);
    const CorruptionTables tables = CorruptionTables::defaults();
    std::vector<std::string> types;
    for (const auto& [key, pool] : tables.pools()) {
        if (pool.corruption_id == "WHN") continue;  // synthesized, not file-backed
        for (const auto& t : pool.noise_types) types.push_back(t);
    }
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());

    std::uint64_t salt = 1;
    for (const auto& type : types) {
        fs::create_directories(dir / type);
        for (int k = 0; k < 2; ++k) {
            Rng rng(derive_seed(777, "noise", type, salt++));
            const double secs = k == 0 ? seconds_long : seconds_short;
            Waveform w;
            w.sample_rate = sample_rate;
            w.samples.resize(static_cast<std::size_t>(secs * sample_rate));
            double state = 0.0;
            for (auto& s : w.samples) {
                state = 0.85 * state + 0.3 * rng.uniform(-1.0, 1.0);
                s = state;
            }
            save_wav(w, dir / type / ("src" + std::to_string(k) + ".wav"),
                     WavEncoding::float32);
        }
    }
    return dir;
}

}  // namespace testsupport
