#pragma once

// Per-sample corruption: severity draw, noise-type draw, SNR mixing or DSP
// transform, and the provenance record that makes a build reproducible.

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "dhauds/errors.hpp"
#include "dhauds/noise.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/tables.hpp"
#include "dhauds/vocoder.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

/// clean + g * noise with g chosen so the component SNR is exactly snr_db.
/// The result is not re-normalized; clipping happens only at int16 write.
inline Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
    if (clean.samples.size() != noise.samples.size())
        throw Error("mix_at_snr: length mismatch");
    if (clean.sample_rate != noise.sample_rate)
        throw Error("mix_at_snr: sample rate mismatch");
    const double p_clean = rms_power(clean);
    const double p_noise = rms_power(noise);
    if (p_clean <= 0.0) throw Error("mix_at_snr: clean signal has zero power");
    if (p_noise <= 0.0) throw Error("mix_at_snr: noise has zero power");
    const double gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
    Waveform out = clean;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] += gain * noise.samples[i];
    return out;
}

struct CorruptionSpec {
    std::string corruption_id;  // WHN | ENQ | END1 | END2 | ENSC | TST | PSH
    Family family = Family::WHN;
    Level level = Level::L1;
    SeverityGrid severity_grid;
    std::optional<NoisePool> noise_pool;  // present iff family is WHN or EN
    bool allow_slowdown = true;
};

/// Resolves a criterion against the tables. allow_slowdown = false drops the
/// negative time-stretch severities (short-clip datasets).
inline CorruptionSpec make_spec(const CorruptionTables& tables, const std::string& corruption_id,
                                Level level, bool allow_slowdown = true) {
    CorruptionSpec spec;
    spec.corruption_id = corruption_id;
    spec.family = family_of(corruption_id);
    spec.level = level;
    spec.severity_grid = tables.grid(spec.family, level);
    spec.allow_slowdown = allow_slowdown;
    if (spec.family == Family::TST && !allow_slowdown) {
        auto& v = spec.severity_grid.values;
        v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return x < 0.0; }), v.end());
        if (v.empty()) throw ConfigError("TST grid empty after removing slow-down values");
    }
    if (is_noise_family(spec.family)) spec.noise_pool = tables.pool(corruption_id, level);
    return spec;
}

struct CorruptionRecord {
    std::string sample_id;
    Family family = Family::WHN;
    Level level = Level::L1;
    std::string noise_type;    // empty for TST/PSH
    double severity = 0.0;
    std::uint64_t sample_seed = 0;
    std::string noise_source_id;  // empty for WHN/TST/PSH
    std::uint64_t noise_offset = 0;
};

namespace detail {

inline WhiteNoiseKind white_noise_kind(const std::string& type) {
    if (type == "Gaussian") return WhiteNoiseKind::gaussian;
    if (type == "Random") return WhiteNoiseKind::uniform;
    throw ConfigError("unknown white-noise type '" + type + "'");
}

}  // namespace detail

/// Applies one corruption, fully determined by (w, spec, lib, sample_seed).
/// Draw order is fixed: severity, then noise type, then noise realization.
inline std::pair<Waveform, CorruptionRecord> corrupt_sample(const Waveform& w,
                                                            const CorruptionSpec& spec,
                                                            const NoiseLibrary& lib,
                                                            std::uint64_t sample_seed,
                                                            const std::string& sample_id = {}) {
    Rng rng(sample_seed);
    CorruptionRecord rec;
    rec.sample_id = sample_id;
    rec.family = spec.family;
    rec.level = spec.level;
    rec.sample_seed = sample_seed;
    rec.severity = sample_severity(spec.severity_grid, rng);

    Waveform out;
    switch (spec.family) {
        case Family::WHN: {
            if (!spec.noise_pool) throw ConfigError("WHN spec without noise pool");
            const auto& types = spec.noise_pool->noise_types;
            rec.noise_type = types[rng.below(types.size())];
            const Waveform noise = gen_white_noise(detail::white_noise_kind(rec.noise_type),
                                                   w.samples.size(), w.sample_rate, rng);
            out = mix_at_snr(w, noise, rec.severity);
            break;
        }
        case Family::EN: {
            if (!spec.noise_pool) throw ConfigError("EN spec without noise pool");
            const auto& types = spec.noise_pool->noise_types;
            rec.noise_type = types[rng.below(types.size())];
            const NoiseSegment seg =
                lib.pick_segment(rec.noise_type, w.samples.size(), w.sample_rate, rng);
            rec.noise_source_id = seg.source_id;
            rec.noise_offset = seg.offset;
            out = mix_at_snr(w, seg.wave, rec.severity);
            break;
        }
        case Family::TST:
            out = time_stretch(w, rec.severity);
            break;
        case Family::PSH:
            out = pitch_shift(w, rec.severity);
            break;
    }
    return {std::move(out), std::move(rec)};
}

}  // namespace dhauds
