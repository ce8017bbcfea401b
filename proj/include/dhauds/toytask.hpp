#pragma once

// Synthetic multi-class audio task: amplitude-modulated harmonic tones with
// per-clip seeded jitter. Small enough to train on a CPU in seconds, rich
// enough that noise, stretch and pitch corruptions are all meaningful.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/manifest.hpp"
#include "dhauds/mel.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

struct ToyClassSpec {
    double fundamental_hz = 440.0;
    std::vector<double> harmonics = {1.0};  // relative amplitudes, h = 1, 2, ...
    double am_rate_hz = 4.0;
    double am_depth = 0.3;
};

struct ToyTaskConfig {
    int n_classes = 4;
    double clip_seconds = 1.0;
    int sample_rate = 16000;
    std::vector<ToyClassSpec> classes;  // size n_classes
    int train_per_class = 60;
    int test_per_class = 40;
    double fundamental_jitter = 0.01;  // +- 1 percent
    std::uint64_t seed = 2025;
    std::string dataset_id = "toy";

    /// Fundamentals spaced far apart on the mel scale (well over the three
    /// default mel bins the front end needs to separate classes).
    static ToyTaskConfig defaults() {
        ToyTaskConfig cfg;
        cfg.classes = {
            {400.0, {1.0, 0.50, 0.25}, 2.0, 0.30},
            {700.0, {1.0, 0.70, 0.10}, 5.0, 0.30},
            {1150.0, {1.0, 0.30, 0.55}, 8.0, 0.30},
            {1900.0, {1.0, 0.60, 0.35}, 12.0, 0.30},
        };
        return cfg;
    }

    void validate() const {
        if (n_classes < 2) throw ConfigError("toy task: need at least 2 classes");
        if (static_cast<int>(classes.size()) != n_classes)
            throw ConfigError("toy task: class spec count mismatch");
        if (clip_seconds <= 0.0 || sample_rate <= 0)
            throw ConfigError("toy task: invalid clip geometry");
        if (train_per_class < 2 || test_per_class < 2)
            throw ConfigError("toy task: need at least 2 clips per class per split");

        // Fundamentals must sit at least 3 default mel bins apart, otherwise
        // the front end cannot separate the classes.
        const MelConfig mc;
        const double bin_width =
            (hz_to_mel(sample_rate / 2.0) - hz_to_mel(0.0)) / (mc.n_mels + 1);
        for (std::size_t a = 0; a < classes.size(); ++a)
            for (std::size_t b = a + 1; b < classes.size(); ++b) {
                const double gap = std::abs(hz_to_mel(classes[a].fundamental_hz) -
                                            hz_to_mel(classes[b].fundamental_hz));
                if (gap < 3.0 * bin_width)
                    throw ConfigError("toy task: class fundamentals " +
                                      format_double(classes[a].fundamental_hz) + " and " +
                                      format_double(classes[b].fundamental_hz) +
                                      " are closer than 3 mel bins");
            }
    }
};

namespace detail {

inline Waveform synth_toy_clip(const ToyTaskConfig& cfg, int cls, std::uint64_t clip_seed) {
    const ToyClassSpec& spec = cfg.classes[static_cast<std::size_t>(cls)];
    Rng rng(clip_seed);
    const double f0 =
        spec.fundamental_hz * (1.0 + cfg.fundamental_jitter * rng.uniform(-1.0, 1.0));
    std::vector<double> phases(spec.harmonics.size());
    for (auto& p : phases) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double am_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    Waveform w;
    w.sample_rate = cfg.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(cfg.clip_seconds * cfg.sample_rate));
    w.samples.resize(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate;
        double s = 0.0;
        for (std::size_t h = 0; h < spec.harmonics.size(); ++h)
            s += spec.harmonics[h] *
                 std::sin(2.0 * std::numbers::pi * f0 * static_cast<double>(h + 1) * t +
                          phases[h]);
        s *= 1.0 + spec.am_depth * std::sin(2.0 * std::numbers::pi * spec.am_rate_hz * t + am_phase);
        w.samples[i] = s;
        peak = std::max(peak, std::abs(s));
    }
    const double scale = 0.65 / peak;
    for (auto& s : w.samples) s *= scale;
    return w;
}

}  // namespace detail

struct ToyDataset {
    DatasetManifest train;
    DatasetManifest test;
};

/// Synthesizes the labeled clips under out_dir/audio and writes both split
/// manifests. Fully determined by cfg.seed.
inline ToyDataset gen_toy_dataset(const ToyTaskConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "audio");

    ToyDataset ds;
    for (DatasetManifest* m : {&ds.train, &ds.test}) {
        m->dataset_id = cfg.dataset_id;
        m->base_dir = out_dir;
        for (int c = 0; c < cfg.n_classes; ++c)
            m->class_names.push_back("tone" + std::to_string(c));
    }

    for (const bool is_train : {true, false}) {
        DatasetManifest& m = is_train ? ds.train : ds.test;
        const int per_class = is_train ? cfg.train_per_class : cfg.test_per_class;
        const std::string split = is_train ? "train" : "test";
        for (int c = 0; c < cfg.n_classes; ++c) {
            for (int i = 0; i < per_class; ++i) {
                const std::uint64_t clip_seed =
                    derive_seed(cfg.seed, cfg.dataset_id, split + "-class" + std::to_string(c),
                                static_cast<std::uint64_t>(i));
                const Waveform w = detail::synth_toy_clip(cfg, c, clip_seed);
                ManifestEntry e;
                char idbuf[64];
                std::snprintf(idbuf, sizeof idbuf, "%s-c%d-%03d", split.c_str(), c, i);
                e.sample_id = idbuf;
                e.path = "audio/" + e.sample_id + ".wav";
                e.label = c;
                e.duration_s = w.duration_seconds();
                e.sample_rate = w.sample_rate;
                save_wav(w, out_dir / e.path, WavEncoding::float32);
                m.entries.push_back(std::move(e));
            }
        }
    }
    ds.train.save(out_dir / "train_manifest.txt");
    ds.test.save(out_dir / "test_manifest.txt");
    return ds;
}

}  // namespace dhauds
