#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "dhauds/corrupt.hpp"
#include "dhauds/noise.hpp"
#include "support.hpp"

using namespace dhauds;
using testsupport::sine;

TEST_CASE("gaussian white noise has unit power and near-zero mean") {
    Rng rng(2025);
    const Waveform w = gen_white_noise(WhiteNoiseKind::gaussian, 1000000, 16000, rng);
    double mean = 0.0, power = 0.0;
    for (const double s : w.samples) {
        mean += s;
        power += s * s;
    }
    mean /= 1e6;
    power /= 1e6;
    REQUIRE(std::abs(mean) < 0.01);
    REQUIRE(power > 0.99);
    REQUIRE(power < 1.01);
}

TEST_CASE("raw uniform noise has power one third") {
    Rng rng(1);
    const auto raw = detail::white_noise_raw(WhiteNoiseKind::uniform, 1000000, rng);
    double power = 0.0;
    for (const double s : raw) power += s * s;
    power /= 1e6;
    REQUIRE(power == Catch::Approx(1.0 / 3.0).margin(0.005));
}

TEST_CASE("white noise is reproducible and rejects empty length") {
    Rng a(7), b(7);
    const Waveform wa = gen_white_noise(WhiteNoiseKind::uniform, 512, 16000, a);
    const Waveform wb = gen_white_noise(WhiteNoiseKind::uniform, 512, 16000, b);
    REQUIRE(wa.samples == wb.samples);
    Rng c(7);
    REQUIRE_THROWS_AS(gen_white_noise(WhiteNoiseKind::gaussian, 0, 16000, c), Error);
}

TEST_CASE("mix_at_snr hits the requested ratio exactly") {
    const Waveform clean = sine(440.0, 1.0, 16000, 0.5);
    Rng rng(3);
    const Waveform noise = gen_white_noise(WhiteNoiseKind::gaussian, clean.samples.size(),
                                           16000, rng);

    SECTION("snr 0 equalizes powers") {
        const Waveform mixed = mix_at_snr(clean, noise, 0.0);
        Waveform scaled = mixed;
        for (std::size_t i = 0; i < scaled.samples.size(); ++i)
            scaled.samples[i] -= clean.samples[i];
        REQUIRE(rms_power(scaled) == Catch::Approx(rms_power(clean)).epsilon(1e-9));
    }

    SECTION("gain squared follows the closed form") {
        // g^2 = P_clean / (P_noise * 10^(snr/10)); with P_clean = 0.5 and
        // unit-power noise at 10 dB this is 0.05.
        Waveform c;
        c.sample_rate = 16000;
        c.samples.assign(noise.samples.size(), std::sqrt(0.5));
        const Waveform mixed = mix_at_snr(c, noise, 10.0);
        const double g =
            (mixed.samples[0] - c.samples[0]) / noise.samples[0];
        const double expect_g2 = rms_power(c) / (rms_power(noise) * std::pow(10.0, 1.0));
        REQUIRE(g * g == Catch::Approx(expect_g2).epsilon(1e-9));
        REQUIRE(g * g == Catch::Approx(0.05).epsilon(1e-6));
    }

    SECTION("component SNR recomputes within 1e-6 dB across random cases") {
        Rng trial_rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            Waveform c;
            c.sample_rate = 16000;
            c.samples.resize(2000);
            for (auto& s : c.samples) s = trial_rng.uniform(-0.9, 0.9);
            Rng nrng(trial_rng.next_u64());
            const Waveform n = gen_white_noise(
                trial % 2 ? WhiteNoiseKind::gaussian : WhiteNoiseKind::uniform, 2000, 16000,
                nrng);
            const double snr = trial_rng.uniform(-5.0, 20.0);
            const Waveform mixed = mix_at_snr(c, n, snr);
            Waveform part = mixed;
            for (std::size_t i = 0; i < part.samples.size(); ++i)
                part.samples[i] -= c.samples[i];
            const double measured = 10.0 * std::log10(rms_power(c) / rms_power(part));
            REQUIRE(std::abs(measured - snr) < 1e-6);
        }
    }

    SECTION("errors") {
        Waveform shorter = clean;
        shorter.samples.resize(100);
        REQUIRE_THROWS_AS(mix_at_snr(clean, shorter, 5.0), Error);
        Waveform silent;
        silent.sample_rate = 16000;
        silent.samples.assign(clean.samples.size(), 0.0);
        REQUIRE_THROWS_AS(mix_at_snr(silent, noise, 5.0), Error);
        REQUIRE_THROWS_AS(mix_at_snr(clean, silent, 5.0), Error);
    }
}

TEST_CASE("noise segments window long sources and tile short ones") {
    const auto root = testsupport::fresh_dir("dhauds_noise_root");
    testsupport::make_noise_root(root, 16000, 2.0, 0.4);
    const NoiseIndex idx = scan_noise_root(root);
    const NoiseLibrary lib(root, idx);

    SECTION("whole source when lengths match") {
        // src1 is 0.4 s = 6400 samples at 16 kHz
        Rng rng(5);
        bool saw_short = false;
        for (int i = 0; i < 16 && !saw_short; ++i) {
            const NoiseSegment seg = lib.pick_segment("HOME", 6400, 16000, rng);
            if (seg.source_id.find("src1") != std::string::npos) {
                saw_short = true;
                REQUIRE(seg.offset == 0);
                REQUIRE(seg.wave.samples.size() == 6400);
            }
        }
        REQUIRE(saw_short);
    }

    SECTION("tiling reproduces modular indexing") {
        Rng rng(6);
        const NoiseSegment seg = lib.pick_segment("HOME", 40000, 16000, rng);
        const Waveform src = load_wav(root / seg.source_id);
        REQUIRE(src.samples.size() < 40000);
        for (std::size_t i = 0; i < seg.wave.samples.size(); ++i) {
            const double expect = src.samples[(seg.offset + i) % src.samples.size()];
            REQUIRE(seg.wave.samples[i] == expect);
        }
    }

    SECTION("same seed picks the same source and offset") {
        Rng a(9), b(9);
        const NoiseSegment sa = lib.pick_segment("STREET", 8000, 16000, a);
        const NoiseSegment sb = lib.pick_segment("STREET", 8000, 16000, b);
        REQUIRE(sa.source_id == sb.source_id);
        REQUIRE(sa.offset == sb.offset);
        REQUIRE(sa.wave.samples == sb.wave.samples);
    }

    SECTION("unknown type fails") {
        Rng rng(1);
        REQUIRE_THROWS_AS(lib.pick_segment("NOT_A_TYPE", 100, 16000, rng), PoolError);
    }

    SECTION("sources are resampled to the clean clip's rate") {
        Rng a(12), b(12);
        const NoiseSegment s1 = lib.pick_segment("CAFE", 11025, 22050, a);
        const NoiseSegment s2 = lib.pick_segment("CAFE", 11025, 22050, b);
        REQUIRE(s1.wave.sample_rate == 22050);
        REQUIRE(s1.wave.samples.size() == 11025);
        REQUIRE(s1.wave.samples == s2.wave.samples);  // resampling is deterministic
        REQUIRE(rms_power(s1.wave) > 0.0);
    }
}

TEST_CASE("noise index round trips through its file format") {
    const auto root = testsupport::fresh_dir("dhauds_noise_idx");
    testsupport::make_noise_root(root);
    const NoiseIndex idx = scan_noise_root(root);
    REQUIRE_FALSE(idx.entries.empty());
    const NoiseIndex back = NoiseIndex::parse(split(idx.serialize(), '\n'));
    REQUIRE(back.serialize() == idx.serialize());
}

TEST_CASE("corrupt_sample WHN-L1 stays on grid and pool") {
    const auto tables = CorruptionTables::defaults();
    const CorruptionSpec spec = make_spec(tables, "WHN", Level::L1);
    const Waveform clean = sine(500.0, 1.0, 16000, 0.6);
    const NoiseLibrary empty_lib;

    std::set<double> severities;
    std::set<std::string> types;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto seed = derive_seed(2025, "toy", "WHN-L1", i);
        const auto [out, rec] = corrupt_sample(clean, spec, empty_lib, seed, "s" + std::to_string(i));
        REQUIRE(out.samples.size() == clean.samples.size());
        REQUIRE((rec.severity == 6.0 || rec.severity == 6.5 || rec.severity == 7.0));
        REQUIRE((rec.noise_type == "Gaussian" || rec.noise_type == "Random"));
        severities.insert(rec.severity);
        types.insert(rec.noise_type);
        // SNR fidelity from the stored components
        Waveform noise_part = out;
        for (std::size_t k = 0; k < noise_part.samples.size(); ++k)
            noise_part.samples[k] -= clean.samples[k];
        const double snr = 10.0 * std::log10(rms_power(clean) / rms_power(noise_part));
        REQUIRE(std::abs(snr - rec.severity) < 1e-6);
    }
    REQUIRE(severities.size() == 3);
    REQUIRE(types.size() == 2);
}

TEST_CASE("corrupt_sample ENSC-L2 uses only the six clips") {
    const auto root = testsupport::fresh_dir("dhauds_noise_ensc");
    testsupport::make_noise_root(root);
    const NoiseLibrary lib(root, scan_noise_root(root));
    const auto tables = CorruptionTables::defaults();
    const CorruptionSpec spec = make_spec(tables, "ENSC", Level::L2);
    const Waveform clean = sine(700.0, 1.0, 16000, 0.6);

    const std::set<std::string> allowed{"exercise_bike", "running_tap",      "white_noise",
                                        "pink_noise",    "doing_the_dishes", "dude_miaowing"};
    for (std::uint64_t i = 0; i < 60; ++i) {
        const auto [out, rec] =
            corrupt_sample(clean, spec, lib, derive_seed(1, "t", "ENSC-L2", i));
        REQUIRE(allowed.count(rec.noise_type) == 1);
        REQUIRE_FALSE(rec.noise_source_id.empty());
    }
}

TEST_CASE("corrupt_sample is deterministic in the sample seed") {
    const auto root = testsupport::fresh_dir("dhauds_noise_det");
    testsupport::make_noise_root(root);
    const NoiseLibrary lib(root, scan_noise_root(root));
    const auto tables = CorruptionTables::defaults();
    const Waveform clean = sine(350.0, 1.0, 16000, 0.5);

    for (const std::string id : {"WHN", "ENQ", "TST", "PSH"}) {
        const CorruptionSpec spec = make_spec(tables, id, Level::L2);
        const auto [o1, r1] = corrupt_sample(clean, spec, lib, 987654321u, "x");
        const auto [o2, r2] = corrupt_sample(clean, spec, lib, 987654321u, "x");
        REQUIRE(o1.samples == o2.samples);
        REQUIRE(r1.severity == r2.severity);
        REQUIRE(r1.noise_type == r2.noise_type);
        REQUIRE(r1.noise_source_id == r2.noise_source_id);
        REQUIRE(r1.noise_offset == r2.noise_offset);
    }
}

TEST_CASE("slow-down suppression removes negative stretch severities") {
    const auto tables = CorruptionTables::defaults();
    const CorruptionSpec spec = make_spec(tables, "TST", Level::L2, /*allow_slowdown=*/false);
    REQUIRE(spec.severity_grid.values == std::vector<double>{8, 9, 10, 11, 12});

    const NoiseLibrary lib;
    const Waveform clean = sine(440.0, 1.0, 16000, 0.5);
    for (std::uint64_t i = 0; i < 40; ++i) {
        const auto [out, rec] = corrupt_sample(clean, spec, lib, 1000 + i);
        REQUIRE(rec.severity >= 8.0);
        // faster tempo only: output strictly shorter
        REQUIRE(out.samples.size() < clean.samples.size());
    }
}

TEST_CASE("stretch duration contract holds for corrupt_sample") {
    const auto tables = CorruptionTables::defaults();
    const CorruptionSpec spec = make_spec(tables, "TST", Level::L1);
    const NoiseLibrary lib;
    const Waveform clean = sine(440.0, 1.0, 16000, 0.5);
    const std::size_t hop = detail::vocoder_window(16000) / 4;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto [out, rec] = corrupt_sample(clean, spec, lib, 555 + i);
        const double expect = static_cast<double>(clean.samples.size()) /
                              (1.0 + rec.severity / 100.0);
        REQUIRE(std::abs(static_cast<double>(out.samples.size()) - expect) <=
                static_cast<double>(hop));
    }
}
