#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <vector>

#include "dhauds/noise.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/wave.hpp"

using namespace dhauds;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    const fs::path dir = fs::temp_directory_path() / "dhauds_wave_tests";
    fs::create_directories(dir);
    return dir;
}

Waveform sine(double freq, double seconds, int rate, double amp = 1.0) {
    Waveform w;
    w.sample_rate = rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
    return w;
}

// Raw WAV writer used to craft inputs save_wav cannot produce (stereo,
// unsupported encodings).
void write_raw_wav(const fs::path& path, std::uint16_t format, std::uint16_t channels,
                   std::uint32_t rate, std::uint16_t bits, const std::string& payload) {
    std::string b;
    b.append("RIFF");
    detail::put_u32(b, static_cast<std::uint32_t>(36 + payload.size()));
    b.append("WAVE");
    b.append("fmt ");
    detail::put_u32(b, 16);
    detail::put_u16(b, format);
    detail::put_u16(b, channels);
    detail::put_u32(b, rate);
    detail::put_u32(b, rate * channels * bits / 8);
    detail::put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
    detail::put_u16(b, bits);
    b.append("data");
    detail::put_u32(b, static_cast<std::uint32_t>(payload.size()));
    b.append(payload);
    std::ofstream out(path, std::ios::binary);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST_CASE("pcm16 constant half scale loads as 0.5") {
    const fs::path p = tmp_dir() / "half.wav";
    std::string payload;
    for (int i = 0; i < 100; ++i) detail::put_u16(payload, 16384);
    write_raw_wav(p, 1, 1, 16000, 16, payload);
    const Waveform w = load_wav(p);
    REQUIRE(w.sample_rate == 16000);
    REQUIRE(w.samples.size() == 100);
    for (const double s : w.samples) REQUIRE(s == Catch::Approx(0.5).margin(1.0 / 32768.0));
}

TEST_CASE("stereo with opposite channels averages to silence") {
    const fs::path p = tmp_dir() / "stereo.wav";
    std::string payload;
    for (int i = 0; i < 50; ++i) {
        detail::put_u16(payload, static_cast<std::uint16_t>(std::int16_t(+12000)));
        detail::put_u16(payload, static_cast<std::uint16_t>(std::int16_t(-12000)));
    }
    write_raw_wav(p, 1, 2, 8000, 16, payload);
    const Waveform w = load_wav(p);
    REQUIRE(w.samples.size() == 50);
    for (const double s : w.samples) REQUIRE(s == 0.0);
}

TEST_CASE("float32 round-trip is lossless within 1e-7") {
    // Round-trip oracle over 100 random waveforms.
    const fs::path p = tmp_dir() / "roundtrip.wav";
    Rng rng(2025);
    for (int trial = 0; trial < 100; ++trial) {
        Waveform w;
        w.sample_rate = 16000;
        w.samples.resize(200);
        for (auto& s : w.samples) s = rng.uniform(-1.0, 1.0);
        save_wav(w, p, WavEncoding::float32);
        const Waveform r = load_wav(p);
        REQUIRE(r.sample_rate == w.sample_rate);
        REQUIRE(r.samples.size() == w.samples.size());
        double max_err = 0.0;
        for (std::size_t i = 0; i < w.samples.size(); ++i)
            max_err = std::max(max_err, std::abs(r.samples[i] - w.samples[i]));
        REQUIRE(max_err < 1e-7);
    }
}

TEST_CASE("int16 zero waveform decodes to exact zeros") {
    const fs::path p = tmp_dir() / "zero.wav";
    Waveform w;
    w.sample_rate = 44100;
    w.samples.assign(64, 0.0);
    save_wav(w, p, WavEncoding::pcm16);
    for (const double s : load_wav(p).samples) REQUIRE(s == 0.0);
}

TEST_CASE("int16 clipping stores full scale") {
    const fs::path p = tmp_dir() / "clip.wav";
    Waveform w;
    w.sample_rate = 44100;
    w.samples.assign(16, 1.5);
    save_wav(w, p, WavEncoding::pcm16);
    for (const double s : load_wav(p).samples) REQUIRE(s == Catch::Approx(32767.0 / 32768.0));
}

TEST_CASE("load_wav failure modes are reported distinctly") {
    const fs::path dir = tmp_dir();
    REQUIRE_THROWS_AS(load_wav(dir / "does_not_exist.wav"), IoError);
    REQUIRE_THROWS_WITH(load_wav(dir / "does_not_exist.wav"),
                        Catch::Matchers::ContainsSubstring("cannot open"));

    const fs::path bad = dir / "bad_header.wav";
    {
        std::ofstream out(bad, std::ios::binary);
        out << "this is not a riff file at all";
    }
    REQUIRE_THROWS_WITH(load_wav(bad), Catch::Matchers::ContainsSubstring("malformed"));

    const fs::path pcm8 = dir / "pcm8.wav";
    write_raw_wav(pcm8, 1, 1, 8000, 8, std::string(32, '\x40'));
    REQUIRE_THROWS_WITH(load_wav(pcm8), Catch::Matchers::ContainsSubstring("unsupported encoding"));
}

TEST_CASE("rms_power basics") {
    Waveform zeros;
    zeros.sample_rate = 16000;
    zeros.samples.assign(100, 0.0);
    REQUIRE(rms_power(zeros) == 0.0);

    // Whole periods of a unit sine integrate to 1/2.
    const Waveform s = sine(100.0, 1.0, 16000);
    REQUIRE(rms_power(s) == Catch::Approx(0.5).margin(1e-6));

    Waveform c;
    c.sample_rate = 16000;
    c.samples.assign(10, 0.25);
    REQUIRE(rms_power(c) == Catch::Approx(0.0625));

    Waveform empty;
    empty.sample_rate = 16000;
    REQUIRE_THROWS_AS(rms_power(empty), Error);
}

TEST_CASE("power of sine plus independent noise is nearly additive") {
    const Waveform s = sine(440.0, 1.0, 16000, 0.8);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const Waveform n = gen_white_noise(WhiteNoiseKind::gaussian, s.samples.size(), 16000, rng);
        Waveform mix = s;
        for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] += n.samples[i];
        const double p_mix = rms_power(mix);
        const double err = std::abs(p_mix - rms_power(s) - rms_power(n)) / p_mix;
        REQUIRE(err < 0.02);
    }
}

TEST_CASE("temporal_shift matches direct index arithmetic") {
    Waveform w;
    w.sample_rate = 4;
    w.samples = {1, 2, 3, 4};

    const Waveform same = temporal_shift(w, ShiftDirection::right, 0.0);
    REQUIRE(same.samples == w.samples);

    const Waveform right = temporal_shift(w, ShiftDirection::right, 0.25);
    REQUIRE(right.samples == std::vector<double>{0, 1, 2, 3});

    const Waveform left = temporal_shift(w, ShiftDirection::left, 0.25);
    REQUIRE(left.samples == std::vector<double>{2, 3, 4, 0});

    REQUIRE_THROWS_AS(temporal_shift(w, ShiftDirection::left, -0.1), Error);
    REQUIRE_THROWS_AS(temporal_shift(w, ShiftDirection::left, 1.0), Error);
}

TEST_CASE("left then right shift restores an impulse away from the border") {
    Waveform w;
    w.sample_rate = 100;
    w.samples.assign(100, 0.0);
    w.samples[50] = 1.0;
    const Waveform back =
        temporal_shift(temporal_shift(w, ShiftDirection::left, 0.1), ShiftDirection::right, 0.1);
    REQUIRE(back.samples[50] == 1.0);
    for (std::size_t i = 0; i < 100; ++i) {
        if (i == 50) continue;
        REQUIRE(back.samples[i] == 0.0);
    }
}

TEST_CASE("temporal_shift preserves length and non-border sample multiset") {
    Rng rng(99);
    Waveform w;
    w.sample_rate = 1000;
    w.samples.resize(500);
    for (auto& s : w.samples) s = rng.uniform(-1.0, 1.0);

    const Waveform shifted = temporal_shift(w, ShiftDirection::right, 0.07);
    REQUIRE(shifted.samples.size() == w.samples.size());
    const std::size_t n = 35;  // round(0.07 * 500)
    std::multiset<double> kept(w.samples.begin(), w.samples.end() - n);
    std::multiset<double> moved(shifted.samples.begin() + n, shifted.samples.end());
    REQUIRE(kept == moved);
}
