#pragma once

// White-noise synthesis and the file-backed environmental noise library.
//
// A noise root is a directory with one subdirectory per noise-type name,
// each holding WAV sources. The index file is line-oriented:
// type,relative-path,duration_s

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/resample.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/textio.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

enum class WhiteNoiseKind { gaussian, uniform };

namespace detail {

inline std::vector<double> white_noise_raw(WhiteNoiseKind kind, std::size_t length, Rng& rng) {
    std::vector<double> s(length);
    if (kind == WhiteNoiseKind::gaussian) {
        for (auto& v : s) v = rng.gaussian();
    } else {
        for (auto& v : s) v = rng.uniform(-1.0, 1.0);
    }
    return s;
}

}  // namespace detail

/// I.i.d. noise normalized to unit measured power, so SNR scaling can treat
/// every kind identically.
inline Waveform gen_white_noise(WhiteNoiseKind kind, std::size_t length, int sample_rate,
                                Rng& rng) {
    if (length == 0) throw Error("gen_white_noise: length must be positive");
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples = detail::white_noise_raw(kind, length, rng);
    double power = 0.0;
    for (const double v : w.samples) power += v * v;
    power /= static_cast<double>(length);
    const double scale = 1.0 / std::sqrt(power);
    for (auto& v : w.samples) v *= scale;
    return w;
}

struct NoiseIndexEntry {
    std::string type;
    std::string relpath;
    double duration_s = 0.0;
};

struct NoiseIndex {
    std::vector<NoiseIndexEntry> entries;  // sorted by (type, relpath)

    std::string serialize() const {
        std::string out;
        for (const auto& e : entries)
            out += e.type + "," + e.relpath + "," + format_double(e.duration_s) + "\n";
        return out;
    }

    static NoiseIndex parse(const std::vector<std::string>& lines) {
        NoiseIndex idx;
        for (const std::string& raw : lines) {
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            const auto f = split(line, ',');
            if (f.size() != 3) throw ConfigError("bad noise index line '" + line + "'");
            idx.entries.push_back({f[0], f[1], parse_double(f[2], "noise index")});
        }
        return idx;
    }
};

/// Walks the type-named subdirectories under root and indexes every WAV.
/// Unreadable audio fails the scan with the file named.
inline NoiseIndex scan_noise_root(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IoError("noise root is not a directory: " + root.string());
    NoiseIndex idx;
    std::vector<fs::path> type_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) type_dirs.push_back(entry.path());
    std::sort(type_dirs.begin(), type_dirs.end());
    for (const auto& dir : type_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (ext == ".wav") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const Waveform w = load_wav(f);  // throws IoError naming the file
            if (w.samples.empty()) throw IoError("empty noise source: " + f.string());
            NoiseIndexEntry e;
            e.type = dir.filename().string();
            e.relpath = (dir.filename() / f.filename()).generic_string();
            e.duration_s = w.duration_seconds();
            idx.entries.push_back(std::move(e));
        }
    }
    return idx;
}

struct NoiseSegment {
    Waveform wave;
    std::string source_id;      // relative path of the source file
    std::uint64_t offset = 0;   // start sample in the resampled source
};

/// Read-only view over an indexed noise root. Sources are loaded per call,
/// so the library can be shared across workers without locking.
class NoiseLibrary {
public:
    NoiseLibrary() = default;
    NoiseLibrary(std::filesystem::path root, NoiseIndex index) : root_(std::move(root)) {
        for (auto& e : index.entries) by_type_[e.type].push_back(std::move(e));
        for (auto& [type, entries] : by_type_)
            std::sort(entries.begin(), entries.end(),
                      [](const auto& a, const auto& b) { return a.relpath < b.relpath; });
    }

    static NoiseLibrary open(const std::filesystem::path& root,
                             const std::filesystem::path& index_file) {
        return NoiseLibrary(root, NoiseIndex::parse(read_lines(index_file)));
    }

    bool has_type(const std::string& type) const { return by_type_.count(type) > 0; }

    std::vector<std::string> missing_types(const std::vector<std::string>& types) const {
        std::vector<std::string> missing;
        for (const auto& t : types)
            if (!has_type(t)) missing.push_back(t);
        return missing;
    }

    /// Uniform source choice, then a uniform window (tiling sources shorter
    /// than the requested length). Provenance is returned for the manifest.
    NoiseSegment pick_segment(const std::string& type, std::size_t length, int target_rate,
                              Rng& rng) const {
        const auto it = by_type_.find(type);
        if (it == by_type_.end()) throw PoolError("unknown noise type '" + type + "'");
        const auto& entries = it->second;
        const NoiseIndexEntry& chosen = entries[rng.below(entries.size())];

        Waveform src = load_wav(root_ / chosen.relpath);
        if (src.samples.empty()) throw PoolError("empty noise source " + chosen.relpath);
        if (src.sample_rate != target_rate) src = resample(src, target_rate);
        const std::size_t src_len = src.samples.size();
        if (src_len == 0) throw PoolError("noise source too short after resampling: " + chosen.relpath);

        NoiseSegment seg;
        seg.source_id = chosen.relpath;
        seg.wave.sample_rate = target_rate;
        seg.wave.samples.resize(length);
        if (src_len >= length) {
            seg.offset = rng.below(src_len - length + 1);
            std::copy_n(src.samples.begin() + static_cast<std::ptrdiff_t>(seg.offset), length,
                        seg.wave.samples.begin());
        } else {
            seg.offset = rng.below(src_len);
            for (std::size_t i = 0; i < length; ++i)
                seg.wave.samples[i] = src.samples[(seg.offset + i) % src_len];
        }
        return seg;
    }

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::map<std::string, std::vector<NoiseIndexEntry>> by_type_;
};

}  // namespace dhauds
