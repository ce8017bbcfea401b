#pragma once

// Dataset manifests, stratified and fold splits, the criteria registry and
// the benchmark builder that materializes corrupted sets to disk.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dhauds/corrupt.hpp"
#include "dhauds/errors.hpp"
#include "dhauds/noise.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/tables.hpp"
#include "dhauds/textio.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

struct ManifestEntry {
    std::string sample_id;
    std::string path;  // relative to the manifest's base_dir unless absolute
    int label = 0;
    std::optional<int> fold;
    double duration_s = 0.0;
    int sample_rate = 0;
};

struct DatasetManifest {
    std::string dataset_id;
    std::vector<std::string> class_names;
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir;  // resolution root for relative paths

    int n_classes() const { return static_cast<int>(class_names.size()); }

    std::filesystem::path resolve(const ManifestEntry& e) const {
        const std::filesystem::path p(e.path);
        return p.is_absolute() ? p : base_dir / p;
    }

    void validate() const {
        if (dataset_id.empty()) throw ConfigError("manifest: missing dataset id");
        if (class_names.empty()) throw ConfigError("manifest: missing class names");
        std::set<std::string> ids;
        for (const auto& e : entries) {
            if (!ids.insert(e.sample_id).second)
                throw ConfigError("manifest: duplicate sample id '" + e.sample_id + "'");
            if (e.label < 0 || e.label >= n_classes())
                throw ConfigError("manifest: label out of range for '" + e.sample_id + "'");
            if (e.fold && (*e.fold < 1 || *e.fold > 10))
                throw ConfigError("manifest: fold out of [1,10] for '" + e.sample_id + "'");
        }
    }

    std::string serialize() const {
        std::string out = "#dhauds dataset v1\n";
        out += "id=" + dataset_id + "\n";
        out += "classes=";
        for (std::size_t i = 0; i < class_names.size(); ++i)
            out += (i ? "," : "") + class_names[i];
        out += "\n#sample_id,path,label,fold,duration_s,sample_rate\n";
        for (const auto& e : entries) {
            out += e.sample_id + "," + e.path + "," + std::to_string(e.label) + ",";
            if (e.fold) out += std::to_string(*e.fold);
            out += "," + format_double(e.duration_s) + "," + std::to_string(e.sample_rate) + "\n";
        }
        return out;
    }

    static DatasetManifest parse(const std::vector<std::string>& lines,
                                 std::filesystem::path base_dir = {}) {
        DatasetManifest m;
        m.base_dir = std::move(base_dir);
        for (const std::string& raw : lines) {
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.rfind("id=", 0) == 0) {
                m.dataset_id = line.substr(3);
            } else if (line.rfind("classes=", 0) == 0) {
                m.class_names = split(line.substr(8), ',');
            } else {
                const auto f = split(line, ',');
                if (f.size() != 6) throw ConfigError("bad manifest entry '" + line + "'");
                ManifestEntry e;
                e.sample_id = f[0];
                e.path = f[1];
                e.label = static_cast<int>(parse_int(f[2], "manifest label"));
                if (!f[3].empty()) e.fold = static_cast<int>(parse_int(f[3], "manifest fold"));
                e.duration_s = parse_double(f[4], "manifest duration");
                e.sample_rate = static_cast<int>(parse_int(f[5], "manifest rate"));
                m.entries.push_back(std::move(e));
            }
        }
        m.validate();
        return m;
    }

    static DatasetManifest load(const std::filesystem::path& path) {
        return parse(read_lines(path), path.parent_path());
    }

    void save(const std::filesystem::path& path) const {
        write_file_atomic(path, serialize());
    }
};

/// Per-class seeded shuffle; train gets round-half-up(frac * n_c) entries.
/// Output order follows the input manifest for diff stability.
inline std::pair<DatasetManifest, DatasetManifest> split_stratified(const DatasetManifest& m,
                                                                    double train_frac,
                                                                    std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw ConfigError("split: train fraction must be in (0, 1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < m.entries.size(); ++i)
        by_class[m.entries[i].label].push_back(i);

    std::vector<bool> in_train(m.entries.size(), false);
    Rng rng(seed);
    for (auto& [label, idx] : by_class) {
        if (idx.size() < 2)
            throw ConfigError("split: class " + std::to_string(label) + " has fewer than 2 samples");
        rng.shuffle(idx);
        const auto n_train = static_cast<std::size_t>(
            std::floor(train_frac * static_cast<double>(idx.size()) + 0.5));
        for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = true;
    }

    DatasetManifest train = m, test = m;
    train.entries.clear();
    test.entries.clear();
    for (std::size_t i = 0; i < m.entries.size(); ++i)
        (in_train[i] ? train : test).entries.push_back(m.entries[i]);
    return {std::move(train), std::move(test)};
}

/// Routes entries by fold membership; an entry outside both sets is an error.
inline std::pair<DatasetManifest, DatasetManifest> split_by_folds(const DatasetManifest& m,
                                                                  const std::set<int>& train_folds,
                                                                  const std::set<int>& test_folds) {
    for (const int f : train_folds)
        if (test_folds.count(f))
            throw ConfigError("split: fold " + std::to_string(f) + " in both sets");
    DatasetManifest train = m, test = m;
    train.entries.clear();
    test.entries.clear();
    for (const auto& e : m.entries) {
        if (!e.fold)
            throw ConfigError("split: sample '" + e.sample_id + "' has no fold");
        if (train_folds.count(*e.fold)) {
            train.entries.push_back(e);
        } else if (test_folds.count(*e.fold)) {
            test.entries.push_back(e);
        } else {
            throw ConfigError("split: sample '" + e.sample_id + "' has fold " +
                              std::to_string(*e.fold) + " outside both sets");
        }
    }
    if (train.entries.empty()) throw ConfigError("split: empty train set");
    if (test.entries.empty()) throw ConfigError("split: empty test set");
    return {std::move(train), std::move(test)};
}

struct Criterion {
    std::string dataset_id;
    std::string corruption_id;  // WHN | ENQ | END1 | END2 | ENSC | PSH | TST
    Level level = Level::L1;
    bool allow_slowdown = true;

    std::string key() const { return corruption_id + "-" + to_string(level); }
};

struct CriteriaRegistry {
    std::vector<Criterion> entries;

    std::size_t count_for(const std::string& dataset_id) const {
        std::size_t n = 0;
        for (const auto& c : entries) n += c.dataset_id == dataset_id;
        return n;
    }
};

/// US8 overlaps the environmental corpora, so it drops ENQ/END1/END2.
/// One-second clips (SC2) suppress the slowing-down stretch values.
inline bool dataset_excludes(const std::string& dataset_id, const std::string& corruption_id) {
    return dataset_id == "US8" &&
           (corruption_id == "ENQ" || corruption_id == "END1" || corruption_id == "END2");
}

inline CriteriaRegistry enumerate_criteria(const std::vector<std::string>& datasets) {
    static const std::set<std::string> known{"US8", "SC2", "VS", "RS"};
    CriteriaRegistry reg;
    for (const auto& ds : datasets) {
        if (!known.count(ds)) throw ConfigError("unknown dataset id '" + ds + "'");
        for (const auto& cid : corruption_ids()) {
            if (dataset_excludes(ds, cid)) continue;
            for (const Level level : {Level::L1, Level::L2}) {
                Criterion c;
                c.dataset_id = ds;
                c.corruption_id = cid;
                c.level = level;
                c.allow_slowdown = !(ds == "SC2" && cid == "TST");
                reg.entries.push_back(std::move(c));
            }
        }
    }
    return reg;
}

struct BenchmarkRecord {
    ManifestEntry entry;      // duration/rate describe the corrupted audio
    CorruptionRecord corruption;
    std::string corrupted_path;  // relative to the benchmark directory
};

struct BenchmarkManifest {
    std::string dataset_id;
    std::vector<std::string> class_names;
    std::string corruption_id;
    Level level = Level::L1;
    std::uint64_t global_seed = 0;
    std::vector<BenchmarkRecord> records;
    std::filesystem::path base_dir;

    int n_classes() const { return static_cast<int>(class_names.size()); }

    std::filesystem::path resolve(const BenchmarkRecord& r) const {
        const std::filesystem::path p(r.corrupted_path);
        return p.is_absolute() ? p : base_dir / p;
    }

    std::string serialize() const {
        std::string out = "#dhauds benchmark v1\n";
        out += "id=" + dataset_id + "\n";
        out += "classes=";
        for (std::size_t i = 0; i < class_names.size(); ++i)
            out += (i ? "," : "") + class_names[i];
        out += "\ncriterion=" + corruption_id + "-" + to_string(level) + "\n";
        out += "global_seed=" + std::to_string(global_seed) + "\n";
        out +=
            "#sample_id,path,label,fold,duration_s,sample_rate,family,level,noise_type,"
            "severity,seed,source_id,offset,corrupted_path\n";
        for (const auto& r : records) {
            const auto& e = r.entry;
            const auto& c = r.corruption;
            out += e.sample_id + "," + e.path + "," + std::to_string(e.label) + ",";
            if (e.fold) out += std::to_string(*e.fold);
            out += "," + format_double(e.duration_s) + "," + std::to_string(e.sample_rate);
            out += "," + to_string(c.family) + "," + to_string(c.level) + "," + c.noise_type;
            out += "," + format_double(c.severity) + "," + std::to_string(c.sample_seed);
            out += "," + c.noise_source_id + "," + std::to_string(c.noise_offset);
            out += "," + r.corrupted_path + "\n";
        }
        return out;
    }

    static BenchmarkManifest parse(const std::vector<std::string>& lines,
                                   std::filesystem::path base_dir = {}) {
        BenchmarkManifest m;
        m.base_dir = std::move(base_dir);
        for (const std::string& raw : lines) {
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.rfind("id=", 0) == 0) {
                m.dataset_id = line.substr(3);
            } else if (line.rfind("classes=", 0) == 0) {
                m.class_names = split(line.substr(8), ',');
            } else if (line.rfind("criterion=", 0) == 0) {
                const auto parts = split(line.substr(10), '-');
                if (parts.size() < 2) throw ConfigError("bad criterion '" + line + "'");
                m.level = parse_level(parts.back());
                m.corruption_id = line.substr(10, line.size() - 10 - 3);
            } else if (line.rfind("global_seed=", 0) == 0) {
                m.global_seed = parse_u64(line.substr(12), "global_seed");
            } else {
                const auto f = split(line, ',');
                if (f.size() != 14) throw ConfigError("bad benchmark record '" + line + "'");
                BenchmarkRecord r;
                r.entry.sample_id = f[0];
                r.entry.path = f[1];
                r.entry.label = static_cast<int>(parse_int(f[2], "label"));
                if (!f[3].empty()) r.entry.fold = static_cast<int>(parse_int(f[3], "fold"));
                r.entry.duration_s = parse_double(f[4], "duration");
                r.entry.sample_rate = static_cast<int>(parse_int(f[5], "rate"));
                r.corruption.sample_id = f[0];
                r.corruption.family = parse_family(f[6]);
                r.corruption.level = parse_level(f[7]);
                r.corruption.noise_type = f[8];
                r.corruption.severity = parse_double(f[9], "severity");
                r.corruption.sample_seed = parse_u64(f[10], "seed");
                r.corruption.noise_source_id = f[11];
                r.corruption.noise_offset = parse_u64(f[12], "offset");
                r.corrupted_path = f[13];
                m.records.push_back(std::move(r));
            }
        }
        return m;
    }

    static BenchmarkManifest load(const std::filesystem::path& path) {
        return parse(read_lines(path), path.parent_path());
    }
};

inline std::string content_digest(const std::string& bytes) {
    const std::uint64_t h = detail::fnv1a64(bytes);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Materializes a corrupted copy of the test set under out_dir. Audio files
/// are written first (content-addressed names); the manifest is written last
/// and atomically, so its presence marks a complete build. Identical inputs
/// give identical manifests for any worker count.
inline BenchmarkManifest build_benchmark(const DatasetManifest& test, const Criterion& criterion,
                                         const NoiseLibrary& lib, std::uint64_t global_seed,
                                         const std::filesystem::path& out_dir,
                                         const CorruptionTables& tables = CorruptionTables::defaults(),
                                         int workers = 1) {
    namespace fs = std::filesystem;
    if (dataset_excludes(test.dataset_id, criterion.corruption_id))
        throw ConfigError("excluded combination: " + test.dataset_id + " with " +
                          criterion.corruption_id);
    const CorruptionSpec spec =
        make_spec(tables, criterion.corruption_id, criterion.level, criterion.allow_slowdown);
    if (spec.family == Family::EN && spec.noise_pool) {  // WHN types are synthesized
        const auto missing = lib.missing_types(spec.noise_pool->noise_types);
        if (!missing.empty()) {
            std::string msg = "noise library cannot resolve:";
            for (const auto& t : missing) msg += " " + t;
            throw PoolError(msg);
        }
    }

    fs::create_directories(out_dir / "audio");

    BenchmarkManifest bm;
    bm.dataset_id = test.dataset_id;
    bm.class_names = test.class_names;
    bm.corruption_id = criterion.corruption_id;
    bm.level = criterion.level;
    bm.global_seed = global_seed;
    bm.base_dir = out_dir;
    bm.records.resize(test.entries.size());

    const std::string corruption_key = criterion.key();
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= test.entries.size()) return;
            try {
                const ManifestEntry& src = test.entries[i];
                const std::uint64_t seed =
                    derive_seed(global_seed, test.dataset_id, corruption_key, i);
                const Waveform clean = load_wav(test.resolve(src));
                auto [corrupted, rec] = corrupt_sample(clean, spec, lib, seed, src.sample_id);

                std::string payload;
                payload.reserve(corrupted.samples.size() * 4);
                for (const double s : corrupted.samples) {
                    const float v = static_cast<float>(s);
                    char raw[4];
                    std::memcpy(raw, &v, 4);
                    payload.append(raw, 4);
                }
                const std::string rel = "audio/" + content_digest(payload) + ".wav";
                save_wav(corrupted, out_dir / rel, WavEncoding::float32);

                BenchmarkRecord r;
                r.entry = src;
                r.entry.duration_s = corrupted.duration_seconds();
                r.entry.sample_rate = corrupted.sample_rate;
                r.corruption = std::move(rec);
                r.corrupted_path = rel;
                bm.records[i] = std::move(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    write_file_atomic(out_dir / "manifest.txt", bm.serialize());
    return bm;
}

}  // namespace dhauds
