#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <map>
#include <set>

#include "dhauds/manifest.hpp"
#include "support.hpp"

using namespace dhauds;
namespace fs = std::filesystem;

namespace {

/// Writes `per_class` tone clips for each of `n_classes` classes and returns
/// the manifest. Folds cycle 1..10 when with_folds is set.
DatasetManifest synth_dataset(const fs::path& dir, const std::string& id, int n_classes,
                              int per_class, bool with_folds = false, int rate = 16000) {
    fs::create_directories(dir / "audio");
    DatasetManifest m;
    m.dataset_id = id;
    m.base_dir = dir;
    for (int c = 0; c < n_classes; ++c) m.class_names.push_back("class" + std::to_string(c));
    int k = 0;
    for (int c = 0; c < n_classes; ++c) {
        for (int i = 0; i < per_class; ++i, ++k) {
            const double freq = 300.0 + 150.0 * c + 3.0 * i;
            const Waveform w = testsupport::sine(freq, 1.0, rate, 0.5);
            ManifestEntry e;
            e.sample_id = "s" + std::to_string(k);
            e.path = "audio/" + e.sample_id + ".wav";
            e.label = c;
            if (with_folds) e.fold = 1 + (k % 10);
            e.duration_s = w.duration_seconds();
            e.sample_rate = rate;
            save_wav(w, dir / e.path, WavEncoding::float32);
            m.entries.push_back(std::move(e));
        }
    }
    return m;
}

}  // namespace

TEST_CASE("dataset manifest round trips through its file") {
    const auto dir = testsupport::fresh_dir("dhauds_manifest_rt");
    const DatasetManifest m = synth_dataset(dir, "toy", 3, 4, true);
    m.save(dir / "manifest.txt");
    const DatasetManifest back = DatasetManifest::load(dir / "manifest.txt");
    REQUIRE(back.dataset_id == "toy");
    REQUIRE(back.class_names == m.class_names);
    REQUIRE(back.entries.size() == m.entries.size());
    REQUIRE(back.serialize() == m.serialize());
    REQUIRE(back.entries[5].fold == m.entries[5].fold);
}

TEST_CASE("manifest validation rejects bad content") {
    const auto dir = testsupport::fresh_dir("dhauds_manifest_bad");
    DatasetManifest m = synth_dataset(dir, "toy", 2, 2);
    m.entries[1].sample_id = m.entries[0].sample_id;
    REQUIRE_THROWS_AS(m.validate(), ConfigError);

    DatasetManifest m2 = synth_dataset(dir, "toy", 2, 2);
    m2.entries[0].label = 7;
    REQUIRE_THROWS_AS(m2.validate(), ConfigError);
}

TEST_CASE("stratified split follows the per-class rounding rule") {
    const auto dir = testsupport::fresh_dir("dhauds_split");
    const DatasetManifest m = synth_dataset(dir, "RS", 2, 10);
    const auto [train, test] = split_stratified(m, 0.7, 2025);

    std::map<int, int> train_counts, test_counts;
    for (const auto& e : train.entries) train_counts[e.label]++;
    for (const auto& e : test.entries) test_counts[e.label]++;
    for (int c = 0; c < 2; ++c) {
        REQUIRE(train_counts[c] == 7);
        REQUIRE(test_counts[c] == 3);
    }

    // exact partition
    std::set<std::string> seen;
    for (const auto& e : train.entries) seen.insert(e.sample_id);
    for (const auto& e : test.entries) REQUIRE(seen.insert(e.sample_id).second);
    REQUIRE(seen.size() == m.entries.size());
}

TEST_CASE("stratified split is deterministic and per-class even when imbalanced") {
    const auto dir = testsupport::fresh_dir("dhauds_split_imb");
    DatasetManifest m = synth_dataset(dir, "RS", 3, 9);
    // Make class sizes 9 / 6 / 3 by dropping entries.
    std::vector<ManifestEntry> kept;
    std::map<int, int> keep_limit{{0, 9}, {1, 6}, {2, 3}};
    std::map<int, int> used;
    for (const auto& e : m.entries)
        if (used[e.label]++ < keep_limit[e.label]) kept.push_back(e);
    m.entries = kept;

    const auto [t1, e1] = split_stratified(m, 0.7, 99);
    const auto [t2, e2] = split_stratified(m, 0.7, 99);
    REQUIRE(t1.serialize() == t2.serialize());
    REQUIRE(e1.serialize() == e2.serialize());

    std::map<int, int> tc;
    for (const auto& e : t1.entries) tc[e.label]++;
    REQUIRE(tc[0] == 6);  // round(6.3)
    REQUIRE(tc[1] == 4);  // round(4.2)
    REQUIRE(tc[2] == 2);  // round(2.1)

    const auto [t3, e3] = split_stratified(m, 0.7, 100);
    REQUIRE(t3.serialize() != t1.serialize());
}

TEST_CASE("stratified split guards tiny classes and bad fractions") {
    const auto dir = testsupport::fresh_dir("dhauds_split_tiny");
    DatasetManifest m = synth_dataset(dir, "RS", 2, 2);
    m.entries.pop_back();  // class 1 now has a single sample
    REQUIRE_THROWS_AS(split_stratified(m, 0.7, 1), ConfigError);
    const DatasetManifest ok = synth_dataset(dir / "ok", "RS", 2, 3);
    REQUIRE_THROWS_AS(split_stratified(ok, 0.0, 1), ConfigError);
    REQUIRE_THROWS_AS(split_stratified(ok, 1.0, 1), ConfigError);
}

TEST_CASE("fold split routes every entry") {
    const auto dir = testsupport::fresh_dir("dhauds_folds");
    const DatasetManifest m = synth_dataset(dir, "US8", 2, 10, true);
    const auto [train, test] = split_by_folds(m, {1, 2, 3, 4, 5, 6, 7}, {8, 9, 10});
    REQUIRE(train.entries.size() + test.entries.size() == m.entries.size());
    for (const auto& e : train.entries) REQUIRE(*e.fold <= 7);
    for (const auto& e : test.entries) REQUIRE(*e.fold >= 8);
}

TEST_CASE("fold split failure modes") {
    const auto dir = testsupport::fresh_dir("dhauds_folds_bad");
    DatasetManifest m = synth_dataset(dir, "US8", 2, 10, true);

    REQUIRE_THROWS_AS(split_by_folds(m, {1, 2}, {2, 3}), ConfigError);  // overlap

    // empty test side
    REQUIRE_THROWS_AS(split_by_folds(m, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {}), ConfigError);

    // entry outside both sets names the sample
    try {
        split_by_folds(m, {1, 2, 3}, {4, 5});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("fold") != std::string::npos);
        REQUIRE(std::string(e.what()).find("s") != std::string::npos);
    }

    DatasetManifest no_folds = synth_dataset(dir / "nf", "US8", 2, 3, false);
    REQUIRE_THROWS_AS(split_by_folds(no_folds, {1}, {2}), ConfigError);
}

TEST_CASE("criteria registry matches the published counts") {
    const CriteriaRegistry all = enumerate_criteria({"US8", "SC2", "VS", "RS"});
    REQUIRE(all.entries.size() == 50);
    REQUIRE(all.count_for("US8") == 8);
    REQUIRE(all.count_for("SC2") == 14);
    REQUIRE(all.count_for("VS") == 14);
    REQUIRE(all.count_for("RS") == 14);

    for (const auto& c : all.entries) {
        if (c.dataset_id == "US8")
            REQUIRE((c.corruption_id != "ENQ" && c.corruption_id != "END1" &&
                     c.corruption_id != "END2"));
        if (c.dataset_id == "SC2" && c.corruption_id == "TST")
            REQUIRE_FALSE(c.allow_slowdown);
        else
            REQUIRE(c.allow_slowdown);
    }

    const CriteriaRegistry us8 = enumerate_criteria({"US8"});
    REQUIRE(us8.entries.size() == 8);
    REQUIRE_THROWS_AS(enumerate_criteria({"ESC50"}), ConfigError);
}

TEST_CASE("benchmark build is deterministic and atomic") {
    const auto data_dir = testsupport::fresh_dir("dhauds_build_data");
    const DatasetManifest test = synth_dataset(data_dir, "SC2", 2, 6);
    const auto noise_dir = testsupport::fresh_dir("dhauds_build_noise");
    testsupport::make_noise_root(noise_dir);
    const NoiseLibrary lib(noise_dir, scan_noise_root(noise_dir));

    Criterion crit;
    crit.dataset_id = "SC2";
    crit.corruption_id = "ENQ";
    crit.level = Level::L1;

    const auto out1 = testsupport::fresh_dir("dhauds_build_out1");
    const auto out2 = testsupport::fresh_dir("dhauds_build_out2");
    const BenchmarkManifest b1 = build_benchmark(test, crit, lib, 2025, out1);
    const BenchmarkManifest b2 =
        build_benchmark(test, crit, lib, 2025, out2, CorruptionTables::defaults(), 4);

    REQUIRE(b1.serialize() == b2.serialize());
    REQUIRE(fs::exists(out1 / "manifest.txt"));

    // seeds re-derive from the header fields
    for (std::size_t i = 0; i < b1.records.size(); ++i) {
        const auto expect = derive_seed(2025, "SC2", "ENQ-L1", i);
        REQUIRE(b1.records[i].corruption.sample_seed == expect);
    }

    // audio exists and loads
    for (const auto& r : b1.records) {
        const Waveform w = load_wav(b1.resolve(r));
        REQUIRE(w.samples.size() > 0);
    }

    // different global seed changes the severity sequence
    const auto out3 = testsupport::fresh_dir("dhauds_build_out3");
    const BenchmarkManifest b3 = build_benchmark(test, crit, lib, 123456, out3);
    bool any_diff = false;
    for (std::size_t i = 0; i < b1.records.size(); ++i)
        any_diff |= b1.records[i].corruption.severity != b3.records[i].corruption.severity ||
                    b1.records[i].corruption.noise_type != b3.records[i].corruption.noise_type ||
                    b1.records[i].corruption.noise_offset != b3.records[i].corruption.noise_offset;
    REQUIRE(any_diff);
}

TEST_CASE("benchmark manifest file round trips") {
    const auto data_dir = testsupport::fresh_dir("dhauds_build_rt");
    const DatasetManifest test = synth_dataset(data_dir, "VS", 2, 3);
    const NoiseLibrary lib;
    Criterion crit{"VS", "WHN", Level::L2, true};
    const auto out = testsupport::fresh_dir("dhauds_build_rt_out");
    const BenchmarkManifest built = build_benchmark(test, crit, lib, 2025, out);
    const BenchmarkManifest loaded = BenchmarkManifest::load(out / "manifest.txt");
    REQUIRE(loaded.serialize() == built.serialize());
    REQUIRE(loaded.corruption_id == "WHN");
    REQUIRE(loaded.level == Level::L2);
    REQUIRE(loaded.global_seed == 2025);
}

TEST_CASE("US8 rejects the excluded environmental corruptions") {
    const auto data_dir = testsupport::fresh_dir("dhauds_build_us8");
    const DatasetManifest test = synth_dataset(data_dir, "US8", 2, 3);
    const NoiseLibrary lib;
    Criterion crit{"US8", "ENQ", Level::L1, true};
    const auto out = testsupport::fresh_dir("dhauds_build_us8_out");
    REQUIRE_THROWS_WITH(build_benchmark(test, crit, lib, 2025, out),
                        Catch::Matchers::ContainsSubstring("excluded combination"));
}

TEST_CASE("pool resolution failures leave no manifest") {
    const auto data_dir = testsupport::fresh_dir("dhauds_build_pool");
    const DatasetManifest test = synth_dataset(data_dir, "SC2", 2, 3);
    const NoiseLibrary empty_lib;  // resolves nothing
    Criterion crit{"SC2", "END1", Level::L1, true};
    const auto out = testsupport::fresh_dir("dhauds_build_pool_out");
    REQUIRE_THROWS_AS(build_benchmark(test, crit, empty_lib, 2025, out), PoolError);
    REQUIRE_FALSE(fs::exists(out / "manifest.txt"));
}

TEST_CASE("SC2 stretch builds never slow down") {
    const auto data_dir = testsupport::fresh_dir("dhauds_build_sc2");
    const DatasetManifest test = synth_dataset(data_dir, "SC2", 2, 4);
    const NoiseLibrary lib;
    Criterion crit{"SC2", "TST", Level::L2, false};
    const auto out = testsupport::fresh_dir("dhauds_build_sc2_out");
    const BenchmarkManifest b = build_benchmark(test, crit, lib, 2025, out);
    for (const auto& r : b.records) {
        REQUIRE(r.corruption.severity >= 8.0);
        REQUIRE(r.corruption.severity <= 12.0);
    }
}
