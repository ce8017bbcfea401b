#pragma once

// Operator-level workflows behind the CLI subcommands. Every run writes its
// resolved configuration next to its outputs so reruns are exact.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dhauds/adapt.hpp"
#include "dhauds/corrupt.hpp"
#include "dhauds/manifest.hpp"
#include "dhauds/metrics.hpp"
#include "dhauds/model.hpp"
#include "dhauds/noise.hpp"
#include "dhauds/tables.hpp"
#include "dhauds/textio.hpp"
#include "dhauds/toytask.hpp"

namespace dhauds {

/// Ordered key=value run configuration, expanded defaults included.
class RunConfig {
public:
    void set(const std::string& key, const std::string& value) {
        entries_.emplace_back(key, value);
    }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    template <typename Int, typename = std::enable_if_t<std::is_integral_v<Int>>>
    void set(const std::string& key, Int value) {
        set(key, std::to_string(value));
    }

    std::string serialize() const {
        std::string out = "#dhauds run config v1\n";
        for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
        return out;
    }

    void write(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct ScanResult {
    NoiseIndex index;
    std::size_t n_types = 0;
};

inline ScanResult run_scan_noise(const std::filesystem::path& root,
                                 const std::filesystem::path& out_index) {
    ScanResult res;
    res.index = scan_noise_root(root);
    std::set<std::string> types;
    for (const auto& e : res.index.entries) types.insert(e.type);
    res.n_types = types.size();
    write_file_atomic(out_index, res.index.serialize());
    return res;
}

struct BuildResult {
    BenchmarkManifest manifest;
    std::string digest;                     // of the manifest text
    std::map<double, std::size_t> severity_histogram;
};

inline BuildResult run_build(const DatasetManifest& test, const std::string& criterion_key,
                             const NoiseLibrary& lib, std::uint64_t global_seed,
                             const std::filesystem::path& out_dir, const CorruptionTables& tables,
                             int workers, bool force_no_slowdown = false) {
    const auto parts = split(criterion_key, '-');
    if (parts.size() < 2) throw ConfigError("criterion must look like WHN-L1, got '" +
                                            criterion_key + "'");
    Criterion crit;
    crit.dataset_id = test.dataset_id;
    crit.level = parse_level(parts.back());
    crit.corruption_id = criterion_key.substr(0, criterion_key.size() - 3);
    (void)family_of(crit.corruption_id);  // validates the id
    crit.allow_slowdown =
        !force_no_slowdown && !(test.dataset_id == "SC2" && crit.corruption_id == "TST");

    BuildResult res;
    res.manifest = build_benchmark(test, crit, lib, global_seed, out_dir, tables, workers);
    res.digest = content_digest(res.manifest.serialize());
    for (const auto& r : res.manifest.records) res.severity_histogram[r.corruption.severity]++;

    RunConfig rc;
    rc.set("command", std::string("build"));
    rc.set("dataset_id", test.dataset_id);
    rc.set("criterion", criterion_key);
    rc.set("allow_slowdown", std::string(crit.allow_slowdown ? "true" : "false"));
    rc.set("global_seed", global_seed);
    rc.set("workers", workers);
    rc.set("noise_root", lib.root().string());
    rc.set("manifest_digest", res.digest);
    rc.write(out_dir / "run_config.txt");
    return res;
}

struct EvalResult {
    std::map<std::string, double> metrics;
    std::string canonical;
};

/// Validates predictions against the benchmark (count, class count, labels
/// in record order) and computes every applicable metric.
inline EvalResult run_eval(const PredictionSet& preds, const BenchmarkManifest& bm) {
    preds.validate();
    if (preds.n != bm.records.size())
        throw ConfigError("predictions have " + std::to_string(preds.n) + " rows, benchmark has " +
                          std::to_string(bm.records.size()));
    if (preds.c != static_cast<std::size_t>(bm.n_classes()))
        throw ConfigError("predictions have " + std::to_string(preds.c) + " classes, benchmark has " +
                          std::to_string(bm.n_classes()));
    for (std::size_t i = 0; i < preds.n; ++i)
        if (preds.labels[i] != bm.records[i].entry.label)
            throw ConfigError("label mismatch at row " + std::to_string(i));

    EvalResult res;
    res.metrics = compute_all_metrics(preds);
    res.canonical = canonical_metric_for(bm.dataset_id);
    return res;
}

inline std::string metrics_report_text(const EvalResult& res) {
    std::string out;
    out += "canonical=" + res.canonical + "\n";
    for (const auto& [k, v] : res.metrics) out += k + "=" + format_double(v) + "\n";
    return out;
}

struct ToyTrainResult {
    TrainReport report;
    std::filesystem::path checkpoint;
};

inline ToyTrainResult run_toy_train(const std::filesystem::path& data_dir,
                                    const std::filesystem::path& out_dir, const TrainConfig& hp,
                                    std::uint64_t init_seed) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const DatasetManifest train_m = DatasetManifest::load(data_dir / "train_manifest.txt");
    const DatasetManifest test_m = DatasetManifest::load(data_dir / "test_manifest.txt");
    const LoadedSet train = load_dataset_audio(train_m);
    const LoadedSet test = load_dataset_audio(test_m);

    ToyModelConfig mc;
    mc.n_classes = train_m.n_classes();
    ToyModel model(mc);
    model.init_params(init_seed);

    ToyTrainResult res;
    res.report = train_source(model, train, hp, &test);
    res.checkpoint = out_dir / "model.ckpt";
    model.save_checkpoint(res.checkpoint);

    RunConfig rc;
    rc.set("command", std::string("toy train"));
    rc.set("data_dir", data_dir.string());
    rc.set("init_seed", init_seed);
    rc.set("lr", hp.lr);
    rc.set("momentum", hp.momentum);
    rc.set("epochs", hp.epochs);
    rc.set("batch_size", hp.batch_size);
    rc.set("shuffle_seed", hp.seed);
    rc.set("final_loss", res.report.final_loss);
    rc.set("clean_test_top1", res.report.clean_test_top1);
    rc.write(out_dir / "run_config.txt");
    return res;
}

struct ToyAdaptResult {
    AdaptationCurve curve;
    std::filesystem::path curve_file;
    EvalResult final_eval;
};

inline void write_adapt_run_config(const std::filesystem::path& path, const AdaptConfig& cfg,
                                   const std::string& note = {}) {
    RunConfig rc;
    rc.set("command", std::string("toy adapt"));
    if (!note.empty()) rc.set("note", note);
    rc.set("lambda", cfg.loss.lambda);
    rc.set("w_nnm", cfg.loss.w_nnm);
    rc.set("w_em", cfg.loss.w_em);
    rc.set("w_ge", cfg.loss.w_ge);
    rc.set("alpha", cfg.loss.alpha);
    rc.set("consistency", to_string(cfg.loss.consistency));
    rc.set("lr_c", cfg.opt.lr_c);
    rc.set("lr_ratio", cfg.opt.lr_ratio);
    rc.set("momentum", cfg.opt.momentum);
    rc.set("batch_size", cfg.batch_size);
    rc.set("allow_small_batch", std::string(cfg.allow_small_batch ? "true" : "false"));
    rc.set("epochs", cfg.epochs);
    rc.set("shuffle_seed", cfg.shuffle_seed);
    rc.set("max_shift_frac", cfg.max_shift_frac);
    rc.set("metric", cfg.metric);
    rc.write(path);
}

/// Adapts a checkpointed model on a built benchmark, evaluating per epoch on
/// the frozen evaluation build. Writes the curve, the adapted checkpoint,
/// final predictions and embeddings.
inline ToyAdaptResult run_toy_adapt(const std::filesystem::path& checkpoint,
                                    const std::filesystem::path& bench_dir,
                                    const std::filesystem::path& eval_dir,
                                    const std::filesystem::path& out_dir, AdaptConfig cfg,
                                    const std::string& curve_name = "curve.csv") {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    ToyModel model = ToyModel::load_checkpoint(checkpoint);
    const BenchmarkManifest bench_m = BenchmarkManifest::load(bench_dir / "manifest.txt");
    const BenchmarkManifest eval_m = BenchmarkManifest::load(eval_dir / "manifest.txt");
    if (bench_m.global_seed == eval_m.global_seed)
        throw ConfigError("adaptation and evaluation benchmarks must come from distinct seeds");
    const LoadedSet bench = load_benchmark_audio(bench_m);
    const LoadedSet eval_set = load_benchmark_audio(eval_m);

    ToyAdaptResult res;
    res.curve = adapt(model, bench, eval_set, cfg);
    res.curve_file = out_dir / curve_name;
    write_file_atomic(res.curve_file, res.curve.serialize());
    model.save_checkpoint(out_dir / "adapted.ckpt");

    const Predictions preds = predict_set(model, eval_set, cfg.batch_size);
    write_file_atomic(out_dir / "predictions.txt", preds.preds.serialize());
    EmbeddingSet emb;
    emb.n = preds.embeddings.rows;
    emb.dim = preds.embeddings.cols;
    emb.vectors = preds.embeddings.data;
    emb.labels = eval_set.labels;
    write_file_atomic(out_dir / "embeddings.txt", emb.serialize());

    res.final_eval = run_eval(preds.preds, eval_m);
    write_file_atomic(out_dir / "metrics.txt", metrics_report_text(res.final_eval));
    write_adapt_run_config(out_dir / "run_config.txt", cfg);
    return res;
}

enum class StabilityAxis { momentum, lr };

inline StabilityAxis parse_stability_axis(const std::string& s) {
    if (s == "momentum") return StabilityAxis::momentum;
    if (s == "lr") return StabilityAxis::lr;
    throw ConfigError("unknown stability axis '" + s + "' (expected momentum or lr)");
}

struct StabilityLeg {
    std::string name;
    double setting = 0.0;
    AdaptationCurve curve;
};

struct StabilityResult {
    StabilityAxis axis = StabilityAxis::momentum;
    StabilityLeg stable, aggressive;  // low-momentum/BLR vs high-momentum/SLR
    std::filesystem::path summary_file;

    /// Soft expectation: the stable setting's drawdown should not exceed the
    /// aggressive one's. Reported, not asserted.
    bool expectation_met() const {
        return stable.curve.drawdown() <= aggressive.curve.drawdown();
    }
};

/// Two paired adaptations that differ in exactly one hyperparameter:
/// momentum 0.7 vs 0.9, or lr_ratio 0.5 (binary rate) vs 1.0 (single rate).
inline StabilityResult run_toy_stability(const std::filesystem::path& checkpoint,
                                         const std::filesystem::path& bench_dir,
                                         const std::filesystem::path& eval_dir,
                                         const std::filesystem::path& out_dir, StabilityAxis axis,
                                         AdaptConfig base_cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    StabilityResult res;
    res.axis = axis;
    auto leg = [&](const std::string& name, double setting) {
        AdaptConfig cfg = base_cfg;
        if (axis == StabilityAxis::momentum)
            cfg.opt.momentum = setting;
        else
            cfg.opt.lr_ratio = setting;
        const ToyAdaptResult r =
            run_toy_adapt(checkpoint, bench_dir, eval_dir, out_dir / name, cfg, "curve.csv");
        return StabilityLeg{name, setting, r.curve};
    };

    if (axis == StabilityAxis::momentum) {
        res.stable = leg("momentum_0.7", 0.7);
        res.aggressive = leg("momentum_0.9", 0.9);
    } else {
        res.stable = leg("blr_ratio_0.5", 0.5);
        res.aggressive = leg("slr_ratio_1.0", 1.0);
    }

    std::string summary = "#setting,value,baseline,peak,final,drawdown\n";
    for (const StabilityLeg* l : {&res.stable, &res.aggressive}) {
        summary += l->name + "," + format_double(l->setting) + "," +
                   format_double(l->curve.baseline()) + "," + format_double(l->curve.peak()) +
                   "," + format_double(l->curve.final_value()) + "," +
                   format_double(l->curve.drawdown()) + "\n";
    }
    summary += std::string("#expectation stable_drawdown<=aggressive_drawdown: ") +
               (res.expectation_met() ? "met" : "not met") + "\n";
    res.summary_file = out_dir / "stability_summary.csv";
    write_file_atomic(res.summary_file, summary);
    return res;
}

}  // namespace dhauds
