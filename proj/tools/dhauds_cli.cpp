// dhauds command line: builds corrupted benchmark sets, evaluates
// predictions, and drives the toy training/adaptation pipeline.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhauds/dhauds.hpp"

namespace {

using namespace dhauds;

std::filesystem::path data_root() {
    if (const char* env = std::getenv("DHAUDS_DATA_ROOT")) return env;
    return ".";
}

CorruptionTables load_tables(const std::string& tables_file) {
    if (tables_file.empty()) return CorruptionTables::defaults();
    const CorruptionTables tables = CorruptionTables::load(tables_file);
    const ValidationReport rep = validate_config(tables);
    if (!rep.pass) {
        std::string msg = "tables file " + tables_file + " failed validation:";
        for (const auto& v : rep.violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    return tables;
}

int cmd_scan_noise(const std::string& root, const std::string& out) {
    const ScanResult res = run_scan_noise(root, out);
    if (res.index.entries.empty())
        std::cerr << "warning: no WAV sources found under " << root << "\n";
    std::cout << "indexed " << res.index.entries.size() << " sources across " << res.n_types
              << " noise types -> " << out << "\n";
    return 0;
}

int cmd_split(const std::string& manifest, const std::string& mode, double frac,
              std::uint64_t seed, const std::string& train_folds,
              const std::string& test_folds, const std::string& out_train,
              const std::string& out_test) {
    const DatasetManifest m = DatasetManifest::load(manifest);
    DatasetManifest train, test;
    if (mode == "stratified") {
        std::tie(train, test) = split_stratified(m, frac, seed);
    } else if (mode == "folds") {
        auto parse_set = [](const std::string& csv) {
            std::set<int> out;
            for (const auto& tok : split(csv, ','))
                if (!tok.empty()) out.insert(static_cast<int>(parse_int(tok, "fold list")));
            return out;
        };
        std::tie(train, test) = split_by_folds(m, parse_set(train_folds), parse_set(test_folds));
    } else {
        throw ConfigError("unknown split mode '" + mode + "' (expected stratified or folds)");
    }
    train.save(out_train);
    test.save(out_test);
    std::cout << "train " << train.entries.size() << " entries -> " << out_train << "\n";
    std::cout << "test " << test.entries.size() << " entries -> " << out_test << "\n";
    return 0;
}

int cmd_criteria(const std::vector<std::string>& datasets, const std::string& out) {
    const CriteriaRegistry reg = enumerate_criteria(datasets);
    std::string text = "#dataset,criterion,allow_slowdown\n";
    for (const auto& c : reg.entries)
        text += c.dataset_id + "," + c.key() + "," + (c.allow_slowdown ? "true" : "false") + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file_atomic(out, text);
    }
    std::cout << "total " << reg.entries.size() << " criteria\n";
    return 0;
}

int cmd_build(const std::string& manifest, const std::string& criterion,
              const std::string& noise_root, const std::string& noise_index,
              std::uint64_t seed, const std::string& out, int workers,
              const std::string& tables_file, bool no_slowdown) {
    const DatasetManifest test = DatasetManifest::load(manifest);
    NoiseLibrary lib;
    if (!noise_root.empty()) {
        const std::string idx =
            noise_index.empty() ? (std::filesystem::path(noise_root) / "index.txt").string()
                                : noise_index;
        if (!std::filesystem::exists(idx)) run_scan_noise(noise_root, idx);
        lib = NoiseLibrary::open(noise_root, idx);
    }
    const BuildResult res =
        run_build(test, criterion, lib, seed, out, load_tables(tables_file), workers, no_slowdown);
    std::cout << "built " << res.manifest.records.size() << " samples -> " << out << "\n";
    std::cout << "manifest digest " << res.digest << "\n";
    std::cout << "severity histogram:";
    for (const auto& [sev, count] : res.severity_histogram)
        std::cout << " " << format_double(sev) << ":" << count;
    std::cout << "\n";
    return 0;
}

int cmd_eval(const std::string& predictions, const std::string& manifest,
             const std::string& out) {
    const PredictionSet preds = PredictionSet::parse(read_lines(predictions));
    const BenchmarkManifest bm = BenchmarkManifest::load(manifest);
    const EvalResult res = run_eval(preds, bm);
    std::string text = metrics_report_text(res);
    std::cout << text;
    std::cout << "canonical " << res.canonical << " = "
              << format_double(res.metrics.at(res.canonical)) << "\n";
    if (!out.empty()) {
        write_file_atomic(out, text);
        nlohmann::json j;
        j["dataset_id"] = bm.dataset_id;
        j["criterion"] = bm.corruption_id + "-" + to_string(bm.level);
        j["canonical"] = res.canonical;
        j["metrics"] = res.metrics;
        write_file_atomic(std::filesystem::path(out).replace_extension(".json"),
                          j.dump(2) + "\n");
    }
    return 0;
}

int cmd_silhouette(const std::string& embeddings_file) {
    const EmbeddingSet emb = EmbeddingSet::parse(read_lines(embeddings_file));
    std::cout << "silhouette=" << format_double(emb.silhouette_score()) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic heterogeneous audio corruption benchmarks and test-time adaptation"};
    app.require_subcommand(1);

    std::string manifest, criterion, noise_root, noise_index, out, tables_file;
    std::string predictions, embeddings_file, mode = "stratified";
    std::string train_folds = "1,2,3,4,5,6,7", test_folds = "8,9,10";
    std::string out_train = "train_manifest.txt", out_test = "test_manifest.txt";
    std::vector<std::string> datasets{"US8", "SC2", "VS", "RS"};
    std::uint64_t seed = 2025;
    double frac = 0.7;
    int workers = 1;
    bool no_slowdown = false;

    auto* scan = app.add_subcommand("scan-noise", "index a noise-library directory");
    scan->add_option("root", noise_root, "directory with one subdirectory per noise type")
        ->required();
    scan->add_option("-o,--out", out, "index file to write")->required();

    auto* split_cmd = app.add_subcommand("split", "split a dataset manifest");
    split_cmd->add_option("manifest", manifest)->required();
    split_cmd->add_option("--mode", mode, "stratified or folds");
    split_cmd->add_option("--frac", frac, "train fraction for stratified mode");
    split_cmd->add_option("--seed", seed, "shuffle seed for stratified mode");
    split_cmd->add_option("--train-folds", train_folds, "comma list for folds mode");
    split_cmd->add_option("--test-folds", test_folds, "comma list for folds mode");
    split_cmd->add_option("--out-train", out_train);
    split_cmd->add_option("--out-test", out_test);

    auto* criteria_cmd = app.add_subcommand("criteria", "enumerate the evaluation criteria");
    criteria_cmd->add_option("--datasets", datasets, "dataset ids");
    criteria_cmd->add_option("-o,--out", out, "write the listing here instead of stdout");

    auto* build = app.add_subcommand("build", "materialize a corrupted benchmark");
    build->add_option("manifest", manifest, "test-split dataset manifest")->required();
    build->add_option("criterion", criterion, "e.g. WHN-L1, ENQ-L2, TST-L1")->required();
    build->add_option("--noise-root", noise_root, "noise library root (EN criteria)");
    build->add_option("--noise-index", noise_index, "noise index file (defaults to root/index.txt)");
    build->add_option("--seed", seed, "global corruption seed");
    build->add_option("-o,--out", out, "output directory")->required();
    build->add_option("--workers", workers, "parallel corruption workers");
    build->add_option("--tables", tables_file, "severity/pool tables config");
    build->add_flag("--no-slowdown", no_slowdown, "drop negative stretch severities");

    auto* eval_cmd = app.add_subcommand("eval", "score a predictions file against a benchmark");
    eval_cmd->add_option("predictions", predictions)->required();
    eval_cmd->add_option("manifest", manifest, "benchmark manifest")->required();
    eval_cmd->add_option("-o,--out", out, "also write the report here");

    auto* sil = app.add_subcommand("silhouette", "silhouette score of an embeddings file");
    sil->add_option("embeddings", embeddings_file)->required();

    // toy pipeline
    auto* toy = app.add_subcommand("toy", "desk-scale dataset, training and adaptation");
    toy->require_subcommand(1);

    std::string data_dir = (data_root() / "toy_data").string();
    std::string run_dir = (data_root() / "toy_runs").string();
    std::string checkpoint, bench_dir, eval_dir, axis = "momentum", metric = "accuracy_top1";
    std::uint64_t gen_seed = 2025, init_seed = 1, shuffle_seed = 1;
    int train_per_class = 60, test_per_class = 40;
    double lr = 0.02, momentum = 0.9;
    int epochs = 30;
    std::size_t batch_size = 32;
    double lr_c = 0.01, lr_ratio = 0.5, adapt_momentum = 0.7, lambda = 1.0, alpha = 2.0;
    double w_nnm = 1.0, w_em = 1.0, w_ge = 1.0, max_shift = 0.1;
    int adapt_epochs = 20;
    bool allow_small_batch = false;
    std::string consistency = "literal";

    auto* gen = toy->add_subcommand("gen", "generate the synthetic dataset");
    gen->add_option("-o,--out", data_dir, "dataset directory");
    gen->add_option("--seed", gen_seed);
    gen->add_option("--train-per-class", train_per_class);
    gen->add_option("--test-per-class", test_per_class);

    auto* train_cmd = toy->add_subcommand("train", "train the source model");
    train_cmd->add_option("--data", data_dir, "dataset directory from toy gen");
    train_cmd->add_option("-o,--out", run_dir, "run directory");
    train_cmd->add_option("--lr", lr);
    train_cmd->add_option("--momentum", momentum);
    train_cmd->add_option("--epochs", epochs);
    train_cmd->add_option("--batch", batch_size);
    train_cmd->add_option("--seed", shuffle_seed, "shuffle seed");
    train_cmd->add_option("--init-seed", init_seed, "parameter init seed");

    auto add_adapt_options = [&](CLI::App* cmd) {
        cmd->add_option("--model", checkpoint, "source checkpoint")->required();
        cmd->add_option("--bench", bench_dir, "adaptation benchmark directory")->required();
        cmd->add_option("--eval", eval_dir, "evaluation benchmark directory")->required();
        cmd->add_option("-o,--out", run_dir, "run directory");
        cmd->add_option("--lr-c", lr_c, "classifier learning rate");
        cmd->add_option("--lr-ratio", lr_ratio, "feature-extractor rate ratio");
        cmd->add_option("--momentum", adapt_momentum);
        cmd->add_option("--batch", batch_size);
        cmd->add_flag("--allow-small-batch", allow_small_batch);
        cmd->add_option("--epochs", adapt_epochs);
        cmd->add_option("--shuffle-seed", shuffle_seed);
        cmd->add_option("--lambda", lambda);
        cmd->add_option("--w-nnm", w_nnm);
        cmd->add_option("--w-em", w_em);
        cmd->add_option("--w-ge", w_ge);
        cmd->add_option("--alpha", alpha);
        cmd->add_option("--consistency", consistency, "literal or per_sample_l2");
        cmd->add_option("--max-shift", max_shift, "view shift fraction cap");
        cmd->add_option("--metric", metric);
    };

    auto* adapt_cmd = toy->add_subcommand("adapt", "run test-time adaptation");
    add_adapt_options(adapt_cmd);

    auto* stability = toy->add_subcommand("stability", "paired momentum or lr comparisons");
    add_adapt_options(stability);
    stability->add_option("--axis", axis, "momentum or lr");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed()) return cmd_scan_noise(noise_root, out);
        if (split_cmd->parsed())
            return cmd_split(manifest, mode, frac, seed, train_folds, test_folds, out_train,
                             out_test);
        if (criteria_cmd->parsed()) return cmd_criteria(datasets, out);
        if (build->parsed())
            return cmd_build(manifest, criterion, noise_root, noise_index, seed, out, workers,
                             tables_file, no_slowdown);
        if (eval_cmd->parsed()) return cmd_eval(predictions, manifest, out);
        if (sil->parsed()) return cmd_silhouette(embeddings_file);

        if (gen->parsed()) {
            ToyTaskConfig cfg = ToyTaskConfig::defaults();
            cfg.seed = gen_seed;
            cfg.train_per_class = train_per_class;
            cfg.test_per_class = test_per_class;
            const ToyDataset ds = gen_toy_dataset(cfg, data_dir);
            std::cout << "generated " << ds.train.entries.size() << " train / "
                      << ds.test.entries.size() << " test clips -> " << data_dir << "\n";
            return 0;
        }
        if (train_cmd->parsed()) {
            TrainConfig hp{lr, momentum, epochs, batch_size, shuffle_seed};
            const ToyTrainResult res = run_toy_train(data_dir, run_dir, hp, init_seed);
            std::cout << "final loss " << format_double(res.report.final_loss) << "\n";
            std::cout << "clean test top1 " << format_double(res.report.clean_test_top1) << "\n";
            std::cout << "checkpoint -> " << res.checkpoint.string() << "\n";
            return 0;
        }
        if (adapt_cmd->parsed() || stability->parsed()) {
            AdaptConfig cfg;
            cfg.loss.lambda = lambda;
            cfg.loss.w_nnm = w_nnm;
            cfg.loss.w_em = w_em;
            cfg.loss.w_ge = w_ge;
            cfg.loss.alpha = alpha;
            cfg.loss.consistency = parse_consistency_mode(consistency);
            cfg.opt.lr_c = lr_c;
            cfg.opt.lr_ratio = lr_ratio;
            cfg.opt.momentum = adapt_momentum;
            cfg.batch_size = batch_size;
            cfg.allow_small_batch = allow_small_batch;
            cfg.epochs = adapt_epochs;
            cfg.shuffle_seed = shuffle_seed;
            cfg.max_shift_frac = max_shift;
            cfg.metric = metric;
            if (batch_size < 32 && allow_small_batch)
                std::cerr << "warning: batch size below 32 destabilizes the batch-level "
                             "objectives; proceeding\n";

            if (adapt_cmd->parsed()) {
                const ToyAdaptResult res =
                    run_toy_adapt(checkpoint, bench_dir, eval_dir, run_dir, cfg);
                std::cout << "baseline " << format_double(res.curve.baseline()) << " final "
                          << format_double(res.curve.final_value()) << " ("
                          << res.curve.metric << ")\n";
                std::cout << "curve -> " << res.curve_file.string() << "\n";
                return 0;
            }
            const StabilityResult res = run_toy_stability(checkpoint, bench_dir, eval_dir,
                                                          run_dir, parse_stability_axis(axis),
                                                          cfg);
            std::cout << res.stable.name << " drawdown "
                      << format_double(res.stable.curve.drawdown()) << "\n";
            std::cout << res.aggressive.name << " drawdown "
                      << format_double(res.aggressive.curve.drawdown()) << "\n";
            std::cout << "expectation " << (res.expectation_met() ? "met" : "not met")
                      << "; summary -> " << res.summary_file.string() << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const PoolError& e) {
        std::cerr << "pool error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
