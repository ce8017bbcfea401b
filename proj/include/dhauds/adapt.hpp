#pragma once

// The adaptation engine: two-view augmentation, source training, the
// epoch loop that optimizes the combined objective on an unlabeled
// corrupted set, and per-epoch evaluation on a frozen evaluation set.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/losses.hpp"
#include "dhauds/manifest.hpp"
#include "dhauds/metrics.hpp"
#include "dhauds/model.hpp"
#include "dhauds/optimizer.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/textio.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

/// Two independently shifted views per clip: a left shift for the first
/// view, a right shift for the second, fractions drawn from (0, max_frac].
inline std::pair<std::vector<Waveform>, std::vector<Waveform>> make_views(
    const std::vector<Waveform>& batch, Rng& rng, double max_frac = 0.1) {
    if (batch.empty()) throw Error("make_views: empty batch");
    std::vector<Waveform> left, right;
    left.reserve(batch.size());
    right.reserve(batch.size());
    for (const Waveform& w : batch) {
        // (0, max_frac]: flip the half-open unit draw
        const double f_l = max_frac * (1.0 - rng.uniform01());
        const double f_r = max_frac * (1.0 - rng.uniform01());
        left.push_back(temporal_shift(w, ShiftDirection::left, f_l));
        right.push_back(temporal_shift(w, ShiftDirection::right, f_r));
    }
    return {std::move(left), std::move(right)};
}

inline double metric_value(const std::string& name, const PredictionSet& p) {
    if (name == "accuracy_top1") return accuracy_top1(p);
    if (name == "macro_roc_auc") return macro_roc_auc(p);
    if (name == "f1_aggregated")
        return f1_aggregated(confusion_counts(p.argmax_labels(), p.labels, p.c));
    if (name == "accuracy_ovr")
        return accuracy_ovr(confusion_counts(p.argmax_labels(), p.labels, p.c));
    throw ConfigError("unknown metric '" + name + "'");
}

struct Predictions {
    PredictionSet preds;
    Mat embeddings;  // N x D
};

/// Inference over a list of clips, batched; never touches model statistics.
inline Predictions predict_waves(ToyModel& model, const std::vector<Waveform>& waves,
                                 const std::vector<int>& labels,
                                 const std::vector<std::string>& class_names,
                                 std::size_t batch_size = 64) {
    const std::size_t n = waves.size();
    Predictions out;
    out.preds.n = n;
    out.preds.c = static_cast<std::size_t>(model.config().n_classes);
    out.preds.labels = labels;
    out.preds.class_names = class_names;
    out.preds.probs.resize(n * out.preds.c);
    out.embeddings = Mat(n, static_cast<std::size_t>(model.config().embed_dim));
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        const std::vector<Waveform> batch(waves.begin() + static_cast<std::ptrdiff_t>(start),
                                          waves.begin() + static_cast<std::ptrdiff_t>(stop));
        const ToyModel::Output o = model.forward_waves(batch, ForwardMode::eval);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            for (std::size_t j = 0; j < out.preds.c; ++j)
                out.preds.probs[(start + i) * out.preds.c + j] = o.probs.at(i, j);
            for (std::size_t d = 0; d < out.embeddings.cols; ++d)
                out.embeddings.at(start + i, d) = o.embeddings.at(i, d);
        }
    }
    return out;
}

struct LoadedSet {
    std::vector<Waveform> waves;
    std::vector<int> labels;
    std::vector<std::string> class_names;
    std::string dataset_id;
};

inline LoadedSet load_benchmark_audio(const BenchmarkManifest& bm) {
    LoadedSet s;
    s.class_names = bm.class_names;
    s.dataset_id = bm.dataset_id;
    for (const auto& r : bm.records) {
        s.waves.push_back(load_wav(bm.resolve(r)));
        s.labels.push_back(r.entry.label);
    }
    return s;
}

inline LoadedSet load_dataset_audio(const DatasetManifest& m) {
    LoadedSet s;
    s.class_names = m.class_names;
    s.dataset_id = m.dataset_id;
    for (const auto& e : m.entries) {
        s.waves.push_back(load_wav(m.resolve(e)));
        s.labels.push_back(e.label);
    }
    return s;
}

inline Predictions predict_set(ToyModel& model, const LoadedSet& s, std::size_t batch_size = 64) {
    return predict_waves(model, s.waves, s.labels, s.class_names, batch_size);
}

struct CurvePoint {
    int epoch = 0;
    double value = 0.0;
};

struct AdaptationCurve {
    std::string metric;
    std::vector<CurvePoint> points;  // epoch 0 is the pre-adaptation baseline

    double baseline() const { return points.front().value; }
    double final_value() const { return points.back().value; }
    double peak() const {
        double p = points.front().value;
        for (const auto& pt : points) p = std::max(p, pt.value);
        return p;
    }
    /// Peak minus final: the post-improvement degradation measure.
    double drawdown() const { return peak() - final_value(); }

    std::string serialize() const {
        std::string out = "#epoch," + metric + "\n";
        for (const auto& pt : points)
            out += std::to_string(pt.epoch) + "," + format_double(pt.value) + "\n";
        return out;
    }

    static AdaptationCurve parse(const std::vector<std::string>& lines) {
        AdaptationCurve c;
        for (const std::string& raw : lines) {
            const std::string line = trim(raw);
            if (line.empty()) continue;
            if (line[0] == '#') {
                const auto f = split(line.substr(1), ',');
                if (f.size() == 2) c.metric = f[1];
                continue;
            }
            const auto f = split(line, ',');
            if (f.size() != 2) throw ConfigError("bad curve line '" + line + "'");
            c.points.push_back({static_cast<int>(parse_int(f[0], "curve epoch")),
                                parse_double(f[1], "curve value")});
        }
        return c;
    }
};

struct AdaptConfig {
    LossConfig loss;
    OptimizerConfig opt;  // lr_ratio 0.5, momentum 0.7 by default
    std::size_t batch_size = 64;
    bool allow_small_batch = false;  // entropy terms need batches >= 32
    int epochs = 20;
    std::uint64_t shuffle_seed = 1;
    double max_shift_frac = 0.1;
    std::string metric = "accuracy_top1";

    void validate() const {
        loss.validate();
        opt.validate();
        if (epochs < 0) throw ConfigError("adapt: epochs must be >= 0");
        if (batch_size < 32 && !allow_small_batch)
            throw ConfigError(
                "adapt: batch_size below 32 destabilizes the batch-level objectives; pass "
                "allow_small_batch to override");
        if (!(max_shift_frac > 0.0 && max_shift_frac < 1.0))
            throw ConfigError("adapt: max_shift_frac must be in (0, 1)");
    }
};

/// Unsupervised adaptation on the benchmark set with per-epoch evaluation on
/// the frozen evaluation set. Epoch 0 records the pre-adaptation metric.
/// The whole run is a pure function of (model state, sets, config).
inline AdaptationCurve adapt(ToyModel& model, const LoadedSet& benchmark,
                             const LoadedSet& eval_set, const AdaptConfig& cfg) {
    cfg.validate();
    if (benchmark.waves.empty() || eval_set.waves.empty())
        throw Error("adapt: empty benchmark or evaluation set");

    BlrOptimizer opt(cfg.opt, model.fe_size(), model.classifier_size());
    AdaptationCurve curve;
    curve.metric = cfg.metric;

    auto evaluate = [&]() {
        const Predictions p = predict_set(model, eval_set, cfg.batch_size);
        return metric_value(cfg.metric, p.preds);
    };
    curve.points.push_back({0, evaluate()});

    Rng rng(cfg.shuffle_seed);
    std::vector<std::size_t> order(benchmark.waves.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<Waveform> batch;
            batch.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k)
                batch.push_back(benchmark.waves[order[k]]);

            const auto [views_l, views_r] = make_views(batch, rng, cfg.max_shift_frac);

            ToyModel::Cache cache_l, cache_r;
            const ToyModel::Output out_l =
                model.forward_waves(views_l, ForwardMode::adapt, &cache_l);
            const ToyModel::Output out_r =
                model.forward_waves(views_r, ForwardMode::adapt, &cache_r);

            const PairLossValue loss = combined_loss(out_l.probs, out_r.probs, cfg.loss);
            if (!std::isfinite(loss.value))
                throw Error("adapt: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(start / cfg.batch_size));

            ToyModel::Grads g = model.backward(cache_l, loss.grad_l);
            const ToyModel::Grads g_r = model.backward(cache_r, loss.grad_r);
            for (std::size_t i = 0; i < g.fe.size(); ++i) g.fe[i] += g_r.fe[i];
            for (std::size_t i = 0; i < g.classifier.size(); ++i)
                g.classifier[i] += g_r.classifier[i];

            std::vector<double> p_fe = model.flat_fe();
            std::vector<double> p_c = model.flat_classifier();
            opt.step(p_fe, p_c, g.fe, g.classifier);
            model.set_flat_fe(p_fe);
            model.set_flat_classifier(p_c);
        }
        curve.points.push_back({epoch, evaluate()});
    }
    return curve;
}

struct TrainConfig {
    double lr = 0.02;
    double momentum = 0.9;
    int epochs = 30;
    std::size_t batch_size = 32;
    std::uint64_t seed = 7;
};

struct TrainReport {
    double final_loss = 0.0;
    int epochs_run = 0;
    double clean_test_top1 = std::numeric_limits<double>::quiet_NaN();
};

/// Supervised cross-entropy training with the same two-group stepper the
/// adaptation loop uses, run at lr_fe = lr_c.
inline TrainReport train_source(ToyModel& model, const LoadedSet& train, const TrainConfig& hp,
                                const LoadedSet* clean_test = nullptr) {
    if (train.waves.empty()) throw Error("train_source: empty training set");
    OptimizerConfig oc;
    oc.lr_c = hp.lr;
    oc.lr_ratio = 1.0;  // single learning rate during source training
    oc.momentum = hp.momentum;
    BlrOptimizer opt(oc, model.fe_size(), model.classifier_size());

    const auto C = static_cast<std::size_t>(model.config().n_classes);
    Rng rng(hp.seed);
    std::vector<std::size_t> order(train.waves.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainReport report;
    for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
            const std::size_t stop = std::min(order.size(), start + hp.batch_size);
            std::vector<Waveform> batch;
            std::vector<int> labels;
            for (std::size_t k = start; k < stop; ++k) {
                batch.push_back(train.waves[order[k]]);
                labels.push_back(train.labels[order[k]]);
            }
            ToyModel::Cache cache;
            const ToyModel::Output out = model.forward_waves(batch, ForwardMode::adapt, &cache);

            const double inv_b = 1.0 / static_cast<double>(batch.size());
            double loss = 0.0;
            Mat dlogits(batch.size(), C);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const auto y = static_cast<std::size_t>(labels[i]);
                loss -= inv_b * std::log(std::max(out.probs.at(i, y), 1e-300));
                for (std::size_t j = 0; j < C; ++j)
                    dlogits.at(i, j) = inv_b * (out.probs.at(i, j) - (j == y ? 1.0 : 0.0));
            }
            if (!std::isfinite(loss))
                throw Error("train_source: non-finite loss at epoch " + std::to_string(epoch));
            epoch_loss += loss;
            ++batches;

            const ToyModel::Grads g = model.backward_from_dlogits(cache, dlogits);
            std::vector<double> p_fe = model.flat_fe();
            std::vector<double> p_c = model.flat_classifier();
            opt.step(p_fe, p_c, g.fe, g.classifier);
            model.set_flat_fe(p_fe);
            model.set_flat_classifier(p_c);
        }
        report.final_loss = epoch_loss / static_cast<double>(batches);
        report.epochs_run = epoch;
    }

    if (clean_test != nullptr && !clean_test->waves.empty())
        report.clean_test_top1 = accuracy_top1(predict_set(model, *clean_test).preds);
    return report;
}

/// Objective evaluation used by grad_check: scalar value plus analytic
/// parameter gradients for the current model state.
using LossEval = std::pair<double, ToyModel::Grads>;

/// Central finite differences of a scalar objective against the analytic
/// parameter gradients, on a random coordinate subsample. The objective must
/// run its forwards in frozen mode so batch statistics stay fixed across
/// probes.
template <typename LossFn>
double grad_check(ToyModel& model, LossFn&& loss_with_grads, std::size_t n_coords,
                  std::uint64_t seed, double h = 1e-5) {
    const ToyModel::Grads analytic = loss_with_grads(model).second;
    std::vector<double> p_fe = model.flat_fe();
    std::vector<double> p_c = model.flat_classifier();

    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t probe = 0; probe < n_coords; ++probe) {
        const bool in_fe = rng.below(2) == 0;
        auto& params = in_fe ? p_fe : p_c;
        const auto& grads = in_fe ? analytic.fe : analytic.classifier;
        const std::size_t idx = rng.below(params.size());

        const double orig = params[idx];
        auto eval_at = [&](double v) {
            params[idx] = v;
            if (in_fe)
                model.set_flat_fe(p_fe);
            else
                model.set_flat_classifier(p_c);
            return loss_with_grads(model).first;
        };
        const double up = eval_at(orig + h);
        const double down = eval_at(orig - h);
        params[idx] = orig;
        if (in_fe)
            model.set_flat_fe(p_fe);
        else
            model.set_flat_classifier(p_c);

        const double fd = (up - down) / (2.0 * h);
        const double g = grads[idx];
        const double denom = std::max({std::abs(fd), std::abs(g), 1e-6});
        worst = std::max(worst, std::abs(fd - g) / denom);
    }
    return worst;
}

}  // namespace dhauds
