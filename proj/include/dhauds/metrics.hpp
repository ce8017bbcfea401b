#pragma once

// Evaluation metrics: one-vs-rest confusion counts, threshold-swept ROC-AUC
// with trapezoidal area, pooled F1 and accuracy, top-1 accuracy, and the
// silhouette score used for embedding analysis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/textio.hpp"

namespace dhauds {

struct PredictionSet {
    std::vector<double> probs;  // N x C, row-major
    std::vector<int> labels;    // length N
    std::size_t n = 0;
    std::size_t c = 0;
    std::vector<std::string> class_names;  // optional, size c when present

    double prob(std::size_t i, std::size_t j) const { return probs[i * c + j]; }

    void validate() const {
        if (n < 1 || c < 2) throw ConfigError("predictions: need N >= 1 and C >= 2");
        if (probs.size() != n * c || labels.size() != n)
            throw ConfigError("predictions: shape mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                const double p = prob(i, j);
                if (!(p >= 0.0 && p <= 1.0))
                    throw ConfigError("predictions: probability outside [0, 1]");
                row += p;
            }
            if (std::abs(row - 1.0) > 1e-5)
                throw ConfigError("predictions: row " + std::to_string(i) + " sums to " +
                                  format_double(row));
            if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c)
                throw ConfigError("predictions: label out of range");
        }
    }

    /// Argmax per row; ties break toward the lowest class index.
    std::vector<int> argmax_labels() const {
        std::vector<int> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < c; ++j)
                if (prob(i, j) > prob(i, best)) best = j;
            out[i] = static_cast<int>(best);
        }
        return out;
    }

    std::string serialize() const {
        std::string out = "#dhauds predictions v1\n";
        out += "n=" + std::to_string(n) + "\n";
        out += "c=" + std::to_string(c) + "\n";
        if (!class_names.empty()) {
            out += "classes=";
            for (std::size_t i = 0; i < class_names.size(); ++i)
                out += (i ? "," : "") + class_names[i];
            out += "\n";
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) out += format_double(prob(i, j)) + ",";
            out += std::to_string(labels[i]) + "\n";
        }
        return out;
    }

    static PredictionSet parse(const std::vector<std::string>& lines) {
        PredictionSet p;
        for (const std::string& raw : lines) {
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.rfind("n=", 0) == 0) {
                p.n = static_cast<std::size_t>(parse_int(line.substr(2), "predictions n"));
            } else if (line.rfind("c=", 0) == 0) {
                p.c = static_cast<std::size_t>(parse_int(line.substr(2), "predictions c"));
            } else if (line.rfind("classes=", 0) == 0) {
                p.class_names = split(line.substr(8), ',');
            } else {
                const auto f = split(line, ',');
                if (f.size() != p.c + 1)
                    throw ConfigError("prediction row has " + std::to_string(f.size() - 1) +
                                      " probabilities, expected " + std::to_string(p.c));
                for (std::size_t j = 0; j < p.c; ++j)
                    p.probs.push_back(parse_double(f[j], "prediction"));
                p.labels.push_back(static_cast<int>(parse_int(f.back(), "prediction label")));
            }
        }
        if (p.labels.size() != p.n) throw ConfigError("predictions: row count mismatch with n=");
        p.validate();
        return p;
    }
};

struct ConfusionCounts {
    std::vector<long long> tp, fp, fn, tn;
    std::size_t n = 0;

    std::size_t n_classes() const { return tp.size(); }
};

inline ConfusionCounts confusion_counts(const std::vector<int>& pred_labels,
                                        const std::vector<int>& labels, std::size_t n_classes) {
    if (pred_labels.size() != labels.size()) throw Error("confusion: size mismatch");
    ConfusionCounts cc;
    cc.n = labels.size();
    cc.tp.assign(n_classes, 0);
    cc.fp.assign(n_classes, 0);
    cc.fn.assign(n_classes, 0);
    cc.tn.assign(n_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i], yh = pred_labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes || yh < 0 ||
            static_cast<std::size_t>(yh) >= n_classes)
            throw Error("confusion: label out of range");
        for (std::size_t k = 0; k < n_classes; ++k) {
            const bool is_y = static_cast<std::size_t>(y) == k;
            const bool is_yh = static_cast<std::size_t>(yh) == k;
            if (is_y && is_yh)
                ++cc.tp[k];
            else if (!is_y && is_yh)
                ++cc.fp[k];
            else if (is_y && !is_yh)
                ++cc.fn[k];
            else
                ++cc.tn[k];
        }
    }
    return cc;
}

struct RocPoint {
    double fpr = 0.0, tpr = 0.0;
};

/// Threshold sweep over distinct score values (descending); tied scores are
/// grouped at one threshold. Starts at (0,0) and ends at (1,1).
inline std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                       const std::vector<int>& binary_labels) {
    if (scores.size() != binary_labels.size()) throw Error("roc: size mismatch");
    long long pos = 0, neg = 0;
    for (const int y : binary_labels) (y ? pos : neg)++;
    if (pos == 0 || neg == 0)
        throw Error("roc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> curve{{0.0, 0.0}};
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double v = scores[order[i]];
        while (i < order.size() && scores[order[i]] == v) {
            (binary_labels[order[i]] ? tp : fp)++;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                         static_cast<double>(tp) / static_cast<double>(pos)});
    }
    return curve;
}

/// Trapezoidal area under the grouped ROC. Equals the Mann-Whitney statistic
/// with half credit for ties.
inline double roc_auc_class(const std::vector<double>& scores,
                            const std::vector<int>& binary_labels) {
    const auto curve = roc_curve(scores, binary_labels);
    double auc = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i)
        auc += (curve[i + 1].fpr - curve[i].fpr) * (curve[i + 1].tpr + curve[i].tpr) / 2.0;
    return auc;
}

/// Unweighted mean of one-vs-rest AUCs, scored by each class's probability
/// column. Every class must appear among the labels.
inline double macro_roc_auc(const PredictionSet& p) {
    std::vector<int> present(p.c, 0);
    for (const int y : p.labels) present[static_cast<std::size_t>(y)] = 1;
    std::string missing;
    for (std::size_t k = 0; k < p.c; ++k)
        if (!present[k]) missing += (missing.empty() ? "" : ", ") + std::to_string(k);
    if (!missing.empty()) throw Error("macro_roc_auc: classes absent from labels: " + missing);

    double sum = 0.0;
    std::vector<double> scores(p.n);
    std::vector<int> binary(p.n);
    for (std::size_t k = 0; k < p.c; ++k) {
        for (std::size_t i = 0; i < p.n; ++i) {
            scores[i] = p.prob(i, k);
            binary[i] = static_cast<std::size_t>(p.labels[i]) == k ? 1 : 0;
        }
        sum += roc_auc_class(scores, binary);
    }
    return sum / static_cast<double>(p.c);
}

/// F1 over class-summed counts (pooled precision and recall). For
/// single-label predictions the pooled FP and FN coincide, so this equals
/// top-1 accuracy.
inline double f1_aggregated(const ConfusionCounts& cc) {
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t k = 0; k < cc.n_classes(); ++k) {
        tp += cc.tp[k];
        fp += cc.fp[k];
        fn += cc.fn[k];
    }
    if (tp + fp == 0) throw Error("f1: TP + FP is zero");
    if (tp + fn == 0) throw Error("f1: TP + FN is zero");
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

/// Conventional macro F1 (per-class F1 averaged), provided alongside the
/// pooled variant; classes with empty denominators contribute 0.
inline double f1_macro_per_class(const ConfusionCounts& cc) {
    double sum = 0.0;
    for (std::size_t k = 0; k < cc.n_classes(); ++k) {
        const double denom = static_cast<double>(2 * cc.tp[k] + cc.fp[k] + cc.fn[k]);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(cc.tp[k]) / denom : 0.0;
    }
    return sum / static_cast<double>(cc.n_classes());
}

/// Pooled one-vs-rest accuracy: (TP + TN) / (TP + TN + FP + FN), denominator
/// N * C for single-label predictions.
inline double accuracy_ovr(const ConfusionCounts& cc) {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t k = 0; k < cc.n_classes(); ++k) {
        tp += cc.tp[k];
        fp += cc.fp[k];
        fn += cc.fn[k];
        tn += cc.tn[k];
    }
    if (cc.n == 0) throw Error("accuracy: empty input");
    return static_cast<double>(tp + tn) / static_cast<double>(tp + tn + fp + fn);
}

inline double accuracy_top1(const PredictionSet& p) {
    const std::vector<int> pred = p.argmax_labels();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.n; ++i) correct += pred[i] == p.labels[i];
    return static_cast<double>(correct) / static_cast<double>(p.n);
}

/// Mean silhouette over all points, Euclidean distance. a = mean intra-class
/// distance excluding self, b = smallest mean distance to another class;
/// singleton-class points score 0.
inline double silhouette(const std::vector<double>& embeddings, std::size_t n, std::size_t dim,
                         const std::vector<int>& labels) {
    if (n < 2) throw Error("silhouette: need at least 2 points");
    if (embeddings.size() != n * dim || labels.size() != n)
        throw Error("silhouette: shape mismatch");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    if (by_class.size() < 2) throw Error("silhouette: need at least 2 classes");

    auto dist = [&](std::size_t a, std::size_t b) {
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = embeddings[a * dim + d] - embeddings[b * dim + d];
            acc += diff * diff;
        }
        return std::sqrt(acc);
    };

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& own = by_class[labels[i]];
        if (own.size() == 1) continue;  // contributes 0
        double a = 0.0;
        for (const std::size_t j : own)
            if (j != i) a += dist(i, j);
        a /= static_cast<double>(own.size() - 1);

        double b = std::numeric_limits<double>::infinity();
        for (const auto& [cls, members] : by_class) {
            if (cls == labels[i]) continue;
            double mean = 0.0;
            for (const std::size_t j : members) mean += dist(i, j);
            mean /= static_cast<double>(members.size());
            b = std::min(b, mean);
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

/// All applicable metrics for a prediction set, keyed by stable names.
inline std::map<std::string, double> compute_all_metrics(const PredictionSet& p) {
    p.validate();
    const ConfusionCounts cc = confusion_counts(p.argmax_labels(), p.labels, p.c);
    std::map<std::string, double> out;
    out["accuracy_top1"] = accuracy_top1(p);
    out["accuracy_ovr"] = accuracy_ovr(cc);
    out["f1_aggregated"] = f1_aggregated(cc);
    out["f1_macro_per_class"] = f1_macro_per_class(cc);
    bool all_present = true;
    std::vector<int> present(p.c, 0);
    for (const int y : p.labels) present[static_cast<std::size_t>(y)] = 1;
    for (const int x : present) all_present &= x == 1;
    if (all_present) out["macro_roc_auc"] = macro_roc_auc(p);
    return out;
}

/// Metric highlighted in reports for each dataset family.
inline std::string canonical_metric_for(const std::string& dataset_id) {
    if (dataset_id == "RS") return "macro_roc_auc";
    if (dataset_id == "US8") return "f1_aggregated";
    return "accuracy_top1";  // SC2, VS and everything else balanced
}

/// Labeled embedding vectors, the silhouette analysis input.
struct EmbeddingSet {
    std::vector<double> vectors;  // N x D, row-major
    std::vector<int> labels;
    std::size_t n = 0;
    std::size_t dim = 0;

    std::string serialize() const {
        std::string out = "#dhauds embeddings v1\n";
        out += "n=" + std::to_string(n) + "\n";
        out += "d=" + std::to_string(dim) + "\n";
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) out += format_double(vectors[i * dim + d]) + ",";
            out += std::to_string(labels[i]) + "\n";
        }
        return out;
    }

    static EmbeddingSet parse(const std::vector<std::string>& lines) {
        EmbeddingSet e;
        for (const std::string& raw : lines) {
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.rfind("n=", 0) == 0) {
                e.n = static_cast<std::size_t>(parse_int(line.substr(2), "embeddings n"));
            } else if (line.rfind("d=", 0) == 0) {
                e.dim = static_cast<std::size_t>(parse_int(line.substr(2), "embeddings d"));
            } else {
                const auto f = split(line, ',');
                if (f.size() != e.dim + 1)
                    throw ConfigError("embedding row has wrong width: '" + line + "'");
                for (std::size_t d = 0; d < e.dim; ++d)
                    e.vectors.push_back(parse_double(f[d], "embedding"));
                e.labels.push_back(static_cast<int>(parse_int(f.back(), "embedding label")));
            }
        }
        if (e.labels.size() != e.n) throw ConfigError("embeddings: row count mismatch with n=");
        return e;
    }

    double silhouette_score() const { return silhouette(vectors, n, dim, labels); }
};

}  // namespace dhauds
