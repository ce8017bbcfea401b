#pragma once

// Unsupervised adaptation objectives on batch probability matrices, each
// with its analytic gradient: entropy minimization, generalized entropy of
// order alpha, nuclear-norm maximization, the two-view consistency loss and
// their weighted combination.

#include <cmath>
#include <string>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/linalg.hpp"

namespace dhauds {

struct LossValue {
    double value = 0.0;
    Mat grad;  // same shape as the input probabilities
};

/// Mean Shannon entropy: -(1/B) sum_i sum_c p log(p + eps). Zero on one-hot
/// rows, log C on uniform rows.
inline LossValue entropy_min_loss(const Mat& probs) {
    constexpr double eps = 1e-12;
    const double inv_b = 1.0 / static_cast<double>(probs.rows);
    LossValue out;
    out.grad = Mat(probs.rows, probs.cols);
    for (std::size_t i = 0; i < probs.rows; ++i) {
        for (std::size_t j = 0; j < probs.cols; ++j) {
            const double p = probs.at(i, j);
            out.value -= inv_b * p * std::log(p + eps);
            out.grad.at(i, j) = -inv_b * (std::log(p + eps) + p / (p + eps));
        }
    }
    return out;
}

/// Tsallis entropy of order alpha: (1/B) sum_i (1 - sum_c p^alpha)/(alpha-1).
/// Approaches the Shannon form as alpha -> 1.
inline LossValue generalized_entropy_loss(const Mat& probs, double alpha) {
    if (!(alpha > 0.0) || alpha == 1.0)
        throw ConfigError("generalized entropy: alpha must be positive and != 1");
    constexpr double eps = 1e-12;
    const double inv_b = 1.0 / static_cast<double>(probs.rows);
    LossValue out;
    out.grad = Mat(probs.rows, probs.cols);
    for (std::size_t i = 0; i < probs.rows; ++i) {
        double sum_pow = 0.0;
        for (std::size_t j = 0; j < probs.cols; ++j) {
            const double p = std::max(probs.at(i, j), alpha < 1.0 ? eps : 0.0);
            sum_pow += std::pow(p, alpha);
            out.grad.at(i, j) = -inv_b * alpha / (alpha - 1.0) * std::pow(p, alpha - 1.0);
        }
        out.value += inv_b * (1.0 - sum_pow) / (alpha - 1.0);
    }
    return out;
}

/// Negated nuclear norm of the B x C probability matrix; minimizing it
/// maximizes prediction diversity. Gradient is -U V^T from the thin SVD;
/// columns with zero singular value contribute nothing (their U columns are
/// zeroed, a valid subgradient choice).
inline LossValue nuclear_norm_loss(const Mat& probs) {
    const bool transpose = probs.rows < probs.cols;
    const Svd svd = jacobi_svd(transpose ? probs.transposed() : probs);
    LossValue out;
    for (const double s : svd.sigma) out.value -= s;
    const std::size_t m = svd.u.rows, n = svd.u.cols;
    Mat g(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += svd.u.at(i, k) * svd.v.at(j, k);
            g.at(i, j) = -acc;
        }
    out.grad = transpose ? g.transposed() : std::move(g);
    return out;
}

enum class ConsistencyMode { literal, per_sample_l2 };

inline ConsistencyMode parse_consistency_mode(const std::string& s) {
    if (s == "literal") return ConsistencyMode::literal;
    if (s == "per_sample_l2") return ConsistencyMode::per_sample_l2;
    throw ConfigError("unknown consistency mode '" + s + "'");
}

inline std::string to_string(ConsistencyMode m) {
    return m == ConsistencyMode::literal ? "literal" : "per_sample_l2";
}

struct PairLossValue {
    double value = 0.0;
    Mat grad_l, grad_r;
};

/// Divergence between the two views' predictions. literal: mean over the
/// batch of summed absolute per-entry differences (each entry's scalar
/// 2-norm). per_sample_l2: mean of per-row Euclidean distances.
inline PairLossValue consistency_loss(const Mat& probs_l, const Mat& probs_r,
                                      ConsistencyMode mode = ConsistencyMode::literal) {
    if (probs_l.rows != probs_r.rows || probs_l.cols != probs_r.cols)
        throw Error("consistency_loss: shape mismatch");
    const double inv_b = 1.0 / static_cast<double>(probs_l.rows);
    PairLossValue out;
    out.grad_l = Mat(probs_l.rows, probs_l.cols);
    out.grad_r = Mat(probs_l.rows, probs_l.cols);
    for (std::size_t i = 0; i < probs_l.rows; ++i) {
        if (mode == ConsistencyMode::literal) {
            for (std::size_t j = 0; j < probs_l.cols; ++j) {
                const double d = probs_l.at(i, j) - probs_r.at(i, j);
                out.value += inv_b * std::abs(d);
                const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                out.grad_l.at(i, j) = inv_b * sign;
                out.grad_r.at(i, j) = -inv_b * sign;
            }
        } else {
            double norm2 = 0.0;
            for (std::size_t j = 0; j < probs_l.cols; ++j) {
                const double d = probs_l.at(i, j) - probs_r.at(i, j);
                norm2 += d * d;
            }
            const double norm = std::sqrt(norm2);
            out.value += inv_b * norm;
            if (norm > 1e-12) {
                for (std::size_t j = 0; j < probs_l.cols; ++j) {
                    const double d = probs_l.at(i, j) - probs_r.at(i, j);
                    out.grad_l.at(i, j) = inv_b * d / norm;
                    out.grad_r.at(i, j) = -inv_b * d / norm;
                }
            }
        }
    }
    return out;
}

struct LossConfig {
    double lambda = 1.0;  // consistency weight
    double w_nnm = 1.0;   // nuclear-norm maximization
    double w_em = 1.0;    // entropy minimization
    double w_ge = 1.0;    // generalized entropy
    double alpha = 2.0;   // generalized-entropy order
    ConsistencyMode consistency = ConsistencyMode::literal;

    void validate() const {
        if (lambda < 0.0 || w_nnm < 0.0 || w_em < 0.0 || w_ge < 0.0)
            throw ConfigError("loss config: weights must be non-negative");
        if (w_nnm == 0.0 && w_em == 0.0 && w_ge == 0.0 && lambda == 0.0)
            throw ConfigError("loss config: objective is identically zero");
        if (!(alpha > 0.0) || alpha == 1.0)
            throw ConfigError("loss config: alpha must be positive and != 1");
    }
};

/// Total objective: each entropy term is evaluated on both views and
/// averaged, then the consistency term couples the views.
inline PairLossValue combined_loss(const Mat& probs_l, const Mat& probs_r,
                                   const LossConfig& cfg) {
    cfg.validate();
    PairLossValue out;
    out.grad_l = Mat(probs_l.rows, probs_l.cols);
    out.grad_r = Mat(probs_l.rows, probs_l.cols);

    auto add_view = [&](const Mat& p, Mat& grad) {
        if (cfg.w_nnm > 0.0) {
            const LossValue nnm = nuclear_norm_loss(p);
            out.value += 0.5 * cfg.w_nnm * nnm.value;
            for (std::size_t k = 0; k < grad.data.size(); ++k)
                grad.data[k] += 0.5 * cfg.w_nnm * nnm.grad.data[k];
        }
        if (cfg.w_em > 0.0) {
            const LossValue em = entropy_min_loss(p);
            out.value += 0.5 * cfg.w_em * em.value;
            for (std::size_t k = 0; k < grad.data.size(); ++k)
                grad.data[k] += 0.5 * cfg.w_em * em.grad.data[k];
        }
        if (cfg.w_ge > 0.0) {
            const LossValue ge = generalized_entropy_loss(p, cfg.alpha);
            out.value += 0.5 * cfg.w_ge * ge.value;
            for (std::size_t k = 0; k < grad.data.size(); ++k)
                grad.data[k] += 0.5 * cfg.w_ge * ge.grad.data[k];
        }
    };
    add_view(probs_l, out.grad_l);
    add_view(probs_r, out.grad_r);

    if (cfg.lambda > 0.0) {
        const PairLossValue con = consistency_loss(probs_l, probs_r, cfg.consistency);
        out.value += cfg.lambda * con.value;
        for (std::size_t k = 0; k < out.grad_l.data.size(); ++k) {
            out.grad_l.data[k] += cfg.lambda * con.grad_l.data[k];
            out.grad_r.data[k] += cfg.lambda * con.grad_r.data[k];
        }
    }
    return out;
}

}  // namespace dhauds
