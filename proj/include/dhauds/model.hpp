#pragma once

// Desk-scale differentiable classifier with hand-written gradients.
//
// Front end: mel spectrogram (fixed preprocessing, not differentiated).
// Feature extractor: 1-D convolution over mel frames -> batch norm -> ReLU
// -> global average pool -> linear to the embedding dimension.
// Classifier: linear -> ReLU -> linear -> softmax.
//
// Batch norm follows the usual two-mode contract: adaptation and training
// use batch statistics (optionally updating the running estimates), while
// inference uses the running estimates and never mutates them.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/linalg.hpp"
#include "dhauds/mel.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/textio.hpp"
#include "dhauds/wave.hpp"

namespace dhauds {

struct ToyModelConfig {
    int n_mels = 64;
    int conv_filters = 32;
    int kernel = 5;
    int embed_dim = 64;
    int n_classes = 4;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    int hidden() const { return embed_dim / 2; }
};

enum class ForwardMode {
    adapt,   // batch statistics, running stats updated
    frozen,  // batch statistics, running stats untouched (gradient checks)
    eval     // running statistics, never mutated
};

class ToyModel {
public:
    struct Output {
        Mat probs;       // B x C
        Mat embeddings;  // B x D
    };

    struct Cache {
        struct PerSample {
            Mat mel;        // M x T
            Mat conv_out;   // K x T' (pre-BN)
            Mat xhat;       // K x T'
            Mat relu_mask;  // K x T'
            std::vector<double> gap;    // K
            std::vector<double> embed;  // D
            std::vector<double> h_pre;  // H
            std::vector<double> probs;  // C
        };
        std::vector<PerSample> samples;
        std::vector<double> bn_inv_std;  // K, 1/sqrt(var + eps) actually used
        std::size_t bn_count = 0;        // positions pooled into the statistics
        bool batch_stats = true;
    };

    struct Grads {
        std::vector<double> fe, classifier;
    };

    explicit ToyModel(ToyModelConfig cfg = {}) : cfg_(cfg) {
        if (cfg_.embed_dim % 2 != 0) throw ConfigError("toy model: embed_dim must be even");
        conv_w_.assign(static_cast<std::size_t>(cfg_.conv_filters) * cfg_.n_mels * cfg_.kernel, 0.0);
        conv_b_.assign(cfg_.conv_filters, 0.0);
        bn_gamma_.assign(cfg_.conv_filters, 1.0);
        bn_beta_.assign(cfg_.conv_filters, 0.0);
        fe_w_.assign(static_cast<std::size_t>(cfg_.embed_dim) * cfg_.conv_filters, 0.0);
        fe_b_.assign(cfg_.embed_dim, 0.0);
        c1_w_.assign(static_cast<std::size_t>(cfg_.hidden()) * cfg_.embed_dim, 0.0);
        c1_b_.assign(cfg_.hidden(), 0.0);
        c2_w_.assign(static_cast<std::size_t>(cfg_.n_classes) * cfg_.hidden(), 0.0);
        c2_b_.assign(cfg_.n_classes, 0.0);
        bn_run_mean_.assign(cfg_.conv_filters, 0.0);
        bn_run_var_.assign(cfg_.conv_filters, 1.0);
    }

    const ToyModelConfig& config() const { return cfg_; }

    void init_params(std::uint64_t seed) {
        Rng rng(seed);
        auto uniform_fill = [&](std::vector<double>& v, double fan_in) {
            const double a = std::sqrt(6.0 / fan_in);
            for (auto& x : v) x = rng.uniform(-a, a);
        };
        uniform_fill(conv_w_, static_cast<double>(cfg_.n_mels) * cfg_.kernel);
        uniform_fill(fe_w_, cfg_.conv_filters);
        uniform_fill(c1_w_, cfg_.embed_dim);
        uniform_fill(c2_w_, cfg_.hidden());
        std::fill(conv_b_.begin(), conv_b_.end(), 0.0);
        std::fill(fe_b_.begin(), fe_b_.end(), 0.0);
        std::fill(c1_b_.begin(), c1_b_.end(), 0.0);
        std::fill(c2_b_.begin(), c2_b_.end(), 0.0);
        std::fill(bn_gamma_.begin(), bn_gamma_.end(), 1.0);
        std::fill(bn_beta_.begin(), bn_beta_.end(), 0.0);
        std::fill(bn_run_mean_.begin(), bn_run_mean_.end(), 0.0);
        std::fill(bn_run_var_.begin(), bn_run_var_.end(), 1.0);
    }

    // Flat parameter-group views. Order within each group is fixed and part
    // of the checkpoint contract.
    std::size_t fe_size() const {
        return conv_w_.size() + conv_b_.size() + bn_gamma_.size() + bn_beta_.size() +
               fe_w_.size() + fe_b_.size();
    }
    std::size_t classifier_size() const {
        return c1_w_.size() + c1_b_.size() + c2_w_.size() + c2_b_.size();
    }

    std::vector<double> flat_fe() const {
        std::vector<double> out;
        out.reserve(fe_size());
        for (const auto* v : {&conv_w_, &conv_b_, &bn_gamma_, &bn_beta_, &fe_w_, &fe_b_})
            out.insert(out.end(), v->begin(), v->end());
        return out;
    }
    void set_flat_fe(const std::vector<double>& flat) {
        if (flat.size() != fe_size()) throw Error("toy model: fe parameter size mismatch");
        std::size_t off = 0;
        for (auto* v : {&conv_w_, &conv_b_, &bn_gamma_, &bn_beta_, &fe_w_, &fe_b_}) {
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), v->size(), v->begin());
            off += v->size();
        }
    }
    std::vector<double> flat_classifier() const {
        std::vector<double> out;
        out.reserve(classifier_size());
        for (const auto* v : {&c1_w_, &c1_b_, &c2_w_, &c2_b_})
            out.insert(out.end(), v->begin(), v->end());
        return out;
    }
    void set_flat_classifier(const std::vector<double>& flat) {
        if (flat.size() != classifier_size())
            throw Error("toy model: classifier parameter size mismatch");
        std::size_t off = 0;
        for (auto* v : {&c1_w_, &c1_b_, &c2_w_, &c2_b_}) {
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), v->size(), v->begin());
            off += v->size();
        }
    }

    const std::vector<double>& bn_running_mean() const { return bn_run_mean_; }
    const std::vector<double>& bn_running_var() const { return bn_run_var_; }

    Output forward(const std::vector<Mat>& mels, ForwardMode mode, Cache* cache = nullptr) {
        const std::size_t batch = mels.size();
        if (batch == 0) throw Error("toy model: empty batch");
        const auto K = static_cast<std::size_t>(cfg_.conv_filters);
        const auto D = static_cast<std::size_t>(cfg_.embed_dim);
        const auto H = static_cast<std::size_t>(cfg_.hidden());
        const auto C = static_cast<std::size_t>(cfg_.n_classes);

        if (cache) {
            cache->samples.assign(batch, {});
            cache->batch_stats = mode != ForwardMode::eval;
        }

        // Convolution pass, collecting batch statistics as we go.
        std::vector<Mat> conv_outs(batch);
        std::vector<double> sum(K, 0.0), sum_sq(K, 0.0);
        std::size_t count = 0;
        for (std::size_t i = 0; i < batch; ++i) {
            const Mat& mel = mels[i];
            if (mel.rows != static_cast<std::size_t>(cfg_.n_mels))
                throw Error("toy model: mel row count mismatch");
            if (mel.cols < static_cast<std::size_t>(cfg_.kernel))
                throw Error("toy model: clip shorter than the convolution kernel");
            const std::size_t t_out = mel.cols - cfg_.kernel + 1;
            Mat z(K, t_out);
            for (std::size_t kk = 0; kk < K; ++kk) {
                for (std::size_t t = 0; t < t_out; ++t) {
                    double acc = conv_b_[kk];
                    for (std::size_t m = 0; m < static_cast<std::size_t>(cfg_.n_mels); ++m) {
                        const double* wrow =
                            conv_w_.data() + (kk * cfg_.n_mels + m) * cfg_.kernel;
                        const double* xrow = mel.data.data() + m * mel.cols + t;
                        for (std::size_t u = 0; u < static_cast<std::size_t>(cfg_.kernel); ++u)
                            acc += wrow[u] * xrow[u];
                    }
                    z.at(kk, t) = acc;
                    sum[kk] += acc;
                    sum_sq[kk] += acc * acc;
                }
            }
            count += t_out;
            conv_outs[i] = std::move(z);
        }

        std::vector<double> mean(K), var(K);
        if (mode == ForwardMode::eval) {
            mean = bn_run_mean_;
            var = bn_run_var_;
        } else {
            for (std::size_t kk = 0; kk < K; ++kk) {
                mean[kk] = sum[kk] / static_cast<double>(count);
                var[kk] = sum_sq[kk] / static_cast<double>(count) - mean[kk] * mean[kk];
                if (var[kk] < 0.0) var[kk] = 0.0;
            }
            if (mode == ForwardMode::adapt) {
                for (std::size_t kk = 0; kk < K; ++kk) {
                    bn_run_mean_[kk] =
                        (1.0 - cfg_.bn_momentum) * bn_run_mean_[kk] + cfg_.bn_momentum * mean[kk];
                    bn_run_var_[kk] =
                        (1.0 - cfg_.bn_momentum) * bn_run_var_[kk] + cfg_.bn_momentum * var[kk];
                }
            }
        }
        std::vector<double> inv_std(K);
        for (std::size_t kk = 0; kk < K; ++kk)
            inv_std[kk] = 1.0 / std::sqrt(var[kk] + cfg_.bn_eps);
        if (cache) {
            cache->bn_inv_std = inv_std;
            cache->bn_count = count;
        }

        Output out;
        out.probs = Mat(batch, C);
        out.embeddings = Mat(batch, D);

        for (std::size_t i = 0; i < batch; ++i) {
            const Mat& z = conv_outs[i];
            const std::size_t t_out = z.cols;
            Mat xhat(K, t_out), relu_mask(K, t_out);
            std::vector<double> gap(K, 0.0);
            for (std::size_t kk = 0; kk < K; ++kk) {
                for (std::size_t t = 0; t < t_out; ++t) {
                    const double xh = (z.at(kk, t) - mean[kk]) * inv_std[kk];
                    xhat.at(kk, t) = xh;
                    const double y = bn_gamma_[kk] * xh + bn_beta_[kk];
                    const bool active = y > 0.0;
                    relu_mask.at(kk, t) = active ? 1.0 : 0.0;
                    if (active) gap[kk] += y;
                }
                gap[kk] /= static_cast<double>(t_out);
            }

            std::vector<double> embed(D);
            for (std::size_t d = 0; d < D; ++d) {
                double acc = fe_b_[d];
                const double* wrow = fe_w_.data() + d * K;
                for (std::size_t kk = 0; kk < K; ++kk) acc += wrow[kk] * gap[kk];
                embed[d] = acc;
                out.embeddings.at(i, d) = acc;
            }

            std::vector<double> h_pre(H), h(H);
            for (std::size_t j = 0; j < H; ++j) {
                double acc = c1_b_[j];
                const double* wrow = c1_w_.data() + j * D;
                for (std::size_t d = 0; d < D; ++d) acc += wrow[d] * embed[d];
                h_pre[j] = acc;
                h[j] = acc > 0.0 ? acc : 0.0;
            }

            std::vector<double> logits(C);
            double max_logit = -1e300;
            for (std::size_t cidx = 0; cidx < C; ++cidx) {
                double acc = c2_b_[cidx];
                const double* wrow = c2_w_.data() + cidx * H;
                for (std::size_t j = 0; j < H; ++j) acc += wrow[j] * h[j];
                logits[cidx] = acc;
                max_logit = std::max(max_logit, acc);
            }
            double denom = 0.0;
            for (std::size_t cidx = 0; cidx < C; ++cidx) denom += std::exp(logits[cidx] - max_logit);
            std::vector<double> probs(C);
            for (std::size_t cidx = 0; cidx < C; ++cidx) {
                probs[cidx] = std::exp(logits[cidx] - max_logit) / denom;
                out.probs.at(i, cidx) = probs[cidx];
            }

            if (cache) {
                auto& s = cache->samples[i];
                s.mel = mels[i];
                s.conv_out = std::move(conv_outs[i]);
                s.xhat = std::move(xhat);
                s.relu_mask = std::move(relu_mask);
                s.gap = std::move(gap);
                s.embed = std::move(embed);
                s.h_pre = std::move(h_pre);
                s.probs = std::move(probs);
            }
        }
        return out;
    }

    /// Mel preprocessing plus forward. The mel front end is fixed (25 ms
    /// window, 10 ms hop at the clip's own rate) and is not differentiated.
    Output forward_waves(const std::vector<Waveform>& batch, ForwardMode mode,
                         Cache* cache = nullptr) {
        std::vector<Mat> mels(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) mels[i] = mel_to_mat(batch[i]);
        return forward(mels, mode, cache);
    }

    Mat mel_to_mat(const Waveform& w) const {
        MelConfig mc = MelConfig::defaults(w.sample_rate);
        mc.n_mels = cfg_.n_mels;
        const MelFeature f = mel_spectrogram(w, mc);
        Mat m(static_cast<std::size_t>(f.n_mels), f.n_frames);
        m.data = f.bins;
        return m;
    }

    /// Backward through the softmax from dL/dprobs.
    Grads backward(const Cache& cache, const Mat& dprobs) const {
        const std::size_t C = static_cast<std::size_t>(cfg_.n_classes);
        Mat dlogits(dprobs.rows, C);
        for (std::size_t i = 0; i < dprobs.rows; ++i) {
            const auto& p = cache.samples[i].probs;
            double dot = 0.0;
            for (std::size_t j = 0; j < C; ++j) dot += dprobs.at(i, j) * p[j];
            for (std::size_t j = 0; j < C; ++j)
                dlogits.at(i, j) = p[j] * (dprobs.at(i, j) - dot);
        }
        return backward_from_dlogits(cache, dlogits);
    }

    /// Backward from dL/dlogits (numerically preferable for cross-entropy).
    Grads backward_from_dlogits(const Cache& cache, const Mat& dlogits) const {
        const std::size_t batch = cache.samples.size();
        const auto K = static_cast<std::size_t>(cfg_.conv_filters);
        const auto D = static_cast<std::size_t>(cfg_.embed_dim);
        const auto H = static_cast<std::size_t>(cfg_.hidden());
        const auto C = static_cast<std::size_t>(cfg_.n_classes);
        if (dlogits.rows != batch || dlogits.cols != C)
            throw Error("toy model backward: gradient shape mismatch");

        std::vector<double> d_conv_w(conv_w_.size(), 0.0), d_conv_b(conv_b_.size(), 0.0);
        std::vector<double> d_gamma(K, 0.0), d_beta(K, 0.0);
        std::vector<double> d_fe_w(fe_w_.size(), 0.0), d_fe_b(fe_b_.size(), 0.0);
        std::vector<double> d_c1_w(c1_w_.size(), 0.0), d_c1_b(c1_b_.size(), 0.0);
        std::vector<double> d_c2_w(c2_w_.size(), 0.0), d_c2_b(c2_b_.size(), 0.0);

        // Pass 1: classifier chain down to the BN output gradient dy, plus
        // the batch-wide BN reductions.
        std::vector<Mat> dys(batch);
        std::vector<double> sum_dy(K, 0.0), sum_dy_xhat(K, 0.0);
        for (std::size_t i = 0; i < batch; ++i) {
            const auto& s = cache.samples[i];
            std::vector<double> dh(H, 0.0);
            for (std::size_t cidx = 0; cidx < C; ++cidx) {
                const double g = dlogits.at(i, cidx);
                d_c2_b[cidx] += g;
                const double* hrow = s.h_pre.data();
                for (std::size_t j = 0; j < H; ++j) {
                    const double hj = hrow[j] > 0.0 ? hrow[j] : 0.0;
                    d_c2_w[cidx * H + j] += g * hj;
                    dh[j] += g * c2_w_[cidx * H + j];
                }
            }
            std::vector<double> de(D, 0.0);
            for (std::size_t j = 0; j < H; ++j) {
                if (s.h_pre[j] <= 0.0) continue;
                d_c1_b[j] += dh[j];
                for (std::size_t d = 0; d < D; ++d) {
                    d_c1_w[j * D + d] += dh[j] * s.embed[d];
                    de[d] += dh[j] * c1_w_[j * D + d];
                }
            }
            std::vector<double> dgap(K, 0.0);
            for (std::size_t d = 0; d < D; ++d) {
                d_fe_b[d] += de[d];
                for (std::size_t kk = 0; kk < K; ++kk) {
                    d_fe_w[d * K + kk] += de[d] * s.gap[kk];
                    dgap[kk] += de[d] * fe_w_[d * K + kk];
                }
            }
            const std::size_t t_out = s.conv_out.cols;
            Mat dy(K, t_out);
            for (std::size_t kk = 0; kk < K; ++kk) {
                const double per_t = dgap[kk] / static_cast<double>(t_out);
                for (std::size_t t = 0; t < t_out; ++t) {
                    const double g = per_t * s.relu_mask.at(kk, t);
                    dy.at(kk, t) = g;
                    sum_dy[kk] += g;
                    sum_dy_xhat[kk] += g * s.xhat.at(kk, t);
                }
            }
            dys[i] = std::move(dy);
        }

        for (std::size_t kk = 0; kk < K; ++kk) {
            d_gamma[kk] = sum_dy_xhat[kk];
            d_beta[kk] = sum_dy[kk];
        }

        // Pass 2: BN input gradient and convolution parameter gradients.
        const double n_total = static_cast<double>(cache.bn_count);
        for (std::size_t i = 0; i < batch; ++i) {
            const auto& s = cache.samples[i];
            const std::size_t t_out = s.conv_out.cols;
            for (std::size_t kk = 0; kk < K; ++kk) {
                const double g_scale = bn_gamma_[kk] * cache.bn_inv_std[kk];
                for (std::size_t t = 0; t < t_out; ++t) {
                    double dx;
                    if (cache.batch_stats) {
                        dx = g_scale * (dys[i].at(kk, t) - sum_dy[kk] / n_total -
                                        s.xhat.at(kk, t) * sum_dy_xhat[kk] / n_total);
                    } else {
                        dx = g_scale * dys[i].at(kk, t);
                    }
                    if (dx == 0.0) continue;
                    d_conv_b[kk] += dx;
                    for (std::size_t m = 0; m < static_cast<std::size_t>(cfg_.n_mels); ++m) {
                        double* wgrad = d_conv_w.data() + (kk * cfg_.n_mels + m) * cfg_.kernel;
                        const double* xrow = s.mel.data.data() + m * s.mel.cols + t;
                        for (std::size_t u = 0; u < static_cast<std::size_t>(cfg_.kernel); ++u)
                            wgrad[u] += dx * xrow[u];
                    }
                }
            }
        }

        Grads grads;
        grads.fe.reserve(fe_size());
        for (const auto* v : {&d_conv_w, &d_conv_b, &d_gamma, &d_beta, &d_fe_w, &d_fe_b})
            grads.fe.insert(grads.fe.end(), v->begin(), v->end());
        grads.classifier.reserve(classifier_size());
        for (const auto* v : {&d_c1_w, &d_c1_b, &d_c2_w, &d_c2_b})
            grads.classifier.insert(grads.classifier.end(), v->begin(), v->end());
        return grads;
    }

    void save_checkpoint(const std::filesystem::path& path) const {
        std::string header = "DHAUDS-CKPT v1\n";
        header += "meta n_mels " + std::to_string(cfg_.n_mels) + "\n";
        header += "meta conv_filters " + std::to_string(cfg_.conv_filters) + "\n";
        header += "meta kernel " + std::to_string(cfg_.kernel) + "\n";
        header += "meta embed_dim " + std::to_string(cfg_.embed_dim) + "\n";
        header += "meta n_classes " + std::to_string(cfg_.n_classes) + "\n";
        header += "meta bn_momentum " + format_double(cfg_.bn_momentum) + "\n";
        header += "meta bn_eps " + format_double(cfg_.bn_eps) + "\n";

        std::vector<std::pair<std::string, const std::vector<double>*>> tensors = {
            {"feature_extractor conv_w " + shape3(cfg_.conv_filters, cfg_.n_mels, cfg_.kernel),
             &conv_w_},
            {"feature_extractor conv_b " + std::to_string(cfg_.conv_filters), &conv_b_},
            {"feature_extractor bn_gamma " + std::to_string(cfg_.conv_filters), &bn_gamma_},
            {"feature_extractor bn_beta " + std::to_string(cfg_.conv_filters), &bn_beta_},
            {"feature_extractor fe_w " + shape2(cfg_.embed_dim, cfg_.conv_filters), &fe_w_},
            {"feature_extractor fe_b " + std::to_string(cfg_.embed_dim), &fe_b_},
            {"classifier c1_w " + shape2(cfg_.hidden(), cfg_.embed_dim), &c1_w_},
            {"classifier c1_b " + std::to_string(cfg_.hidden()), &c1_b_},
            {"classifier c2_w " + shape2(cfg_.n_classes, cfg_.hidden()), &c2_w_},
            {"classifier c2_b " + std::to_string(cfg_.n_classes), &c2_b_},
            {"buffers bn_running_mean " + std::to_string(cfg_.conv_filters), &bn_run_mean_},
            {"buffers bn_running_var " + std::to_string(cfg_.conv_filters), &bn_run_var_},
        };
        for (const auto& [desc, v] : tensors) header += "tensor " + desc + "\n";
        header += "end\n";

        std::string payload;
        for (const auto& [desc, v] : tensors)
            for (const double x : *v) {
                const float f = static_cast<float>(x);
                char raw[4];
                std::memcpy(raw, &f, 4);
                payload.append(raw, 4);
            }
        write_file_atomic(path, header + payload);
    }

    static ToyModel load_checkpoint(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("checkpoint: cannot open " + path.string());
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

        const std::size_t end_pos = bytes.find("end\n");
        if (bytes.rfind("DHAUDS-CKPT v1\n", 0) != 0 || end_pos == std::string::npos)
            throw IoError("checkpoint: bad header in " + path.string());

        ToyModelConfig cfg;
        std::vector<std::pair<std::string, std::size_t>> tensor_list;  // name, element count
        for (const std::string& line : split(bytes.substr(0, end_pos), '\n')) {
            const auto f = split(line, ' ');
            if (f.empty()) continue;
            if (f[0] == "meta" && f.size() == 3) {
                if (f[1] == "n_mels") cfg.n_mels = static_cast<int>(parse_int(f[2], "ckpt"));
                if (f[1] == "conv_filters")
                    cfg.conv_filters = static_cast<int>(parse_int(f[2], "ckpt"));
                if (f[1] == "kernel") cfg.kernel = static_cast<int>(parse_int(f[2], "ckpt"));
                if (f[1] == "embed_dim") cfg.embed_dim = static_cast<int>(parse_int(f[2], "ckpt"));
                if (f[1] == "n_classes") cfg.n_classes = static_cast<int>(parse_int(f[2], "ckpt"));
                if (f[1] == "bn_momentum") cfg.bn_momentum = parse_double(f[2], "ckpt");
                if (f[1] == "bn_eps") cfg.bn_eps = parse_double(f[2], "ckpt");
            } else if (f[0] == "tensor") {
                std::size_t count = 1;
                for (std::size_t i = 3; i < f.size(); ++i)
                    count *= static_cast<std::size_t>(parse_int(f[i], "ckpt shape"));
                tensor_list.emplace_back(f[2], count);
            }
        }

        ToyModel model(cfg);
        std::size_t off = end_pos + 4;
        auto read_into = [&](std::vector<double>& v, std::size_t count) {
            if (off + 4 * count > bytes.size())
                throw IoError("checkpoint: truncated payload in " + path.string());
            v.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                float f;
                std::memcpy(&f, bytes.data() + off, 4);
                v[i] = f;
                off += 4;
            }
        };
        for (const auto& [name, count] : tensor_list) {
            if (name == "conv_w") read_into(model.conv_w_, count);
            else if (name == "conv_b") read_into(model.conv_b_, count);
            else if (name == "bn_gamma") read_into(model.bn_gamma_, count);
            else if (name == "bn_beta") read_into(model.bn_beta_, count);
            else if (name == "fe_w") read_into(model.fe_w_, count);
            else if (name == "fe_b") read_into(model.fe_b_, count);
            else if (name == "c1_w") read_into(model.c1_w_, count);
            else if (name == "c1_b") read_into(model.c1_b_, count);
            else if (name == "c2_w") read_into(model.c2_w_, count);
            else if (name == "c2_b") read_into(model.c2_b_, count);
            else if (name == "bn_running_mean") read_into(model.bn_run_mean_, count);
            else if (name == "bn_running_var") read_into(model.bn_run_var_, count);
            else throw IoError("checkpoint: unknown tensor '" + name + "'");
        }
        return model;
    }

private:
    static std::string shape2(int a, int b) {
        return std::to_string(a) + " " + std::to_string(b);
    }
    static std::string shape3(int a, int b, int c) {
        return std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(c);
    }

    ToyModelConfig cfg_;
    std::vector<double> conv_w_, conv_b_, bn_gamma_, bn_beta_, fe_w_, fe_b_;
    std::vector<double> c1_w_, c1_b_, c2_w_, c2_b_;
    std::vector<double> bn_run_mean_, bn_run_var_;
};

}  // namespace dhauds
