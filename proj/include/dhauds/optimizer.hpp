#pragma once

// SGD with momentum over two parameter groups. The binary learning rate
// strategy scales the feature-extractor rate by lr_ratio <= 1 relative to
// the classifier rate, so lr_fe <= lr_c always holds.

#include <cmath>
#include <string>
#include <vector>

#include "dhauds/errors.hpp"

namespace dhauds {

struct OptimizerConfig {
    double lr_c = 0.01;
    double lr_ratio = 0.5;  // lr_fe = lr_ratio * lr_c
    double momentum = 0.7;

    double lr_fe() const { return lr_ratio * lr_c; }

    void validate() const {
        if (!(lr_c > 0.0)) throw ConfigError("optimizer: lr_c must be positive");
        if (!(lr_ratio > 0.0 && lr_ratio <= 1.0))
            throw ConfigError("optimizer: lr_ratio must be in (0, 1]");
        if (!(momentum >= 0.0 && momentum < 1.0))
            throw ConfigError("optimizer: momentum must be in [0, 1)");
    }
};

class BlrOptimizer {
public:
    BlrOptimizer(OptimizerConfig cfg, std::size_t fe_size, std::size_t c_size) : cfg_(cfg) {
        cfg_.validate();
        velocity_fe_.assign(fe_size, 0.0);
        velocity_c_.assign(c_size, 0.0);
    }

    const OptimizerConfig& config() const { return cfg_; }
    const std::vector<double>& velocity_fe() const { return velocity_fe_; }
    const std::vector<double>& velocity_c() const { return velocity_c_; }

    /// v <- momentum * v + g; p <- p - lr_group * v. Non-finite gradients
    /// abort before any parameter is touched.
    void step(std::vector<double>& params_fe, std::vector<double>& params_c,
              const std::vector<double>& grads_fe, const std::vector<double>& grads_c) {
        if (params_fe.size() != velocity_fe_.size() || grads_fe.size() != velocity_fe_.size() ||
            params_c.size() != velocity_c_.size() || grads_c.size() != velocity_c_.size())
            throw Error("optimizer: group size mismatch");
        for (const double g : grads_fe)
            if (!std::isfinite(g)) throw Error("optimizer: non-finite feature-extractor gradient");
        for (const double g : grads_c)
            if (!std::isfinite(g)) throw Error("optimizer: non-finite classifier gradient");

        const double lr_fe = cfg_.lr_fe();
        for (std::size_t i = 0; i < params_fe.size(); ++i) {
            velocity_fe_[i] = cfg_.momentum * velocity_fe_[i] + grads_fe[i];
            params_fe[i] -= lr_fe * velocity_fe_[i];
        }
        for (std::size_t i = 0; i < params_c.size(); ++i) {
            velocity_c_[i] = cfg_.momentum * velocity_c_[i] + grads_c[i];
            params_c[i] -= cfg_.lr_c * velocity_c_[i];
        }
    }

private:
    OptimizerConfig cfg_;
    std::vector<double> velocity_fe_, velocity_c_;
};

}  // namespace dhauds
