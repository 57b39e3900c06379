#pragma once

#include <span>

#include "tinlab/graph.hpp"

namespace tinlab {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// w <- w - lr * g
void sgd_step(Parameter& param, std::span<const double> grad, double lr);

// Bias-corrected Adam. Moment buffers are allocated on the first step.
void adam_step(Parameter& param, std::span<const double> grad, const AdamConfig& cfg);

// Apply to every trainable parameter named in `grads`.
void sgd_step(Graph& graph, const GradientMap& grads, double lr);
void adam_step(Graph& graph, const GradientMap& grads, const AdamConfig& cfg);

enum class OptimizerKind { Sgd, Adam };

// Steps every trainable parameter of a graph using its accumulated gradient.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, AdamConfig cfg);

    void step(Graph& graph) const;
    OptimizerKind kind() const { return kind_; }
    const AdamConfig& config() const { return cfg_; }

private:
    OptimizerKind kind_;
    AdamConfig cfg_;
};

} // namespace tinlab
