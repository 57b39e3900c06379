#include "tinlab/optim.hpp"

#include <cmath>

#include "tinlab/errors.hpp"

namespace tinlab {

namespace {

void check_grad(const Parameter& param, std::span<const double> grad)
{
    if (grad.size() != param.tensor.size())
        throw DimensionError("optimizer: gradient for '" + param.name + "' has " + std::to_string(grad.size()) +
                             " entries, parameter has " + std::to_string(param.tensor.size()));
}

void check_adam(const AdamConfig& cfg)
{
    if (!(cfg.lr > 0.0))
        throw ConfigError("adam: lr must be positive");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
        throw ConfigError("adam: betas must lie in [0, 1)");
    if (!(cfg.eps > 0.0))
        throw ConfigError("adam: eps must be positive");
}

} // namespace

void sgd_step(Parameter& param, std::span<const double> grad, double lr)
{
    if (!(lr > 0.0))
        throw ConfigError("sgd: lr must be positive");
    check_grad(param, grad);
    auto w = param.tensor.values();
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] -= lr * grad[i];
    ++param.step_count;
}

void adam_step(Parameter& param, std::span<const double> grad, const AdamConfig& cfg)
{
    check_adam(cfg);
    check_grad(param, grad);
    const std::size_t n = param.tensor.size();
    if (param.m1.size() != n)
        param.m1.assign(n, 0.0);
    if (param.m2.size() != n)
        param.m2.assign(n, 0.0);
    ++param.step_count;
    const double t = static_cast<double>(param.step_count);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    auto w = param.tensor.values();
    for (std::size_t i = 0; i < n; ++i) {
        param.m1[i] = cfg.beta1 * param.m1[i] + (1.0 - cfg.beta1) * grad[i];
        param.m2[i] = cfg.beta2 * param.m2[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = param.m1[i] / c1;
        const double v_hat = param.m2[i] / c2;
        w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

void sgd_step(Graph& graph, const GradientMap& grads, double lr)
{
    for (const auto& [id, g] : grads) {
        auto& p = graph.param(id);
        if (p.trainable)
            sgd_step(p, g, lr);
    }
}

void adam_step(Graph& graph, const GradientMap& grads, const AdamConfig& cfg)
{
    for (const auto& [id, g] : grads) {
        auto& p = graph.param(id);
        if (p.trainable)
            adam_step(p, g, cfg);
    }
}

Optimizer::Optimizer(OptimizerKind kind, AdamConfig cfg)
    : kind_(kind)
    , cfg_(cfg)
{
    if (kind_ == OptimizerKind::Adam)
        check_adam(cfg_);
    else if (!(cfg_.lr > 0.0))
        throw ConfigError("sgd: lr must be positive");
}

void Optimizer::step(Graph& graph) const
{
    for (std::size_t i = 0; i < graph.num_params(); ++i) {
        auto& p = graph.param(ParamId{i});
        if (!p.trainable)
            continue;
        auto g = p.tensor.grad();
        if (kind_ == OptimizerKind::Sgd)
            sgd_step(p, g, cfg_.lr);
        else
            adam_step(p, g, cfg_);
    }
}

} // namespace tinlab
