#include "tinlab/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tinlab/errors.hpp"

namespace tinlab {

GradCheckResult grad_check(Graph& graph, NodeId out, const Bindings& bindings, double h)
{
    if (!(h > 0.0))
        throw ConfigError("grad_check: perturbation must be positive");
    if (graph.node(out).output.size() != 1)
        throw UsageError("grad_check: output node must be scalar");

    graph.forward(bindings);
    graph.zero_grad();
    graph.backward(out);
    const GradientMap analytic = graph.gradients();

    GradCheckResult result;
    for (const auto& [id, grad] : analytic) {
        auto values = graph.param(id).tensor.values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            graph.forward();
            const double f_plus = graph.scalar(out);
            values[i] = saved - h;
            graph.forward();
            const double f_minus = graph.scalar(out);
            values[i] = saved;

            const double numeric = (f_plus - f_minus) / (2.0 * h);
            const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-8});
            const double rel = std::abs(grad[i] - numeric) / denom;
            ++result.entries_checked;
            if (rel > result.max_rel_error || result.entries_checked == 1) {
                result.max_rel_error = std::max(result.max_rel_error, rel);
                result.worst_param = id;
                result.worst_index = i;
                result.analytic = grad[i];
                result.numeric = numeric;
            }
        }
    }
    graph.forward();
    return result;
}

namespace {

constexpr double kMargin = 1e-3;

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

// Distinct values with pairwise gaps of at least kMargin.
std::vector<double> draw_distinct(std::mt19937_64& rng, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = static_cast<double>(i) * 0.1;
    std::shuffle(v.begin(), v.end(), rng);
    std::uniform_real_distribution<double> jitter(0.0, 0.1 - 2 * kMargin);
    for (auto& x : v)
        x += jitter(rng) - 1.0;
    return v;
}

bool away_from(std::span<const double> x, double point)
{
    return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v - point) >= kMargin; });
}

} // namespace

SweepCase make_sweep_case(OpKind kind, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    SweepCase c;
    Graph& g = c.graph;
    NodeId node;
    switch (kind) {
    case OpKind::WeightedSum: {
        const auto x = g.add_parameter("x", Tensor::vector(draw(rng, n, -2, 2)));
        const auto w = g.add_parameter("w", Tensor::vector(draw(rng, n, -2, 2)));
        node = g.add_weighted_sum({x}, w);
        break;
    }
    case OpKind::Subtract: {
        const auto a = g.add_parameter("a", Tensor::vector(draw(rng, n, -2, 2)));
        const auto b = g.add_parameter("b", Tensor::vector(draw(rng, n, -2, 2)));
        node = g.add_subtract(a, b);
        break;
    }
    case OpKind::DivBias: {
        const auto num = g.add_parameter("num", Tensor::vector(draw(rng, n, -2, 2)));
        const auto den = g.add_parameter("den", Tensor::vector(draw(rng, n, 0.1, 2)));
        node = g.add_div_bias(num, den, 1e-8);
        break;
    }
    case OpKind::Clip: {
        std::vector<double> x;
        do
            x = draw(rng, n, -2, 2);
        while (!away_from(x, -1.0) || !away_from(x, 1.0));
        node = g.add_clip({g.add_parameter("x", Tensor::vector(x))}, -1.0, 1.0);
        break;
    }
    case OpKind::MinPool1D:
    case OpKind::MaxPool1D: {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n)(rng);
        const auto x = g.add_parameter("x", Tensor::vector(draw_distinct(rng, n)));
        node = kind == OpKind::MinPool1D ? g.add_minpool({x}, k) : g.add_maxpool({x}, k);
        break;
    }
    case OpKind::Mean:
        node = g.add_mean({g.add_parameter("x", Tensor::vector(draw(rng, n, -2, 2)))});
        break;
    case OpKind::MAD: {
        std::vector<double> x;
        do
            x = draw(rng, n, -2, 2);
        while (!away_from(x, ops::mean(x)) && n > 1);
        node = g.add_mad({g.add_parameter("x", Tensor::vector(x))});
        break;
    }
    case OpKind::Activation: {
        std::vector<double> x;
        do
            x = draw(rng, n, -2, 2);
        while (!away_from(x, 0.0));
        const auto act = std::bernoulli_distribution(0.5)(rng) ? ops::ActivationKind::Relu : ops::ActivationKind::Identity;
        node = g.add_activation({g.add_parameter("x", Tensor::vector(x))}, act);
        break;
    }
    }
    const std::size_t len = g.node(node).output.size();
    const auto r = g.add_parameter("readout", Tensor::vector(draw(rng, len, -2, 2)));
    c.out = g.add_weighted_sum({node}, r);
    return c;
}

std::vector<SweepRow> grad_sweep(std::size_t cases, double h, std::uint64_t seed)
{
    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < std::size(kAllOpKinds); ++k) {
        SweepRow row{kAllOpKinds[k]};
        for (std::size_t i = 0; i < cases; ++i) {
            const std::uint64_t s = seed * 1000003 + k * 10007 + i;
            auto c = make_sweep_case(row.kind, s);
            const auto r = grad_check(c.graph, c.out, {}, h);
            ++row.cases;
            if (r.max_rel_error > row.max_rel_error) {
                row.max_rel_error = r.max_rel_error;
                row.worst_seed = s;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace tinlab
