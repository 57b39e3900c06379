#include "tinlab/ops.hpp"

#include <cmath>
#include <string>

#include "tinlab/errors.hpp"

namespace tinlab::ops {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
}

template <typename Better>
void pool(std::span<const double> x, std::size_t k, std::span<double> out, std::span<std::size_t> argext,
          Better better)
{
    if (k < 1 || k > x.size())
        throw DimensionError("pool1d: window " + std::to_string(k) + " does not fit input of length " +
                             std::to_string(x.size()));
    const std::size_t n_out = x.size() - k + 1;
    require_same(out.size(), n_out, "pool1d output");
    require_same(argext.size(), n_out, "pool1d argext");
    for (std::size_t t = 0; t < n_out; ++t) {
        std::size_t best = t;
        for (std::size_t j = t + 1; j < t + k; ++j)
            if (better(x[j], x[best]))
                best = j;
        out[t] = x[best];
        argext[t] = best;
    }
}

} // namespace

double weighted_sum(std::span<const double> x, std::span<const double> w)
{
    require_same(x.size(), w.size(), "weighted_sum");
    if (x.empty())
        throw DimensionError("weighted_sum: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += w[i] * x[i];
    return acc;
}

void weighted_sum_backward(std::span<const double> x, std::span<const double> w, double upstream,
                           std::span<double> grad_x, std::span<double> grad_w)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!grad_w.empty())
            grad_w[i] += upstream * x[i];
        if (!grad_x.empty())
            grad_x[i] += upstream * w[i];
    }
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out)
{
    require_same(a.size(), b.size(), "subtract");
    require_same(out.size(), a.size(), "subtract output");
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] - b[i];
}

void subtract_backward(std::span<const double> upstream, std::span<double> grad_a, std::span<double> grad_b)
{
    for (std::size_t i = 0; i < upstream.size(); ++i) {
        if (!grad_a.empty())
            grad_a[i] += upstream[i];
        if (!grad_b.empty())
            grad_b[i] -= upstream[i];
    }
}

void div_bias(std::span<const double> num, std::span<const double> den, double eps, std::span<double> out)
{
    if (!(eps > 0.0))
        throw ConfigError("div_bias: eps must be positive");
    require_same(num.size(), den.size(), "div_bias");
    require_same(out.size(), num.size(), "div_bias output");
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (den[i] < 0.0)
            throw DomainError("div_bias: negative denominator at element " + std::to_string(i));
        out[i] = num[i] / (den[i] + eps);
    }
}

void div_bias_backward(std::span<const double> num, std::span<const double> den, double eps,
                       std::span<const double> upstream, std::span<double> grad_num, std::span<double> grad_den)
{
    for (std::size_t i = 0; i < num.size(); ++i) {
        const double d = den[i] + eps;
        if (!grad_num.empty())
            grad_num[i] += upstream[i] / d;
        if (!grad_den.empty())
            grad_den[i] -= upstream[i] * num[i] / (d * d);
    }
}

void clip(std::span<const double> x, double lo, double hi, std::span<double> out)
{
    if (!(lo < hi))
        throw ConfigError("clip: lower bound must be below upper bound");
    require_same(out.size(), x.size(), "clip output");
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] < lo ? lo : (x[i] > hi ? hi : x[i]);
}

void clip_backward(std::span<const double> x, double lo, double hi, std::span<const double> upstream,
                   std::span<double> grad_x)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > lo && x[i] < hi)
            grad_x[i] += upstream[i];
}

void minpool1d(std::span<const double> x, std::size_t k, std::span<double> out, std::span<std::size_t> argext)
{
    pool(x, k, out, argext, [](double a, double b) { return a < b; });
}

void maxpool1d(std::span<const double> x, std::size_t k, std::span<double> out, std::span<std::size_t> argext)
{
    pool(x, k, out, argext, [](double a, double b) { return a > b; });
}

void pool_backward(std::span<const std::size_t> argext, std::span<const double> upstream, std::span<double> grad_x)
{
    for (std::size_t t = 0; t < argext.size(); ++t)
        grad_x[argext[t]] += upstream[t];
}

double mean(std::span<const double> x)
{
    if (x.empty())
        throw DimensionError("mean: empty input");
    double acc = 0.0;
    for (double v : x)
        acc += v;
    return acc / static_cast<double>(x.size());
}

void mean_backward(std::size_t n, double upstream, std::span<double> grad_x)
{
    const double g = upstream / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        grad_x[i] += g;
}

double mad(std::span<const double> x)
{
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x)
        acc += std::abs(v - m);
    return acc / static_cast<double>(x.size());
}

// d/dx_j (1/n) sum_i |x_i - m| = (1/n) (s_j - (1/n) sum_i s_i), s_i = sign(x_i - m).
void mad_backward(std::span<const double> x, double upstream, std::span<double> grad_x)
{
    const double m = mean(x);
    const double n = static_cast<double>(x.size());
    double sign_sum = 0.0;
    for (double v : x)
        sign_sum += (v > m) - (v < m);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double s = (x[j] > m) - (x[j] < m);
        grad_x[j] += upstream * (s - sign_sum / n) / n;
    }
}

void activation(ActivationKind kind, std::span<const double> x, std::span<double> out)
{
    require_same(out.size(), x.size(), "activation output");
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (kind == ActivationKind::Relu && x[i] < 0.0) ? 0.0 : x[i];
}

void activation_backward(ActivationKind kind, std::span<const double> x, std::span<const double> upstream,
                         std::span<double> grad_x)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (kind == ActivationKind::Identity || x[i] > 0.0)
            grad_x[i] += upstream[i];
}

std::vector<double> subtract(std::span<const double> a, std::span<const double> b)
{
    std::vector<double> out(a.size());
    subtract(a, b, out);
    return out;
}

std::vector<double> div_bias(std::span<const double> num, std::span<const double> den, double eps)
{
    std::vector<double> out(num.size());
    div_bias(num, den, eps, out);
    return out;
}

std::vector<double> clip(std::span<const double> x, double lo, double hi)
{
    std::vector<double> out(x.size());
    clip(x, lo, hi, out);
    return out;
}

std::vector<double> minpool1d(std::span<const double> x, std::size_t k)
{
    const std::size_t n_out = (k >= 1 && k <= x.size()) ? x.size() - k + 1 : 0;
    std::vector<double> out(n_out);
    std::vector<std::size_t> arg(n_out);
    minpool1d(x, k, out, arg);
    return out;
}

std::vector<double> maxpool1d(std::span<const double> x, std::size_t k)
{
    const std::size_t n_out = (k >= 1 && k <= x.size()) ? x.size() - k + 1 : 0;
    std::vector<double> out(n_out);
    std::vector<std::size_t> arg(n_out);
    maxpool1d(x, k, out, arg);
    return out;
}

} // namespace tinlab::ops
