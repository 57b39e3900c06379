#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Forward and backward kernels for every operator an indicator graph may
// contain. Backward kernels accumulate (+=) into the provided gradient spans
// so a node feeding several consumers sums its contributions.

namespace tinlab::ops {

enum class ActivationKind { Identity, Relu };

double weighted_sum(std::span<const double> x, std::span<const double> w);
void weighted_sum_backward(std::span<const double> x, std::span<const double> w, double upstream,
                           std::span<double> grad_x, std::span<double> grad_w);

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out);
void subtract_backward(std::span<const double> upstream, std::span<double> grad_a,
                       std::span<double> grad_b);

// num / (den + eps); den must be elementwise nonnegative, eps positive.
void div_bias(std::span<const double> num, std::span<const double> den, double eps,
              std::span<double> out);
void div_bias_backward(std::span<const double> num, std::span<const double> den, double eps,
                       std::span<const double> upstream, std::span<double> grad_num,
                       std::span<double> grad_den);

// Clamp to [lo, hi]. The derivative is 1 strictly inside the interval and 0
// on or beyond either bound.
void clip(std::span<const double> x, double lo, double hi, std::span<double> out);
void clip_backward(std::span<const double> x, double lo, double hi, std::span<const double> upstream,
                   std::span<double> grad_x);

// Sliding-window extremum, stride 1, output length n - k + 1. `argext`
// receives the first index attaining the extremum in each window.
void minpool1d(std::span<const double> x, std::size_t k, std::span<double> out,
               std::span<std::size_t> argext);
void maxpool1d(std::span<const double> x, std::size_t k, std::span<double> out,
               std::span<std::size_t> argext);
void pool_backward(std::span<const std::size_t> argext, std::span<const double> upstream,
                   std::span<double> grad_x);

double mean(std::span<const double> x);
void mean_backward(std::size_t n, double upstream, std::span<double> grad_x);

// Mean absolute deviation around the window mean.
double mad(std::span<const double> x);
void mad_backward(std::span<const double> x, double upstream, std::span<double> grad_x);

void activation(ActivationKind kind, std::span<const double> x, std::span<double> out);
void activation_backward(ActivationKind kind, std::span<const double> x,
                         std::span<const double> upstream, std::span<double> grad_x);

// Allocating conveniences.
std::vector<double> subtract(std::span<const double> a, std::span<const double> b);
std::vector<double> div_bias(std::span<const double> num, std::span<const double> den, double eps);
std::vector<double> clip(std::span<const double> x, double lo, double hi);
std::vector<double> minpool1d(std::span<const double> x, std::size_t k);
std::vector<double> maxpool1d(std::span<const double> x, std::size_t k);

} // namespace tinlab::ops
