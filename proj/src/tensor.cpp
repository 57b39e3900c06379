#include "tinlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tinlab/errors.hpp"

namespace tinlab {

std::size_t shape_size(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

namespace {

void check_shape(const Shape& shape, std::size_t n)
{
    if (shape.empty())
        throw DimensionError("tensor shape must have at least one dimension");
    for (auto d : shape)
        if (d == 0 && n != 0)
            throw DimensionError("tensor dimensions must be positive");
    if (shape_size(shape) != n)
        throw DimensionError("tensor shape does not match value count");
}

} // namespace

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape))
{
    check_shape(shape_, shape_size(shape_));
    values_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape))
    , values_(std::move(values))
{
    check_shape(shape_, values_.size());
}

Tensor Tensor::vector(std::vector<double> values)
{
    Shape s{values.size()};
    return Tensor(std::move(s), std::move(values));
}

Tensor Tensor::scalar(double value)
{
    return Tensor({1}, std::vector<double>{value});
}

std::span<double> Tensor::grad()
{
    if (!grad_)
        grad_.emplace(values_.size(), 0.0);
    return *grad_;
}

std::span<const double> Tensor::grad() const
{
    if (!grad_)
        throw UsageError("tensor has no gradient buffer");
    return *grad_;
}

void Tensor::zero_grad()
{
    if (grad_)
        std::fill(grad_->begin(), grad_->end(), 0.0);
}

void Tensor::assign(Shape shape, std::vector<double> values)
{
    check_shape(shape, values.size());
    shape_ = std::move(shape);
    values_ = std::move(values);
    if (grad_)
        grad_->assign(values_.size(), 0.0);
}

void Tensor::resize(std::size_t n)
{
    if (values_.size() == n)
        return;
    shape_ = Shape{n};
    values_.assign(n, 0.0);
    if (grad_)
        grad_->assign(n, 0.0);
}

bool Tensor::all_finite() const
{
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(values_.begin(), values_.end(), finite))
        return false;
    return !grad_ || std::all_of(grad_->begin(), grad_->end(), finite);
}

} // namespace tinlab
