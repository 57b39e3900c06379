#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace tinlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);

// Dense row-major array of doubles with an optional gradient buffer.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor vector(std::vector<double> values);
    static Tensor scalar(double value);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool has_grad() const { return grad_.has_value(); }
    // Allocates a zeroed gradient buffer if none exists.
    std::span<double> grad();
    std::span<const double> grad() const;
    void zero_grad();
    void drop_grad() { grad_.reset(); }

    // Replaces the contents; shape must describe the same number of elements.
    void assign(Shape shape, std::vector<double> values);
    void resize(std::size_t n);

    bool all_finite() const;

    friend bool operator==(const Tensor& a, const Tensor& b)
    {
        return a.shape_ == b.shape_ && a.values_ == b.values_;
    }

private:
    Shape shape_{0};
    std::vector<double> values_;
    std::optional<std::vector<double>> grad_;
};

} // namespace tinlab
