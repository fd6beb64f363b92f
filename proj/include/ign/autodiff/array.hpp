#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ign::ad {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

// Dense row-major array of doubles. Rank 0 is a scalar, rank 1 is treated as a
// single row and rank 2 as a matrix by the graph ops.
class Array {
public:
    Array() : shape_{}, values_(1, 0.0) {}
    explicit Array(Shape shape, double fill = 0.0);
    Array(Shape shape, std::vector<double> values);

    static Array scalar(double value) { return Array(Shape{}, std::vector<double>{value}); }
    static Array matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Array column(std::vector<double> values);
    static Array row(std::vector<double> values);
    static Array from_rows(std::initializer_list<std::initializer_list<double>> rows);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return values_.size(); }

    // 2-D view used by matrix ops: scalars are 1x1 and vectors are 1xn.
    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

    // Value of a single-element array.
    double item() const;

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& storage() noexcept { return values_; }

    bool all_finite() const noexcept;
    bool operator==(const Array& other) const = default;

private:
    Shape shape_;
    std::vector<double> values_;
};

std::size_t shape_size(const Shape& shape);

}  // namespace ign::ad
