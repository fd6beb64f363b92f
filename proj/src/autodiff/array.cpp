#include "ign/autodiff/array.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "ign/errors.hpp"

namespace ign::ad {

std::string to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) out << ", ";
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Array::Array(Shape shape, double fill) : shape_(std::move(shape)), values_(shape_size(shape_), fill) {}

Array::Array(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
    if (shape_size(shape_) != values_.size()) {
        throw ShapeError("array shape " + to_string(shape_) + " holds " + std::to_string(shape_size(shape_)) +
                         " values, got " + std::to_string(values_.size()));
    }
}

Array Array::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Array(Shape{rows, cols}, std::move(values));
}

Array Array::column(std::vector<double> values) {
    const auto n = values.size();
    return Array(Shape{n, 1}, std::move(values));
}

Array Array::row(std::vector<double> values) {
    const auto n = values.size();
    return Array(Shape{1, n}, std::move(values));
}

Array Array::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> values;
    values.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged rows in Array::from_rows");
        values.insert(values.end(), row.begin(), row.end());
    }
    return Array(Shape{r, c}, std::move(values));
}

std::size_t Array::rows() const noexcept {
    return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t Array::cols() const noexcept {
    switch (shape_.size()) {
        case 0: return 1;
        case 1: return shape_[0];
        case 2: return shape_[1];
        default: return values_.size();
    }
}

double Array::item() const {
    if (values_.size() != 1) {
        throw ContractError("item() on array of shape " + to_string(shape_));
    }
    return values_[0];
}

bool Array::all_finite() const noexcept {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace ign::ad
