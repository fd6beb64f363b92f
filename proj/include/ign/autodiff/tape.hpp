#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ign/autodiff/array.hpp"

namespace ign::ad {

// A named trainable array owned by a network. Graphs bind parameters as leaves.
struct Parameter {
    std::string name;
    Array value;
    bool trainable = true;
};

using Gradients = std::unordered_map<const Parameter*, Array>;

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    bool valid() const noexcept { return tape_ != nullptr; }
    Tape& tape() const noexcept { return *tape_; }
    std::size_t id() const noexcept { return id_; }

    const Array& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Define-by-run computation graph. Values are computed eagerly when an op is
// recorded; node ids are a topological order, so backward walks ids downward.
// Backward rules are themselves recorded as ops, which is what makes
// gradients-of-gradients (the critic's input-gradient penalty) possible.
class Tape {
public:
    // Backward rule: receives the node itself and the upstream gradient, returns one
    // gradient per input (an invalid Var means "no gradient").
    using Vjp = std::function<std::vector<Var>(const Var& self, const Var& grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Array value);
    Var input(Array value, bool requires_grad = true, std::string name = {});
    // Binds a parameter as a leaf. Binding the same parameter twice returns the same node.
    Var parameter(const Parameter& param);

    // Records an op node. `second_order` marks whether the op's backward rule is
    // itself differentiable in the sense needed by input_gradient.
    Var record(std::string_view op, Array value, std::vector<Var> inputs, Vjp vjp, bool second_order = true);

    // Reverse-mode gradients of a scalar root. With create_graph the returned
    // nodes are differentiable and may feed further ops.
    std::vector<Var> grad(const Var& root, std::span<const Var> wrt, bool create_graph = false);

    // Gradient of a scalar root with respect to every bound parameter.
    Gradients backward(const Var& root);

    // d(root)/d(input) as a differentiable node. Throws CapabilityError when an op
    // between input and root is not second-order capable.
    Var input_gradient(const Var& root, const Var& input);

    bool grad_enabled() const noexcept { return grad_enabled_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::string_view op_name(const Var& v) const { return nodes_[v.id()].op; }

private:
    friend class Var;

    struct Node {
        std::string op;
        Array value;
        std::vector<std::size_t> inputs;
        Vjp vjp;
        bool requires_grad = false;
        bool second_order = true;
        const Parameter* param = nullptr;
    };

    Var push(Node node);
    void check_second_order(const Var& root, const Var& input) const;

    std::deque<Node> nodes_;
    std::vector<std::pair<const Parameter*, std::size_t>> bound_;
    bool grad_enabled_ = true;
};

// Returns the (already computed) value of a graph root.
const Array& forward(const Var& root);

// Elementwise ops require identical shapes. Matrix ops require rank-2 operands.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, Shape shape);

// (r x c) + (1 x c), bias broadcast over rows.
Var add_row(const Var& a, const Var& bias);

Var sum(const Var& a);
Var mean(const Var& a);
Var sum_rows(const Var& a);
Var sum_cols(const Var& a);
Var broadcast_rows(const Var& a, std::size_t rows);
Var broadcast_cols(const Var& a, std::size_t cols);
Var expand(const Var& a, Shape shape);

Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var softplus(const Var& a);
Var sigmoid(const Var& a);
Var cos(const Var& a);
Var sin(const Var& a);
Var square(const Var& a);
// 1/x with 1/0 defined as 0.
Var reciprocal(const Var& a);
// Euclidean norm of each row: (r x c) -> (r x 1); zero rows have zero gradient.
Var norm_rows(const Var& a);

Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, std::size_t offset, std::size_t width);
Var pad_cols(const Var& a, std::size_t offset, std::size_t total);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(const Var& a, std::size_t offset, std::size_t count);
Var pad_rows(const Var& a, std::size_t offset, std::size_t total);
// out(i, 0) = a(i, index[i]).
Var gather_cols(const Var& a, std::span<const std::size_t> index);
Var scatter_cols(const Var& a, std::span<const std::size_t> index, std::size_t cols);
// Each row repeated `times` times consecutively.
Var repeat_rows(const Var& a, std::size_t times);
// Sums consecutive groups of `group` rows; inverse pattern of repeat_rows.
Var group_sum_rows(const Var& a, std::size_t group);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator-(const Var& a) { return neg(a); }

}  // namespace ign::ad
