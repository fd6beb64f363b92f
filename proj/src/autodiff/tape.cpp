#include "ign/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>

#include "ign/errors.hpp"

namespace ign::ad {

namespace {

void require_same_shape(const Var& a, const Var& b, std::string_view op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

void require_matrix(const Var& a, std::string_view op) {
    if (a.value().rank() != 2) {
        throw ShapeError(std::string(op) + ": expected a rank-2 operand, got " + to_string(a.shape()));
    }
}

void require_same_tape(const Var& a, const Var& b) {
    if (&a.tape() != &b.tape()) throw ContractError("operands recorded on different tapes");
}

template <class F>
Array map_values(const Array& a, F f) {
    Array out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

template <class F>
Array zip_values(const Array& a, const Array& b, F f) {
    Array out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double stable_softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

const Array& Var::value() const {
    return tape_->nodes_[id_].value;
}

bool Var::requires_grad() const {
    return tape_->nodes_[id_].requires_grad;
}

const Array& forward(const Var& root) {
    return root.value();
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Array value) {
    Node node;
    node.op = "constant";
    node.value = std::move(value);
    return push(std::move(node));
}

Var Tape::input(Array value, bool requires_grad, std::string name) {
    Node node;
    node.op = name.empty() ? "input" : "input:" + name;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    return push(std::move(node));
}

Var Tape::parameter(const Parameter& param) {
    for (const auto& [p, id] : bound_) {
        if (p == &param) return Var(this, id);
    }
    Node node;
    node.op = "parameter:" + param.name;
    node.value = param.value;
    node.requires_grad = true;
    node.param = &param;
    Var v = push(std::move(node));
    bound_.emplace_back(&param, v.id());
    return v;
}

Var Tape::record(std::string_view op, Array value, std::vector<Var> inputs, Vjp vjp, bool second_order) {
    Node node;
    node.op = std::string(op);
    node.value = std::move(value);
    node.second_order = second_order;
    node.inputs.reserve(inputs.size());
    bool any = false;
    for (const auto& in : inputs) {
        if (&in.tape() != this) throw ContractError(std::string(op) + ": input recorded on a different tape");
        node.inputs.push_back(in.id());
        any = any || nodes_[in.id()].requires_grad;
    }
    node.requires_grad = grad_enabled_ && any;
    if (node.requires_grad) node.vjp = std::move(vjp);
    return push(std::move(node));
}

std::vector<Var> Tape::grad(const Var& root, std::span<const Var> wrt, bool create_graph) {
    if (&root.tape() != this) throw ContractError("grad: root recorded on a different tape");
    if (root.value().size() != 1) {
        throw ContractError("backward requires a scalar root, got shape " + to_string(root.shape()));
    }

    struct ModeGuard {
        bool& flag;
        bool saved;
        ~ModeGuard() { flag = saved; }
    } guard{grad_enabled_, grad_enabled_};
    grad_enabled_ = create_graph;

    const std::size_t root_id = root.id();
    std::vector<Var> adjoint(root_id + 1);
    adjoint[root_id] = constant(Array(root.shape(), 1.0));

    // Accumulation order is fixed: descending node id, inputs in recorded order.
    for (std::size_t id = root_id + 1; id-- > 0;) {
        if (!adjoint[id].valid()) continue;
        const Node& node = nodes_[id];
        if (!node.requires_grad || !node.vjp) continue;
        const std::vector<Var> input_grads = node.vjp(Var(this, id), adjoint[id]);
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
            const std::size_t in = node.inputs[k];
            if (k >= input_grads.size() || !input_grads[k].valid() || !nodes_[in].requires_grad) continue;
            adjoint[in] = adjoint[in].valid() ? add(adjoint[in], input_grads[k]) : input_grads[k];
        }
    }

    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const auto& w : wrt) {
        if (w.id() <= root_id && adjoint[w.id()].valid()) {
            out.push_back(adjoint[w.id()]);
        } else {
            out.push_back(constant(Array(w.shape(), 0.0)));
        }
    }
    return out;
}

Gradients Tape::backward(const Var& root) {
    std::vector<Var> leaves;
    leaves.reserve(bound_.size());
    for (const auto& [p, id] : bound_) leaves.push_back(Var(this, id));
    auto grads = grad(root, leaves, false);
    Gradients out;
    for (std::size_t i = 0; i < bound_.size(); ++i) out.emplace(bound_[i].first, grads[i].value());
    return out;
}

void Tape::check_second_order(const Var& root, const Var& input) const {
    const std::size_t lo = input.id();
    const std::size_t hi = root.id();
    if (lo > hi) return;
    std::vector<char> depends(hi - lo + 1, 0);
    depends[0] = 1;
    for (std::size_t id = lo + 1; id <= hi; ++id) {
        for (std::size_t in : nodes_[id].inputs) {
            if (in >= lo && depends[in - lo]) {
                depends[id - lo] = 1;
                break;
            }
        }
    }
    std::vector<char> on_path(hi - lo + 1, 0);
    on_path[hi - lo] = depends[hi - lo];
    for (std::size_t id = hi + 1; id-- > lo;) {
        if (!on_path[id - lo]) continue;
        if (!nodes_[id].second_order) {
            throw CapabilityError("op '" + nodes_[id].op +
                                  "' lies between the input and the root and is not second-order capable");
        }
        for (std::size_t in : nodes_[id].inputs) {
            if (in >= lo && depends[in - lo]) on_path[in - lo] = 1;
        }
    }
}

Var Tape::input_gradient(const Var& root, const Var& input) {
    check_second_order(root, input);
    const Var wrt[] = {input};
    return grad(root, wrt, true).front();
}

// ---------------------------------------------------------------------------
// Elementwise arithmetic

Var add(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_same_shape(a, b, "add");
    return a.tape().record("add", zip_values(a.value(), b.value(), std::plus<>()), {a, b},
                           [](const Var&, const Var& g) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_same_shape(a, b, "sub");
    return a.tape().record("sub", zip_values(a.value(), b.value(), std::minus<>()), {a, b},
                           [](const Var&, const Var& g) { return std::vector<Var>{g, neg(g)}; });
}

Var mul(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_same_shape(a, b, "mul");
    return a.tape().record("mul", zip_values(a.value(), b.value(), std::multiplies<>()), {a, b},
                           [a, b](const Var&, const Var& g) {
                               return std::vector<Var>{a.requires_grad() ? mul(g, b) : Var{},
                                                       b.requires_grad() ? mul(g, a) : Var{}};
                           });
}

Var div(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_same_shape(a, b, "div");
    return a.tape().record("div", zip_values(a.value(), b.value(), std::divides<>()), {a, b},
                           [a, b](const Var&, const Var& g) {
                               return std::vector<Var>{a.requires_grad() ? div(g, b) : Var{},
                                                       b.requires_grad() ? neg(div(mul(g, a), mul(b, b))) : Var{}};
                           });
}

Var neg(const Var& a) {
    return a.tape().record("neg", map_values(a.value(), [](double x) { return -x; }), {a},
                           [](const Var&, const Var& g) { return std::vector<Var>{neg(g)}; });
}

Var scale(const Var& a, double factor) {
    return a.tape().record("scale", map_values(a.value(), [factor](double x) { return x * factor; }), {a},
                           [factor](const Var&, const Var& g) { return std::vector<Var>{scale(g, factor)}; });
}

Var add_scalar(const Var& a, double offset) {
    return a.tape().record("add_scalar", map_values(a.value(), [offset](double x) { return x + offset; }), {a},
                           [](const Var&, const Var& g) { return std::vector<Var>{g}; });
}

// ---------------------------------------------------------------------------
// Matrix ops

Var matmul(const Var& a, const Var& b) {
    require_same_tape(a, b);
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    const Array& x = a.value();
    const Array& y = b.value();
    const std::size_t n = x.rows(), k = x.cols(), m = y.cols();
    if (y.rows() != k) {
        throw ShapeError("matmul: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
    }
    Array out(Shape{n, m});
    const double* xv = x.values().data();
    const double* yv = y.values().data();
    double* ov = out.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        double* orow = ov + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double s = xv[i * k + p];
            if (s == 0.0) continue;
            const double* yrow = yv + p * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += s * yrow[j];
        }
    }
    return a.tape().record("matmul", std::move(out), {a, b}, [a, b](const Var&, const Var& g) {
        return std::vector<Var>{a.requires_grad() ? matmul(g, transpose(b)) : Var{},
                                b.requires_grad() ? matmul(transpose(a), g) : Var{}};
    });
}

Var transpose(const Var& a) {
    require_matrix(a, "transpose");
    const Array& x = a.value();
    Array out(Shape{x.cols(), x.rows()});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
    return a.tape().record("transpose", std::move(out), {a},
                           [](const Var&, const Var& g) { return std::vector<Var>{transpose(g)}; });
}

Var reshape(const Var& a, Shape shape) {
    if (shape_size(shape) != a.value().size()) {
        throw ShapeError("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
    }
    Array out(std::move(shape), std::vector<double>(a.value().values().begin(), a.value().values().end()));
    return a.tape().record("reshape", std::move(out), {a}, [a](const Var&, const Var& g) {
        return std::vector<Var>{reshape(g, a.shape())};
    });
}

Var add_row(const Var& a, const Var& bias) {
    require_same_tape(a, bias);
    require_matrix(a, "add_row");
    require_matrix(bias, "add_row");
    const Array& x = a.value();
    const Array& b = bias.value();
    if (b.rows() != 1 || b.cols() != x.cols()) {
        throw ShapeError("add_row: shape mismatch " + to_string(x.shape()) + " vs " + to_string(b.shape()));
    }
    Array out = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += b[j];
    return a.tape().record("add_row", std::move(out), {a, bias}, [bias](const Var&, const Var& g) {
        return std::vector<Var>{g, bias.requires_grad() ? sum_rows(g) : Var{}};
    });
}

// ---------------------------------------------------------------------------
// Reductions and broadcasts

Var sum(const Var& a) {
    double total = 0.0;
    for (double v : a.value().values()) total += v;
    return a.tape().record("sum", Array::scalar(total), {a}, [a](const Var&, const Var& g) {
        return std::vector<Var>{expand(g, a.shape())};
    });
}

Var mean(const Var& a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var sum_rows(const Var& a) {
    require_matrix(a, "sum_rows");
    const Array& x = a.value();
    Array out(Shape{1, x.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out[j] += x(i, j);
    const std::size_t rows = x.rows();
    return a.tape().record("sum_rows", std::move(out), {a}, [rows](const Var&, const Var& g) {
        return std::vector<Var>{broadcast_rows(g, rows)};
    });
}

Var sum_cols(const Var& a) {
    require_matrix(a, "sum_cols");
    const Array& x = a.value();
    Array out(Shape{x.rows(), 1});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out[i] += x(i, j);
    const std::size_t cols = x.cols();
    return a.tape().record("sum_cols", std::move(out), {a}, [cols](const Var&, const Var& g) {
        return std::vector<Var>{broadcast_cols(g, cols)};
    });
}

Var broadcast_rows(const Var& a, std::size_t rows) {
    require_matrix(a, "broadcast_rows");
    const Array& x = a.value();
    if (x.rows() != 1) throw ShapeError("broadcast_rows: expected a single row, got " + to_string(x.shape()));
    Array out(Shape{rows, x.cols()});
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x[j];
    return a.tape().record("broadcast_rows", std::move(out), {a},
                           [](const Var&, const Var& g) { return std::vector<Var>{sum_rows(g)}; });
}

Var broadcast_cols(const Var& a, std::size_t cols) {
    require_matrix(a, "broadcast_cols");
    const Array& x = a.value();
    if (x.cols() != 1) throw ShapeError("broadcast_cols: expected a single column, got " + to_string(x.shape()));
    Array out(Shape{x.rows(), cols});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = x[i];
    return a.tape().record("broadcast_cols", std::move(out), {a},
                           [](const Var&, const Var& g) { return std::vector<Var>{sum_cols(g)}; });
}

Var expand(const Var& a, Shape shape) {
    if (a.value().size() != 1) throw ShapeError("expand: expected a single value, got " + to_string(a.shape()));
    Array out(std::move(shape), a.value()[0]);
    return a.tape().record("expand", std::move(out), {a}, [a](const Var&, const Var& g) {
        return std::vector<Var>{reshape(sum(g), a.shape())};
    });
}

// ---------------------------------------------------------------------------
// Activations

Var relu(const Var& a) {
    // The backward mask is treated as constant; ReLU is excluded from
    // second-order paths because its curvature is identically zero.
    return a.tape().record(
        "relu", map_values(a.value(), [](double x) { return x > 0 ? x : 0.0; }), {a},
        [a](const Var&, const Var& g) {
            Array mask = map_values(a.value(), [](double x) { return x > 0 ? 1.0 : 0.0; });
            return std::vector<Var>{mul(g, g.tape().constant(std::move(mask)))};
        },
        false);
}

Var leaky_relu(const Var& a, double slope) {
    // Subgradient convention: derivative is `slope` for x <= 0 and 1 for x > 0.
    return a.tape().record("leaky_relu", map_values(a.value(), [slope](double x) { return x > 0 ? x : slope * x; }),
                           {a}, [a, slope](const Var&, const Var& g) {
                               Array mask = map_values(a.value(), [slope](double x) { return x > 0 ? 1.0 : slope; });
                               return std::vector<Var>{mul(g, g.tape().constant(std::move(mask)))};
                           });
}

Var softplus(const Var& a) {
    return a.tape().record("softplus", map_values(a.value(), stable_softplus), {a},
                           [a](const Var&, const Var& g) { return std::vector<Var>{mul(g, sigmoid(a))}; });
}

Var sigmoid(const Var& a) {
    return a.tape().record("sigmoid", map_values(a.value(), stable_sigmoid), {a}, [](const Var& self, const Var& g) {
        return std::vector<Var>{mul(g, mul(self, add_scalar(neg(self), 1.0)))};
    });
}

Var cos(const Var& a) {
    return a.tape().record("cos", map_values(a.value(), [](double x) { return std::cos(x); }), {a},
                           [a](const Var&, const Var& g) { return std::vector<Var>{neg(mul(g, sin(a)))}; });
}

Var sin(const Var& a) {
    return a.tape().record("sin", map_values(a.value(), [](double x) { return std::sin(x); }), {a},
                           [a](const Var&, const Var& g) { return std::vector<Var>{mul(g, cos(a))}; });
}

Var square(const Var& a) {
    return a.tape().record("square", map_values(a.value(), [](double x) { return x * x; }), {a},
                           [a](const Var&, const Var& g) { return std::vector<Var>{scale(mul(g, a), 2.0)}; });
}

Var reciprocal(const Var& a) {
    return a.tape().record("reciprocal", map_values(a.value(), [](double x) { return x == 0.0 ? 0.0 : 1.0 / x; }),
                           {a}, [](const Var& self, const Var& g) {
                               return std::vector<Var>{neg(mul(g, mul(self, self)))};
                           });
}

Var norm_rows(const Var& a) {
    require_matrix(a, "norm_rows");
    const Array& x = a.value();
    Array out(Shape{x.rows(), 1});
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j) * x(i, j);
        out[i] = std::sqrt(s);
    }
    const std::size_t cols = x.cols();
    return a.tape().record("norm_rows", std::move(out), {a}, [a, cols](const Var& self, const Var& g) {
        return std::vector<Var>{mul(a, broadcast_cols(mul(g, reciprocal(self)), cols))};
    });
}

// ---------------------------------------------------------------------------
// Indexing and layout

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat_cols: no operands");
    const std::size_t rows = parts.front().value().rows();
    std::size_t total = 0;
    for (const auto& p : parts) {
        require_matrix(p, "concat_cols");
        require_same_tape(p, parts.front());
        if (p.value().rows() != rows) {
            throw ShapeError("concat_cols: shape mismatch " + to_string(parts.front().shape()) + " vs " +
                             to_string(p.shape()));
        }
        total += p.value().cols();
    }
    Array out(Shape{rows, total});
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> widths;
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const Array& x = p.value();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) out(i, offset + j) = x(i, j);
        offsets.push_back(offset);
        widths.push_back(x.cols());
        offset += x.cols();
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return parts.front().tape().record("concat_cols", std::move(out), inputs,
                                       [inputs, offsets, widths](const Var&, const Var& g) {
                                           std::vector<Var> grads(inputs.size());
                                           for (std::size_t k = 0; k < inputs.size(); ++k) {
                                               if (inputs[k].requires_grad())
                                                   grads[k] = slice_cols(g, offsets[k], widths[k]);
                                           }
                                           return grads;
                                       });
}

Var slice_cols(const Var& a, std::size_t offset, std::size_t width) {
    require_matrix(a, "slice_cols");
    const Array& x = a.value();
    if (offset + width > x.cols()) {
        throw ShapeError("slice_cols: columns [" + std::to_string(offset) + ", " + std::to_string(offset + width) +
                         ") out of range for " + to_string(x.shape()));
    }
    Array out(Shape{x.rows(), width});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < width; ++j) out(i, j) = x(i, offset + j);
    const std::size_t total = x.cols();
    return a.tape().record("slice_cols", std::move(out), {a}, [offset, total](const Var&, const Var& g) {
        return std::vector<Var>{pad_cols(g, offset, total)};
    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat_rows: no operands");
    const std::size_t cols = parts.front().value().cols();
    std::size_t total = 0;
    for (const auto& p : parts) {
        require_matrix(p, "concat_rows");
        require_same_tape(p, parts.front());
        if (p.value().cols() != cols) {
            throw ShapeError("concat_rows: shape mismatch " + to_string(parts.front().shape()) + " vs " +
                             to_string(p.shape()));
        }
        total += p.value().rows();
    }
    std::vector<double> values;
    values.reserve(total * cols);
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
        offsets.push_back(values.size() / cols);
        values.insert(values.end(), p.value().values().begin(), p.value().values().end());
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return parts.front().tape().record("concat_rows", Array(Shape{total, cols}, std::move(values)), inputs,
                                       [inputs, offsets](const Var&, const Var& g) {
                                           std::vector<Var> grads(inputs.size());
                                           for (std::size_t k = 0; k < inputs.size(); ++k) {
                                               if (inputs[k].requires_grad())
                                                   grads[k] = slice_rows(g, offsets[k], inputs[k].value().rows());
                                           }
                                           return grads;
                                       });
}

Var slice_rows(const Var& a, std::size_t offset, std::size_t count) {
    require_matrix(a, "slice_rows");
    const Array& x = a.value();
    if (offset + count > x.rows()) {
        throw ShapeError("slice_rows: rows [" + std::to_string(offset) + ", " + std::to_string(offset + count) +
                         ") out of range for " + to_string(x.shape()));
    }
    const auto begin = x.values().begin() + static_cast<std::ptrdiff_t>(offset * x.cols());
    Array out(Shape{count, x.cols()}, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * x.cols())));
    const std::size_t total = x.rows();
    return a.tape().record("slice_rows", std::move(out), {a}, [offset, total](const Var&, const Var& g) {
        return std::vector<Var>{pad_rows(g, offset, total)};
    });
}

Var pad_rows(const Var& a, std::size_t offset, std::size_t total) {
    require_matrix(a, "pad_rows");
    const Array& x = a.value();
    if (offset + x.rows() > total) throw ShapeError("pad_rows: target height too small");
    Array out(Shape{total, x.cols()});
    std::copy(x.values().begin(), x.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(offset * x.cols()));
    const std::size_t count = x.rows();
    return a.tape().record("pad_rows", std::move(out), {a}, [offset, count](const Var&, const Var& g) {
        return std::vector<Var>{slice_rows(g, offset, count)};
    });
}

Var pad_cols(const Var& a, std::size_t offset, std::size_t total) {
    require_matrix(a, "pad_cols");
    const Array& x = a.value();
    if (offset + x.cols() > total) throw ShapeError("pad_cols: target width too small");
    Array out(Shape{x.rows(), total});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, offset + j) = x(i, j);
    const std::size_t width = x.cols();
    return a.tape().record("pad_cols", std::move(out), {a}, [offset, width](const Var&, const Var& g) {
        return std::vector<Var>{slice_cols(g, offset, width)};
    });
}

Var gather_cols(const Var& a, std::span<const std::size_t> index) {
    require_matrix(a, "gather_cols");
    const Array& x = a.value();
    if (index.size() != x.rows()) {
        throw ShapeError("gather_cols: " + std::to_string(index.size()) + " indices for " + to_string(x.shape()));
    }
    Array out(Shape{x.rows(), 1});
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (index[i] >= x.cols()) throw IndexError("gather_cols: column " + std::to_string(index[i]) + " out of range");
        out[i] = x(i, index[i]);
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    const std::size_t cols = x.cols();
    return a.tape().record("gather_cols", std::move(out), {a}, [idx, cols](const Var&, const Var& g) {
        return std::vector<Var>{scatter_cols(g, idx, cols)};
    });
}

Var scatter_cols(const Var& a, std::span<const std::size_t> index, std::size_t cols) {
    require_matrix(a, "scatter_cols");
    const Array& x = a.value();
    if (x.cols() != 1 || index.size() != x.rows()) throw ShapeError("scatter_cols: expected one column per index");
    Array out(Shape{x.rows(), cols});
    for (std::size_t i = 0; i < x.rows(); ++i) out(i, index[i]) = x[i];
    std::vector<std::size_t> idx(index.begin(), index.end());
    return a.tape().record("scatter_cols", std::move(out), {a}, [idx](const Var&, const Var& g) {
        return std::vector<Var>{gather_cols(g, idx)};
    });
}

Var repeat_rows(const Var& a, std::size_t times) {
    require_matrix(a, "repeat_rows");
    const Array& x = a.value();
    Array out(Shape{x.rows() * times, x.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t t = 0; t < times; ++t)
            for (std::size_t j = 0; j < x.cols(); ++j) out(i * times + t, j) = x(i, j);
    return a.tape().record("repeat_rows", std::move(out), {a}, [times](const Var&, const Var& g) {
        return std::vector<Var>{group_sum_rows(g, times)};
    });
}

Var group_sum_rows(const Var& a, std::size_t group) {
    require_matrix(a, "group_sum_rows");
    const Array& x = a.value();
    if (group == 0 || x.rows() % group != 0) {
        throw ShapeError("group_sum_rows: " + std::to_string(x.rows()) + " rows not divisible by " +
                         std::to_string(group));
    }
    Array out(Shape{x.rows() / group, x.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i / group, j) += x(i, j);
    return a.tape().record("group_sum_rows", std::move(out), {a}, [group](const Var&, const Var& g) {
        return std::vector<Var>{repeat_rows(g, group)};
    });
}

}  // namespace ign::ad
