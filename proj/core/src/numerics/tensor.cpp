#include "adadata/numerics/tensor.hpp"

#include <sstream>

#include "adadata/error.hpp"

namespace adadata::num {

std::size_t numel(const Shape &shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape &shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ']';
    return os.str();
}

namespace {
void check_shape(const Shape &shape, std::size_t n) {
    for (auto d : shape)
        if (d == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
    if (numel(shape) != n)
        throw DimensionError("shape " + shape_str(shape) + " does not match " + std::to_string(n) +
                             " values");
}
} // namespace

Tensor make_result(Shape shape, std::vector<double> values, bool requires_grad) {
    auto n = std::make_shared<detail::Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const std::size_t n = numel(shape);
    check_shape(shape, n);
    return make_result(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape, values.size());
    return make_result(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::scalar(double value) { return make_result({1}, {value}, false); }

double Tensor::item() const {
    if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw DimensionError("at(i, j) on tensor of shape " + shape_str(shape()));
    return node_->value.at(i * node_->shape[1] + j);
}

std::vector<double> Tensor::grad() const {
    if (node_->grad.empty()) return std::vector<double>(node_->value.size(), 0.0);
    return node_->grad;
}

Tensor Tensor::detach() const { return make_result(node_->shape, node_->value, false); }

namespace {
thread_local Tape *active_tape = nullptr;
}

Tape::Tape() : previous_(active_tape) { active_tape = this; }

Tape::~Tape() { active_tape = previous_; }

Tape *Tape::active() { return active_tape; }

void Tape::record(std::function<void()> backward) { ops_.push_back(std::move(backward)); }

void Tape::backward(const Tensor &loss) {
    if (!loss.defined() || loss.size() != 1)
        throw ContractError("backward() needs a scalar loss, got " +
                            (loss.defined() ? shape_str(loss.shape()) : std::string("undefined")));
    if (loss.requires_grad()) {
        auto &g = loss.node()->grad_buffer();
        g[0] += 1.0;
    }
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    ops_.clear();
}

} // namespace adadata::num
