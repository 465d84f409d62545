#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace adadata::num {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape &shape);
std::string shape_str(const Shape &shape);

namespace detail {
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad; // empty until first accumulation
    bool requires_grad = false;

    std::vector<double> &grad_buffer() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
        return grad;
    }
};
} // namespace detail

/// Dense row-major array of doubles with optional gradient tracking.
///
/// A Tensor is a cheap handle: copies share storage. Results of operations
/// are never modified after creation; only leaf parameters are updated in
/// place (by the optimizer, between steps).
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape &shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t size() const { return node_->value.size(); }

    std::span<const double> data() const { return node_->value; }
    // Only for leaves (parameters, test fixtures); never for op results in flight.
    std::span<double> mutable_data() { return node_->value; }

    double item() const;
    double at(std::size_t i, std::size_t j) const;

    bool requires_grad() const { return node_ && node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }

    // Accumulated gradient; all zeros if none has been accumulated.
    std::vector<double> grad() const;
    bool has_grad() const { return node_ && !node_->grad.empty(); }
    void zero_grad() { node_->grad.clear(); }

    // Deep copy of the value, detached from any graph.
    Tensor detach() const;

    const std::shared_ptr<detail::Node> &node() const { return node_; }

  private:
    explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
    friend Tensor make_result(Shape, std::vector<double>, bool);

    std::shared_ptr<detail::Node> node_;
};

// Internal: creates an op result node.
Tensor make_result(Shape shape, std::vector<double> values, bool requires_grad);

/// Ordered record of differentiable operations for one step.
///
/// Constructing a Tape makes it the active tape of the calling thread until it
/// is destroyed. Operations record a backward closure only when a tape is
/// active and at least one operand requires a gradient; without an active
/// tape every op is a plain forward computation.
class Tape {
  public:
    Tape();
    ~Tape();
    Tape(const Tape &) = delete;
    Tape &operator=(const Tape &) = delete;

    static Tape *active();

    void record(std::function<void()> backward);
    std::size_t size() const { return ops_.size(); }

    // Seeds d(loss)/d(loss) = 1 and replays the recorded closures in reverse
    // order, each exactly once. The tape is empty afterwards.
    void backward(const Tensor &loss);

  private:
    std::vector<std::function<void()>> ops_;
    Tape *previous_;
};

} // namespace adadata::num
