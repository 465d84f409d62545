#pragma once

#include <span>
#include <utility>
#include <vector>

#include "adadata/numerics/rng.hpp"
#include "adadata/numerics/tensor.hpp"

namespace adadata::num {

/// One LSTM layer: gates = [x; h] W + b, with W of shape
/// [(input_dim + hidden_dim) x 4 hidden_dim] in (i, f, g, o) block order.
struct LstmWeights {
    Tensor w;
    Tensor b;

    std::size_t hidden_dim() const { return b.size() / 4; }
    std::size_t input_dim() const { return w.dim(0) - hidden_dim(); }

    // Weights uniform in [-scale, scale], biases zero.
    static LstmWeights init(std::size_t input_dim, std::size_t hidden_dim, Rng &rng, double scale = 0.1);
};

// Standard LSTM cell over a batch of rows. Returns (h, c).
std::pair<Tensor, Tensor> lstm_cell(const Tensor &x, const Tensor &h_prev, const Tensor &c_prev,
                                    const LstmWeights &weights);

struct LstmState {
    std::vector<Tensor> h;
    std::vector<Tensor> c;

    static LstmState zeros(std::size_t layers, std::size_t batch, std::size_t hidden);
};

// Advances a layer stack by one time step and returns the top hidden state.
// Dropout is applied to the input of every layer above the first.
Tensor lstm_stack_step(std::span<const LstmWeights> layers, const Tensor &x, LstmState &state, double dropout_rate,
                       bool training, Rng &rng);

// Uniform [-scale, scale] parameter tensor.
Tensor uniform_param(Shape shape, Rng &rng, double scale = 0.1);

} // namespace adadata::num
