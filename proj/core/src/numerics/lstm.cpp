#include "adadata/numerics/lstm.hpp"

#include <array>

#include "adadata/error.hpp"
#include "adadata/numerics/ops.hpp"

namespace adadata::num {

Tensor uniform_param(Shape shape, Rng &rng, double scale) {
    std::vector<double> v(numel(shape));
    for (auto &x : v) x = rng.uniform(-scale, scale);
    return Tensor::from(std::move(shape), std::move(v), true);
}

LstmWeights LstmWeights::init(std::size_t input_dim, std::size_t hidden_dim, Rng &rng, double scale) {
    if (input_dim == 0 || hidden_dim == 0) throw ParameterError("LSTM dimensions must be positive");
    LstmWeights lw;
    lw.w = uniform_param({input_dim + hidden_dim, 4 * hidden_dim}, rng, scale);
    lw.b = Tensor::zeros({4 * hidden_dim}, true);
    return lw;
}

std::pair<Tensor, Tensor> lstm_cell(const Tensor &x, const Tensor &h_prev, const Tensor &c_prev,
                                    const LstmWeights &weights) {
    if (x.rank() != 2 || h_prev.rank() != 2 || x.dim(1) != weights.input_dim() ||
        h_prev.dim(1) != weights.hidden_dim())
        throw DimensionError("lstm_cell: input " + shape_str(x.shape()) + " / state " + shape_str(h_prev.shape()) +
                             " do not fit weights " + shape_str(weights.w.shape()));
    const std::array<Tensor, 2> xh{x, h_prev};
    Tensor gates = add_bias(matmul(concat_cols(xh), weights.w), weights.b);
    return lstm_pointwise(gates, c_prev);
}

LstmState LstmState::zeros(std::size_t layers, std::size_t batch, std::size_t hidden) {
    LstmState s;
    for (std::size_t l = 0; l < layers; ++l) {
        s.h.push_back(Tensor::zeros({batch, hidden}));
        s.c.push_back(Tensor::zeros({batch, hidden}));
    }
    return s;
}

Tensor lstm_stack_step(std::span<const LstmWeights> layers, const Tensor &x, LstmState &state, double dropout_rate,
                       bool training, Rng &rng) {
    if (state.h.size() != layers.size()) throw DimensionError("lstm_stack_step: state depth mismatch");
    Tensor input = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (l > 0) input = dropout(input, dropout_rate, training, rng);
        auto [h, c] = lstm_cell(input, state.h[l], state.c[l], layers[l]);
        state.h[l] = h;
        state.c[l] = c;
        input = h;
    }
    return input;
}

} // namespace adadata::num
