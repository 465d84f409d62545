#pragma once

#include <span>
#include <utility>
#include <vector>

#include "adadata/numerics/rng.hpp"
#include "adadata/numerics/tensor.hpp"

// Differentiable operations. Matrices are rank-2 tensors [rows x cols];
// batched sequence tensors are rank-3 [batch x time x dim].
namespace adadata::num {

Tensor matmul(const Tensor &a, const Tensor &b);
Tensor transpose(const Tensor &a);

Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor scale(const Tensor &a, double factor);

// x[m x n] + bias[n] broadcast over rows.
Tensor add_bias(const Tensor &x, const Tensor &bias);

Tensor sigmoid(const Tensor &x);
Tensor tanh(const Tensor &x);

// Scalar sum of all elements.
Tensor sum(const Tensor &x);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);

/// Row softmax, stabilized by subtracting each row's maximum.
///
/// When `valid_cols` is non-empty, row i is normalized over its first
/// valid_cols[i] columns only and the remaining entries are exactly zero
/// (padding beyond a sequence end).
Tensor softmax_rows(const Tensor &x, std::span<const std::size_t> valid_cols = {});

// Gathers rows of table[V x d] -> [ids.size() x d].
Tensor embedding(const Tensor &table, std::span<const int> ids);

// Inverted dropout. rate must lie in [0, 1).
Tensor dropout(const Tensor &x, double rate, bool training, Rng &rng);

/// Mean over non-pad rows of -sum_v q(v) log softmax(logits)(v), with
/// q = (1 - smoothing) onehot(target) + smoothing / V. Rows whose target
/// equals pad_id are excluded (pass pad_id < 0 to keep every row). Returns 0
/// when every row is padding.
Tensor label_smoothed_ce(const Tensor &logits, std::span<const int> targets, double smoothing,
                         int pad_id = 0);

// Pointwise LSTM update from pre-activation gates [B x 4H] laid out as
// (input, forget, candidate, output) blocks. Returns (h, c).
std::pair<Tensor, Tensor> lstm_pointwise(const Tensor &gates, const Tensor &c_prev);

// Stacks T tensors [B x d] into [B x T x d].
Tensor stack_time(std::span<const Tensor> steps);

// scores[b][s] = <query[b], keys[b][s]>.
Tensor batch_dot(const Tensor &query, const Tensor &keys);

// out[b] = sum_s weights[b][s] * keys[b][s].
Tensor batch_weighted_sum(const Tensor &weights, const Tensor &keys);

} // namespace adadata::num
