#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adadata/numerics/tensor.hpp"

namespace adadata::num {

struct AdamConfig {
    double lr = 1e-3; // peak rate
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-9;
    std::uint64_t warmup_steps = 0;
    double warmup_init_lr = 1e-7;
    double clip_norm = 5.0; // <= 0 disables clipping
};

/// Learning rate for the 1-based update `step`: linear from warmup_init_lr to
/// lr over warmup_steps, then lr * sqrt(warmup_steps / step). With
/// warmup_steps == 0 the rate is the constant peak.
double scheduled_lr(const AdamConfig &config, std::uint64_t step);

struct AdamState {
    AdamConfig config;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t step = 0;

    AdamState(AdamConfig cfg, std::span<const Tensor> params);
};

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

// Bias-corrected Adam update at the scheduled rate, using each parameter's
// accumulated gradient (clipped first when config.clip_norm > 0).
void adam_step(std::span<Tensor> params, AdamState &state);

} // namespace adadata::num
