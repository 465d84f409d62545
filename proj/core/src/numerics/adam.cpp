#include "adadata/numerics/adam.hpp"

#include <cmath>

#include "adadata/error.hpp"

namespace adadata::num {

double scheduled_lr(const AdamConfig &config, std::uint64_t step) {
    if (config.warmup_steps == 0) return config.lr;
    const auto w = static_cast<double>(config.warmup_steps);
    const auto n = static_cast<double>(step);
    if (step <= config.warmup_steps) return config.warmup_init_lr + (config.lr - config.warmup_init_lr) * n / w;
    return config.lr * std::sqrt(w / n);
}

AdamState::AdamState(AdamConfig cfg, std::span<const Tensor> params) : config(cfg) {
    for (const auto &p : params) {
        m.emplace_back(p.size(), 0.0);
        v.emplace_back(p.size(), 0.0);
    }
}

double clip_grad_norm(std::span<Tensor> params, double max_norm) {
    double sq = 0.0;
    for (const auto &p : params)
        if (p.has_grad())
            for (double g : p.node()->grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double f = max_norm / norm;
        for (auto &p : params)
            if (p.has_grad())
                for (double &g : p.node()->grad) g *= f;
    }
    return norm;
}

void adam_step(std::span<Tensor> params, AdamState &state) {
    if (params.size() != state.m.size()) throw DimensionError("adam_step: parameter count changed");
    if (state.config.clip_norm > 0.0) clip_grad_norm(params, state.config.clip_norm);
    ++state.step;
    const auto &c = state.config;
    const double lr = scheduled_lr(c, state.step);
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto &p = params[k];
        if (p.size() != state.m[k].size()) throw DimensionError("adam_step: parameter shape changed");
        if (!p.has_grad()) continue;
        const auto &g = p.node()->grad;
        auto value = p.mutable_data();
        auto &m = state.m[k];
        auto &v = state.v[k];
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            value[i] -= lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

} // namespace adadata::num
