#include "adadata/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "adadata/error.hpp"

namespace adadata::num {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

using NodePtr = std::shared_ptr<detail::Node>;

bool tracking(std::initializer_list<const Tensor *> inputs) {
    if (!Tape::active()) return false;
    for (const Tensor *t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

bool tracking(std::span<const Tensor> inputs) {
    if (!Tape::active()) return false;
    return std::any_of(inputs.begin(), inputs.end(), [](const Tensor &t) { return t.requires_grad(); });
}

void record(std::function<void()> fn) { Tape::active()->record(std::move(fn)); }

void require_defined(const Tensor &t, const char *op) {
    if (!t.defined()) throw ContractError(std::string(op) + ": undefined operand");
}

void require_rank(const Tensor &t, std::size_t rank, const char *op) {
    require_defined(t, op);
    if (t.rank() != rank)
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             shape_str(t.shape()));
}

void require_same(const Tensor &a, const Tensor &b, const char *op) {
    require_defined(a, op);
    require_defined(b, op);
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
}

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

Tensor matmul(const Tensor &a, const Tensor &b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k)
        throw DimensionError("matmul: inner dimensions disagree for " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()));
    std::vector<double> out(m * n);
    MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
    const bool track = tracking({&a, &b});
    Tensor c = make_result({m, n}, std::move(out), track);
    if (track) {
        record([cn = c.node(), an = a.node(), bn = b.node(), m, k, n] {
            if (cn->grad.empty()) return;
            ConstMap dc(cn->grad.data(), m, n);
            if (an->requires_grad)
                MutMap(an->grad_buffer().data(), m, k).noalias() += dc * ConstMap(bn->value.data(), k, n).transpose();
            if (bn->requires_grad)
                MutMap(bn->grad_buffer().data(), k, n).noalias() += ConstMap(an->value.data(), m, k).transpose() * dc;
        });
    }
    return c;
}

Tensor transpose(const Tensor &a) {
    require_rank(a, 2, "transpose");
    const std::size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> out(m * n);
    MutMap(out.data(), n, m) = ConstMap(a.data().data(), m, n).transpose();
    const bool track = tracking({&a});
    Tensor t = make_result({n, m}, std::move(out), track);
    if (track) {
        record([tn = t.node(), an = a.node(), m, n] {
            if (tn->grad.empty()) return;
            MutMap(an->grad_buffer().data(), m, n) += ConstMap(tn->grad.data(), n, m).transpose();
        });
    }
    return t;
}

namespace {
template <class Fwd, class Bwd>
Tensor binary_elementwise(const Tensor &a, const Tensor &b, const char *name, Fwd fwd, Bwd bwd) {
    require_same(a, b, name);
    const std::size_t n = a.size();
    std::vector<double> out(n);
    auto av = a.data();
    auto bv = b.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i], bv[i]);
    const bool track = tracking({&a, &b});
    Tensor c = make_result(a.shape(), std::move(out), track);
    if (track) {
        record([cn = c.node(), an = a.node(), bn = b.node(), bwd, n] {
            if (cn->grad.empty()) return;
            const auto &g = cn->grad;
            double *ga = an->requires_grad ? an->grad_buffer().data() : nullptr;
            double *gb = bn->requires_grad ? bn->grad_buffer().data() : nullptr;
            for (std::size_t i = 0; i < n; ++i) bwd(g[i], an->value[i], bn->value[i], ga ? ga + i : nullptr, gb ? gb + i : nullptr);
        });
    }
    return c;
}
} // namespace

Tensor add(const Tensor &a, const Tensor &b) {
    return binary_elementwise(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double g, double, double, double *ga, double *gb) {
            if (ga) *ga += g;
            if (gb) *gb += g;
        });
}

Tensor sub(const Tensor &a, const Tensor &b) {
    return binary_elementwise(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double g, double, double, double *ga, double *gb) {
            if (ga) *ga += g;
            if (gb) *gb -= g;
        });
}

Tensor mul(const Tensor &a, const Tensor &b) {
    return binary_elementwise(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double g, double x, double y, double *ga, double *gb) {
            if (ga) *ga += g * y;
            if (gb) *gb += g * x;
        });
}

namespace {
template <class Fwd, class Deriv>
Tensor unary_elementwise(const Tensor &x, const char *name, Fwd fwd, Deriv deriv_from_output) {
    require_defined(x, name);
    const std::size_t n = x.size();
    std::vector<double> out(n);
    auto xv = x.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(xv[i]);
    const bool track = tracking({&x});
    Tensor y = make_result(x.shape(), std::move(out), track);
    if (track) {
        record([yn = y.node(), xn = x.node(), deriv_from_output, n] {
            if (yn->grad.empty()) return;
            auto &gx = xn->grad_buffer();
            for (std::size_t i = 0; i < n; ++i) gx[i] += yn->grad[i] * deriv_from_output(yn->value[i]);
        });
    }
    return y;
}
} // namespace

Tensor scale(const Tensor &a, double factor) {
    return unary_elementwise(
        a, "scale", [factor](double v) { return v * factor; }, [factor](double) { return factor; });
}

Tensor sigmoid(const Tensor &x) {
    return unary_elementwise(x, "sigmoid", sigm, [](double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor &x) {
    return unary_elementwise(
        x, "tanh", [](double v) { return std::tanh(v); }, [](double y) { return 1.0 - y * y; });
}

Tensor add_bias(const Tensor &x, const Tensor &bias) {
    require_rank(x, 2, "add_bias");
    require_defined(bias, "add_bias");
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (bias.size() != n)
        throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not fit rows of " +
                             shape_str(x.shape()));
    std::vector<double> out(x.data().begin(), x.data().end());
    auto bv = bias.data();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
    const bool track = tracking({&x, &bias});
    Tensor y = make_result(x.shape(), std::move(out), track);
    if (track) {
        record([yn = y.node(), xn = x.node(), bn = bias.node(), m, n] {
            if (yn->grad.empty()) return;
            const auto &g = yn->grad;
            if (xn->requires_grad) {
                auto &gx = xn->grad_buffer();
                for (std::size_t i = 0; i < m * n; ++i) gx[i] += g[i];
            }
            if (bn->requires_grad) {
                auto &gb = bn->grad_buffer();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
            }
        });
    }
    return y;
}

Tensor sum(const Tensor &x) {
    require_defined(x, "sum");
    double s = 0.0;
    for (double v : x.data()) s += v;
    const bool track = tracking({&x});
    Tensor y = make_result({1}, {s}, track);
    if (track) {
        record([yn = y.node(), xn = x.node()] {
            if (yn->grad.empty()) return;
            const double g = yn->grad[0];
            for (auto &v : xn->grad_buffer()) v += g;
        });
    }
    return y;
}

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractError("concat_cols: no operands");
    const std::size_t m = parts[0].defined() ? parts[0].dim(0) : 0;
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const auto &p : parts) {
        require_rank(p, 2, "concat_cols");
        if (p.dim(0) != m)
            throw DimensionError("concat_cols: row mismatch " + shape_str(parts[0].shape()) + " vs " +
                                 shape_str(p.shape()));
        widths.push_back(p.dim(1));
        total += p.dim(1);
    }
    std::vector<double> out(m * total);
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        auto v = parts[k].data();
        for (std::size_t i = 0; i < m; ++i)
            std::copy_n(v.begin() + i * widths[k], widths[k], out.begin() + i * total + off);
        off += widths[k];
    }
    const bool track = tracking(parts);
    Tensor y = make_result({m, total}, std::move(out), track);
    if (track) {
        std::vector<NodePtr> nodes;
        for (const auto &p : parts) nodes.push_back(p.node());
        record([yn = y.node(), nodes = std::move(nodes), widths = std::move(widths), m, total] {
            if (yn->grad.empty()) return;
            std::size_t off = 0;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                if (nodes[k]->requires_grad) {
                    auto &g = nodes[k]->grad_buffer();
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < widths[k]; ++j) g[i * widths[k] + j] += yn->grad[i * total + off + j];
                }
                off += widths[k];
            }
        });
    }
    return y;
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractError("concat_rows: no operands");
    require_rank(parts[0], 2, "concat_rows");
    const std::size_t n = parts[0].dim(1);
    std::size_t rows = 0;
    for (const auto &p : parts) {
        require_rank(p, 2, "concat_rows");
        if (p.dim(1) != n)
            throw DimensionError("concat_rows: column mismatch " + shape_str(parts[0].shape()) + " vs " +
                                 shape_str(p.shape()));
        rows += p.dim(0);
    }
    std::vector<double> out;
    out.reserve(rows * n);
    for (const auto &p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
    const bool track = tracking(parts);
    Tensor y = make_result({rows, n}, std::move(out), track);
    if (track) {
        std::vector<NodePtr> nodes;
        for (const auto &p : parts) nodes.push_back(p.node());
        record([yn = y.node(), nodes = std::move(nodes)] {
            if (yn->grad.empty()) return;
            std::size_t off = 0;
            for (const auto &nd : nodes) {
                const std::size_t len = nd->value.size();
                if (nd->requires_grad) {
                    auto &g = nd->grad_buffer();
                    for (std::size_t i = 0; i < len; ++i) g[i] += yn->grad[off + i];
                }
                off += len;
            }
        });
    }
    return y;
}

Tensor softmax_rows(const Tensor &x, std::span<const std::size_t> valid_cols) {
    require_rank(x, 2, "softmax_rows");
    const std::size_t r = x.dim(0), c = x.dim(1);
    if (!valid_cols.empty() && valid_cols.size() != r)
        throw DimensionError("softmax_rows: " + std::to_string(valid_cols.size()) + " row lengths for " +
                             shape_str(x.shape()));
    std::vector<std::size_t> limits(r, c);
    for (std::size_t i = 0; i < valid_cols.size(); ++i) {
        if (valid_cols[i] == 0 || valid_cols[i] > c)
            throw DimensionError("softmax_rows: row length " + std::to_string(valid_cols[i]) + " outside [1, " +
                                 std::to_string(c) + "]");
        limits[i] = valid_cols[i];
    }
    std::vector<double> out(r * c, 0.0);
    auto xv = x.data();
    for (std::size_t i = 0; i < r; ++i) {
        const double *row = xv.data() + i * c;
        double *o = out.data() + i * c;
        const std::size_t lim = limits[i];
        double mx = row[0];
        for (std::size_t j = 1; j < lim; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < lim; ++j) z += (o[j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < lim; ++j) o[j] /= z;
    }
    const bool track = tracking({&x});
    Tensor y = make_result(x.shape(), std::move(out), track);
    if (track) {
        record([yn = y.node(), xn = x.node(), r, c] {
            if (yn->grad.empty()) return;
            auto &gx = xn->grad_buffer();
            for (std::size_t i = 0; i < r; ++i) {
                const double *p = yn->value.data() + i * c;
                const double *g = yn->grad.data() + i * c;
                double dot = 0.0;
                for (std::size_t j = 0; j < c; ++j) dot += g[j] * p[j];
                for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += p[j] * (g[j] - dot);
            }
        });
    }
    return y;
}

Tensor embedding(const Tensor &table, std::span<const int> ids) {
    require_rank(table, 2, "embedding");
    if (ids.empty()) throw ContractError("embedding: no ids");
    const std::size_t v = table.dim(0), d = table.dim(1);
    std::vector<double> out(ids.size() * d);
    auto tv = table.data();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v)
            throw IndexError("embedding: id " + std::to_string(ids[i]) + " outside vocabulary of " +
                             std::to_string(v));
        std::copy_n(tv.begin() + ids[i] * d, d, out.begin() + i * d);
    }
    const bool track = tracking({&table});
    Tensor y = make_result({ids.size(), d}, std::move(out), track);
    if (track) {
        record([yn = y.node(), tn = table.node(), ids = std::vector<int>(ids.begin(), ids.end()), d] {
            if (yn->grad.empty()) return;
            auto &g = tn->grad_buffer();
            for (std::size_t i = 0; i < ids.size(); ++i)
                for (std::size_t j = 0; j < d; ++j) g[ids[i] * d + j] += yn->grad[i * d + j];
        });
    }
    return y;
}

Tensor dropout(const Tensor &x, double rate, bool training, Rng &rng) {
    require_defined(x, "dropout");
    if (!(rate >= 0.0 && rate < 1.0)) throw ParameterError("dropout: rate " + std::to_string(rate) + " outside [0, 1)");
    if (!training || rate == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - rate);
    const std::size_t n = x.size();
    std::vector<double> mask(n);
    for (auto &m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
    std::vector<double> out(n);
    auto xv = x.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = xv[i] * mask[i];
    const bool track = tracking({&x});
    Tensor y = make_result(x.shape(), std::move(out), track);
    if (track) {
        record([yn = y.node(), xn = x.node(), mask = std::move(mask)] {
            if (yn->grad.empty()) return;
            auto &g = xn->grad_buffer();
            for (std::size_t i = 0; i < mask.size(); ++i) g[i] += yn->grad[i] * mask[i];
        });
    }
    return y;
}

Tensor label_smoothed_ce(const Tensor &logits, std::span<const int> targets, double smoothing, int pad_id) {
    require_rank(logits, 2, "label_smoothed_ce");
    const std::size_t n = logits.dim(0), v = logits.dim(1);
    if (targets.size() != n)
        throw DimensionError("label_smoothed_ce: " + std::to_string(targets.size()) + " targets for logits " +
                             shape_str(logits.shape()));
    if (!(smoothing >= 0.0 && smoothing < 1.0))
        throw ParameterError("label_smoothed_ce: smoothing " + std::to_string(smoothing) + " outside [0, 1)");
    const double off = smoothing / static_cast<double>(v);
    const double on = 1.0 - smoothing + off;

    std::size_t count = 0;
    for (int t : targets) {
        if (t == pad_id && pad_id >= 0) continue;
        if (t < 0 || static_cast<std::size_t>(t) >= v)
            throw IndexError("label_smoothed_ce: target id " + std::to_string(t) + " outside vocabulary of " +
                             std::to_string(v));
        ++count;
    }

    auto z = logits.data();
    std::vector<double> probs(n * v, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pad_id >= 0 && targets[i] == pad_id) continue;
        const double *row = z.data() + i * v;
        double mx = row[0];
        for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        double *p = probs.data() + i * v;
        for (std::size_t j = 0; j < v; ++j) s += (p[j] = std::exp(row[j] - mx));
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < v; ++j) p[j] /= s;
        // -sum q log p = lse - sum q z, because q sums to one.
        double qz = 0.0;
        for (std::size_t j = 0; j < v; ++j) qz += off * row[j];
        qz += (on - off) * row[targets[i]];
        total += lse - qz;
    }
    const double denom = count ? static_cast<double>(count) : 1.0;
    const bool track = tracking({&logits});
    Tensor loss = make_result({1}, {total / denom}, track);
    if (track && count) {
        record([ln = loss.node(), zn = logits.node(), probs = std::move(probs),
                tg = std::vector<int>(targets.begin(), targets.end()), n, v, off, on, pad_id, denom] {
            if (ln->grad.empty()) return;
            const double g = ln->grad[0] / denom;
            auto &gz = zn->grad_buffer();
            for (std::size_t i = 0; i < n; ++i) {
                if (pad_id >= 0 && tg[i] == pad_id) continue;
                for (std::size_t j = 0; j < v; ++j) {
                    const double q = static_cast<std::size_t>(tg[i]) == j ? on : off;
                    gz[i * v + j] += g * (probs[i * v + j] - q);
                }
            }
        });
    }
    return loss;
}

std::pair<Tensor, Tensor> lstm_pointwise(const Tensor &gates, const Tensor &c_prev) {
    require_rank(gates, 2, "lstm_pointwise");
    require_rank(c_prev, 2, "lstm_pointwise");
    const std::size_t b = gates.dim(0), hd = c_prev.dim(1);
    if (c_prev.dim(0) != b || gates.dim(1) != 4 * hd)
        throw DimensionError("lstm_pointwise: gates " + shape_str(gates.shape()) + " incompatible with cell " +
                             shape_str(c_prev.shape()));
    // Cached activations, per row: i, f, g, o, tanh(c).
    std::vector<double> act(b * 5 * hd);
    std::vector<double> h(b * hd), c(b * hd);
    auto gv = gates.data();
    auto cv = c_prev.data();
    for (std::size_t r = 0; r < b; ++r) {
        const double *gr = gv.data() + r * 4 * hd;
        double *a = act.data() + r * 5 * hd;
        for (std::size_t j = 0; j < hd; ++j) {
            const double ig = sigm(gr[j]);
            const double fg = sigm(gr[hd + j]);
            const double cg = std::tanh(gr[2 * hd + j]);
            const double og = sigm(gr[3 * hd + j]);
            const double cn = fg * cv[r * hd + j] + ig * cg;
            const double tc = std::tanh(cn);
            a[j] = ig;
            a[hd + j] = fg;
            a[2 * hd + j] = cg;
            a[3 * hd + j] = og;
            a[4 * hd + j] = tc;
            c[r * hd + j] = cn;
            h[r * hd + j] = og * tc;
        }
    }
    const bool track = tracking({&gates, &c_prev});
    Tensor ht = make_result({b, hd}, std::move(h), track);
    Tensor ct = make_result({b, hd}, std::move(c), track);
    if (track) {
        record([hn = ht.node(), cn = ct.node(), gn = gates.node(), pn = c_prev.node(), act = std::move(act), b, hd] {
            if (hn->grad.empty() && cn->grad.empty()) return;
            double *gg = gn->requires_grad ? gn->grad_buffer().data() : nullptr;
            double *gp = pn->requires_grad ? pn->grad_buffer().data() : nullptr;
            for (std::size_t r = 0; r < b; ++r) {
                const double *a = act.data() + r * 5 * hd;
                for (std::size_t j = 0; j < hd; ++j) {
                    const std::size_t k = r * hd + j;
                    const double dh = hn->grad.empty() ? 0.0 : hn->grad[k];
                    const double dcn = cn->grad.empty() ? 0.0 : cn->grad[k];
                    const double ig = a[j], fg = a[hd + j], cg = a[2 * hd + j], og = a[3 * hd + j], tc = a[4 * hd + j];
                    const double dc = dcn + dh * og * (1.0 - tc * tc);
                    if (gg) {
                        double *row = gg + r * 4 * hd;
                        row[j] += dc * cg * ig * (1.0 - ig);
                        row[hd + j] += dc * pn->value[k] * fg * (1.0 - fg);
                        row[2 * hd + j] += dc * ig * (1.0 - cg * cg);
                        row[3 * hd + j] += dh * tc * og * (1.0 - og);
                    }
                    if (gp) gp[k] += dc * fg;
                }
            }
        });
    }
    return {ht, ct};
}

Tensor stack_time(std::span<const Tensor> steps) {
    if (steps.empty()) throw ContractError("stack_time: no steps");
    require_rank(steps[0], 2, "stack_time");
    const std::size_t b = steps[0].dim(0), d = steps[0].dim(1), t = steps.size();
    for (const auto &s : steps) {
        require_rank(s, 2, "stack_time");
        if (s.shape() != steps[0].shape())
            throw DimensionError("stack_time: step shape " + shape_str(s.shape()) + " vs " +
                                 shape_str(steps[0].shape()));
    }
    std::vector<double> out(b * t * d);
    for (std::size_t k = 0; k < t; ++k) {
        auto v = steps[k].data();
        for (std::size_t r = 0; r < b; ++r) std::copy_n(v.begin() + r * d, d, out.begin() + (r * t + k) * d);
    }
    const bool track = tracking(steps);
    Tensor y = make_result({b, t, d}, std::move(out), track);
    if (track) {
        std::vector<NodePtr> nodes;
        for (const auto &s : steps) nodes.push_back(s.node());
        record([yn = y.node(), nodes = std::move(nodes), b, t, d] {
            if (yn->grad.empty()) return;
            for (std::size_t k = 0; k < t; ++k) {
                if (!nodes[k]->requires_grad) continue;
                auto &g = nodes[k]->grad_buffer();
                for (std::size_t r = 0; r < b; ++r)
                    for (std::size_t j = 0; j < d; ++j) g[r * d + j] += yn->grad[(r * t + k) * d + j];
            }
        });
    }
    return y;
}

Tensor batch_dot(const Tensor &query, const Tensor &keys) {
    require_rank(query, 2, "batch_dot");
    require_rank(keys, 3, "batch_dot");
    const std::size_t b = query.dim(0), d = query.dim(1), s = keys.dim(1);
    if (keys.dim(0) != b || keys.dim(2) != d)
        throw DimensionError("batch_dot: query " + shape_str(query.shape()) + " incompatible with keys " +
                             shape_str(keys.shape()));
    std::vector<double> out(b * s);
    auto q = query.data();
    auto k = keys.data();
    for (std::size_t r = 0; r < b; ++r)
        for (std::size_t j = 0; j < s; ++j) {
            double acc = 0.0;
            const double *kr = k.data() + (r * s + j) * d;
            const double *qr = q.data() + r * d;
            for (std::size_t e = 0; e < d; ++e) acc += qr[e] * kr[e];
            out[r * s + j] = acc;
        }
    const bool track = tracking({&query, &keys});
    Tensor y = make_result({b, s}, std::move(out), track);
    if (track) {
        record([yn = y.node(), qn = query.node(), kn = keys.node(), b, s, d] {
            if (yn->grad.empty()) return;
            double *gq = qn->requires_grad ? qn->grad_buffer().data() : nullptr;
            double *gk = kn->requires_grad ? kn->grad_buffer().data() : nullptr;
            for (std::size_t r = 0; r < b; ++r)
                for (std::size_t j = 0; j < s; ++j) {
                    const double g = yn->grad[r * s + j];
                    if (g == 0.0) continue;
                    const double *kr = kn->value.data() + (r * s + j) * d;
                    const double *qr = qn->value.data() + r * d;
                    if (gq)
                        for (std::size_t e = 0; e < d; ++e) gq[r * d + e] += g * kr[e];
                    if (gk)
                        for (std::size_t e = 0; e < d; ++e) gk[(r * s + j) * d + e] += g * qr[e];
                }
        });
    }
    return y;
}

Tensor batch_weighted_sum(const Tensor &weights, const Tensor &keys) {
    require_rank(weights, 2, "batch_weighted_sum");
    require_rank(keys, 3, "batch_weighted_sum");
    const std::size_t b = weights.dim(0), s = weights.dim(1), d = keys.dim(2);
    if (keys.dim(0) != b || keys.dim(1) != s)
        throw DimensionError("batch_weighted_sum: weights " + shape_str(weights.shape()) +
                             " incompatible with keys " + shape_str(keys.shape()));
    std::vector<double> out(b * d, 0.0);
    auto w = weights.data();
    auto k = keys.data();
    for (std::size_t r = 0; r < b; ++r)
        for (std::size_t j = 0; j < s; ++j) {
            const double wj = w[r * s + j];
            if (wj == 0.0) continue;
            const double *kr = k.data() + (r * s + j) * d;
            for (std::size_t e = 0; e < d; ++e) out[r * d + e] += wj * kr[e];
        }
    const bool track = tracking({&weights, &keys});
    Tensor y = make_result({b, d}, std::move(out), track);
    if (track) {
        record([yn = y.node(), wn = weights.node(), kn = keys.node(), b, s, d] {
            if (yn->grad.empty()) return;
            double *gw = wn->requires_grad ? wn->grad_buffer().data() : nullptr;
            double *gk = kn->requires_grad ? kn->grad_buffer().data() : nullptr;
            for (std::size_t r = 0; r < b; ++r) {
                const double *go = yn->grad.data() + r * d;
                for (std::size_t j = 0; j < s; ++j) {
                    const double *kr = kn->value.data() + (r * s + j) * d;
                    if (gw) {
                        double acc = 0.0;
                        for (std::size_t e = 0; e < d; ++e) acc += go[e] * kr[e];
                        gw[r * s + j] += acc;
                    }
                    if (gk) {
                        const double wj = wn->value[r * s + j];
                        for (std::size_t e = 0; e < d; ++e) gk[(r * s + j) * d + e] += wj * go[e];
                    }
                }
            }
        });
    }
    return y;
}

} // namespace adadata::num
