#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "adadata/error.hpp"
#include "adadata/numerics/adam.hpp"
#include "adadata/numerics/checkpoint.hpp"
#include "adadata/numerics/lstm.hpp"
#include "adadata/numerics/ops.hpp"
#include "oracles.hpp"

using namespace adadata;
using namespace adadata::num;

namespace {

std::vector<double> values(const Tensor &t) { return {t.data().begin(), t.data().end()}; }

} // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
    const Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    const Tensor eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    EXPECT_EQ(values(matmul(a, eye)), values(a));
}

TEST(Matmul, ZeroOperandGivesZeros) {
    const Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    const auto c = matmul(a, Tensor::zeros({3, 4}));
    EXPECT_EQ(c.shape(), (Shape{2, 4}));
    for (double x : c.data()) EXPECT_EQ(x, 0.0);
}

TEST(Matmul, AgreesWithTripleLoop) {
    Rng rng(11);
    for (std::size_t m : {1u, 3u, 7u})
        for (std::size_t k : {1u, 5u, 16u})
            for (std::size_t n : {1u, 4u, 9u}) {
                auto av = oracle::random_values(m * k, rng);
                auto bv = oracle::random_values(k * n, rng);
                const auto got = matmul(Tensor::from({m, k}, av), Tensor::from({k, n}, bv));
                const auto want = oracle::triple_loop_matmul(av, bv, m, k, n);
                for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.data()[i], want[i], 1e-12);
            }
}

TEST(Matmul, InnerDimensionMismatchThrows) {
    EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
}

TEST(Softmax, EqualLogitsGiveHalf) {
    const auto p = softmax_rows(Tensor::from({1, 2}, {0.0, 0.0}));
    EXPECT_DOUBLE_EQ(p.data()[0], 0.5);
    EXPECT_DOUBLE_EQ(p.data()[1], 0.5);
}

TEST(Softmax, LogTwoGivesOneThirdTwoThirds) {
    const auto p = softmax_rows(Tensor::from({1, 2}, {0.0, std::log(2.0)}));
    EXPECT_NEAR(p.data()[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(p.data()[1], 2.0 / 3.0, 1e-15);
}

TEST(Softmax, ShiftInvariantAndStableForLargeLogits) {
    const auto a = softmax_rows(Tensor::from({1, 3}, {1.0, 2.0, 3.0}));
    const auto b = softmax_rows(Tensor::from({1, 3}, {1001.0, 1002.0, 1003.0}));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-15);
}

TEST(Softmax, MaskedColumnsAreExactlyZero) {
    const std::vector<std::size_t> valid{2, 3};
    const auto p = softmax_rows(Tensor::from({2, 3}, {0.5, 0.5, 9.0, 1.0, 2.0, 3.0}), valid);
    EXPECT_EQ(p.at(0, 2), 0.0);
    EXPECT_NEAR(p.at(0, 0) + p.at(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(p.at(1, 0) + p.at(1, 1) + p.at(1, 2), 1.0, 1e-15);
}

TEST(Lstm, ZeroWeightsAndInputs) {
    // All gates at sigmoid(0) = 0.5 and candidate tanh(0) = 0.
    LstmWeights w{Tensor::zeros({5, 8}), Tensor::zeros({8})};
    auto [h, c] = lstm_cell(Tensor::zeros({1, 3}), Tensor::zeros({1, 2}), Tensor::zeros({1, 2}), w);
    for (double x : h.data()) EXPECT_EQ(x, 0.0);
    for (double x : c.data()) EXPECT_EQ(x, 0.0);
}

TEST(Lstm, HiddenStateBoundedByOne) {
    Rng rng(3);
    auto w = LstmWeights::init(4, 6, rng, 3.0);
    Tensor h = Tensor::zeros({2, 6}), c = Tensor::zeros({2, 6});
    for (int step = 0; step < 20; ++step) {
        auto x = Tensor::from({2, 4}, oracle::random_values(8, rng, -5, 5));
        std::tie(h, c) = lstm_cell(x, h, c, w);
        for (double v : h.data()) EXPECT_LT(std::abs(v), 1.0);
    }
}

TEST(Lstm, CellMatchesHandComputation) {
    // One unit, input 1: gates = x * w + b with every block weight 1 and bias 0.
    LstmWeights w{Tensor::from({2, 4}, {1, 1, 1, 1, 0, 0, 0, 0}), Tensor::zeros({4})};
    auto [h, c] = lstm_cell(Tensor::from({1, 1}, {1.0}), Tensor::zeros({1, 1}), Tensor::from({1, 1}, {0.5}), w);
    const double s = 1.0 / (1.0 + std::exp(-1.0));
    const double c_want = s * 0.5 + s * std::tanh(1.0);
    EXPECT_NEAR(c.item(), c_want, 1e-15);
    EXPECT_NEAR(h.item(), s * std::tanh(c_want), 1e-15);
}

TEST(CrossEntropy, UniformLogitsGiveLogV) {
    const std::vector<int> targets{2};
    const auto loss = label_smoothed_ce(Tensor::zeros({1, 7}), targets, 0.0, -1);
    EXPECT_NEAR(loss.item(), std::log(7.0), 1e-14);
}

TEST(CrossEntropy, TwoClassExample) {
    const std::vector<int> targets{1};
    const auto loss = label_smoothed_ce(Tensor::from({1, 2}, {0.0, std::log(3.0)}), targets, 0.0, -1);
    EXPECT_NEAR(loss.item(), -std::log(0.75), 1e-15);
}

TEST(CrossEntropy, PadRowsExcluded) {
    const std::vector<int> targets{1, 0};
    const auto loss = label_smoothed_ce(Tensor::from({2, 2}, {0.0, std::log(3.0), 50.0, -50.0}), targets, 0.0, 0);
    EXPECT_NEAR(loss.item(), -std::log(0.75), 1e-15);
    const std::vector<int> all_pad{0, 0};
    EXPECT_EQ(label_smoothed_ce(Tensor::zeros({2, 2}), all_pad, 0.1, 0).item(), 0.0);
}

TEST(CrossEntropy, SmoothingMixesUniformTerm) {
    const std::vector<int> targets{1};
    const double eps = 0.1;
    const auto loss = label_smoothed_ce(Tensor::from({1, 2}, {0.0, std::log(3.0)}), targets, eps, -1);
    const double want = -(1 - eps + eps / 2) * std::log(0.75) - (eps / 2) * std::log(0.25);
    EXPECT_NEAR(loss.item(), want, 1e-15);
}

TEST(Dropout, ZeroFractionMatchesRate) {
    Rng rng(2024);
    const std::size_t n = 1'000'000;
    const auto y = dropout(Tensor::full({1000, 1000}, 1.0), 0.3, true, rng);
    std::size_t zeros = 0;
    for (double v : y.data()) {
        if (v == 0.0)
            ++zeros;
        else
            EXPECT_DOUBLE_EQ(v, 1.0 / 0.7);
    }
    const double frac = static_cast<double>(zeros) / static_cast<double>(n);
    EXPECT_GE(frac, 0.295);
    EXPECT_LE(frac, 0.305);
}

TEST(Dropout, IdentityOutsideTraining) {
    Rng rng(1);
    const auto x = Tensor::from({1, 3}, {1, 2, 3});
    EXPECT_EQ(values(dropout(x, 0.5, false, rng)), values(x));
    EXPECT_THROW(dropout(x, 1.0, true, rng), ParameterError);
}

TEST(Autodiff, SumHasUnitGradient) {
    Tensor x = Tensor::from({2, 2}, {1, 2, 3, 4}, true);
    Tape tape;
    tape.backward(sum(x));
    for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Autodiff, QuadraticGradientIsTwoX) {
    Tensor x = Tensor::from({1, 3}, {-1.5, 0.0, 2.0}, true);
    Tape tape;
    tape.backward(sum(mul(x, x)));
    const auto g = x.grad();
    EXPECT_DOUBLE_EQ(g[0], -3.0);
    EXPECT_DOUBLE_EQ(g[1], 0.0);
    EXPECT_DOUBLE_EQ(g[2], 4.0);
}

TEST(Autodiff, SharedOperandAccumulates) {
    Tensor x = Tensor::from({1, 1}, {3.0}, true);
    Tape tape;
    tape.backward(sum(add(scale(x, 2.0), mul(x, x))));
    EXPECT_DOUBLE_EQ(x.grad()[0], 2.0 + 6.0);
}

TEST(Autodiff, NonScalarLossRejected) {
    Tensor x = Tensor::from({1, 2}, {1, 2}, true);
    Tape tape;
    auto y = scale(x, 2.0);
    EXPECT_THROW(tape.backward(y), ContractError);
}

TEST(Autodiff, NoTapeMeansNoRecording) {
    Tensor x = Tensor::from({1, 2}, {1, 2}, true);
    auto y = sum(mul(x, x));
    EXPECT_EQ(Tape::active(), nullptr);
    EXPECT_DOUBLE_EQ(y.item(), 5.0);
}

TEST(Autodiff, OpsMatchFiniteDifferences) {
    Rng rng(5);
    Tensor a = Tensor::from({3, 4}, oracle::random_values(12, rng), true);
    Tensor b = Tensor::from({4, 8}, oracle::random_values(32, rng), true);
    Tensor bias = Tensor::from({8}, oracle::random_values(8, rng), true);
    Tensor c0 = Tensor::from({3, 2}, oracle::random_values(6, rng), true);
    const std::vector<int> targets{1, 3, 0};
    auto forward = [&] {
        auto gates = add_bias(matmul(a, b), bias);
        auto [h, c] = lstm_pointwise(gates, c0);
        auto logits = concat_cols(std::vector<Tensor>{h, tanh(c), sigmoid(h)});
        auto p = softmax_rows(logits);
        return add(label_smoothed_ce(logits, targets, 0.1, -1), scale(sum(mul(p, p)), 0.5));
    };
    std::vector<std::pair<std::string, Tensor>> params{{"a", a}, {"b", b}, {"bias", bias}, {"c0", c0}};
    std::vector<std::vector<double>> analytic;
    {
        Tape tape;
        tape.backward(forward());
        for (auto &[name, p] : params) analytic.push_back(p.grad());
    }
    for (const auto &r : oracle::finite_difference_check(params, analytic, [&] { return forward().item(); }))
        EXPECT_LE(r.relative_error, 1e-6) << r.group;
}

TEST(Autodiff, AttentionOpsMatchFiniteDifferences) {
    Rng rng(6);
    Tensor q = Tensor::from({2, 3}, oracle::random_values(6, rng), true);
    std::vector<Tensor> keys_steps;
    for (int s = 0; s < 4; ++s) keys_steps.push_back(Tensor::from({2, 3}, oracle::random_values(6, rng), true));
    Tensor emb = Tensor::from({5, 3}, oracle::random_values(15, rng), true);
    const std::vector<int> ids{4, 0};
    const std::vector<std::size_t> lengths{4, 2};
    auto forward = [&] {
        auto keys = stack_time(keys_steps);
        auto w = softmax_rows(batch_dot(add(q, embedding(emb, ids)), keys), lengths);
        auto ctx = batch_weighted_sum(w, keys);
        auto both = concat_rows(std::vector<Tensor>{ctx, transpose(transpose(q))});
        return sum(mul(both, sub(both, Tensor::full({4, 3}, 0.3))));
    };
    std::vector<std::pair<std::string, Tensor>> params{{"q", q}, {"emb", emb}};
    for (std::size_t s = 0; s < keys_steps.size(); ++s) params.emplace_back("k" + std::to_string(s), keys_steps[s]);
    std::vector<std::vector<double>> analytic;
    {
        Tape tape;
        tape.backward(forward());
        for (auto &[name, p] : params) analytic.push_back(p.grad());
    }
    for (const auto &r : oracle::finite_difference_check(params, analytic, [&] { return forward().item(); }))
        EXPECT_LE(r.relative_error, 1e-6) << r.group;
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    Tensor p = Tensor::from({1, 3}, {0.5, -0.25, 1.0}, true);
    std::vector<Tensor> params{p};
    AdamState state(AdamConfig{.lr = 0.1}, params);
    p.zero_grad();
    (void)p.node()->grad_buffer();
    adam_step(params, state);
    EXPECT_EQ(values(p), (std::vector<double>{0.5, -0.25, 1.0}));
}

TEST(Adam, FirstStepMovesAgainstGradientByLr) {
    Tensor p = Tensor::from({1, 2}, {0.0, 0.0}, true);
    std::vector<Tensor> params{p};
    AdamState state(AdamConfig{.lr = 0.01, .clip_norm = 0.0}, params);
    auto &g = p.node()->grad_buffer();
    g[0] = 2.0;
    g[1] = -0.5;
    adam_step(params, state);
    EXPECT_NEAR(p.data()[0], -0.01, 1e-9);
    EXPECT_NEAR(p.data()[1], 0.01, 1e-9);
}

TEST(Adam, ScheduleWarmsUpThenDecays) {
    AdamConfig cfg{.lr = 1e-3, .warmup_steps = 100, .warmup_init_lr = 0.0};
    EXPECT_NEAR(scheduled_lr(cfg, 50), 5e-4, 1e-15);
    EXPECT_NEAR(scheduled_lr(cfg, 100), 1e-3, 1e-15);
    EXPECT_NEAR(scheduled_lr(cfg, 400), 5e-4, 1e-15);
    EXPECT_EQ(scheduled_lr(AdamConfig{.lr = 0.2}, 7), 0.2);
}

TEST(Adam, ClippingCapsGlobalNorm) {
    Tensor a = Tensor::zeros({1, 2}, true), b = Tensor::zeros({1, 1}, true);
    a.node()->grad_buffer() = {3.0, 0.0};
    b.node()->grad_buffer() = {4.0};
    std::vector<Tensor> params{a, b};
    EXPECT_DOUBLE_EQ(clip_grad_norm(params, 1.0), 5.0);
    EXPECT_NEAR(a.grad()[0], 0.6, 1e-15);
    EXPECT_NEAR(b.grad()[0], 0.8, 1e-15);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42, 3), b(42, 3), c(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        differs |= x != c.next_u64();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformAndBelowInRange) {
    Rng r(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_LT(r.below(7), 7u);
    }
}

TEST(Checkpoint, RoundTripIsExact) {
    Rng rng(8);
    Checkpoint ck;
    ck.arch = "monolstm";
    ck.config_json = R"({"a":1})";
    ck.fingerprint = 0xDEADBEEFCAFEULL;
    ck.train_steps = 17;
    ck.src_tokens = {"x", "y"};
    ck.tgt_tokens = {"u"};
    ck.params = {{"w", Tensor::from({2, 3}, oracle::random_values(6, rng))},
                 {"b", Tensor::from({3}, {0.1, 1e-300, -7.25})}};
    const auto bytes = serialize_checkpoint(ck);
    const auto back = deserialize_checkpoint(bytes);
    EXPECT_EQ(back.arch, ck.arch);
    EXPECT_EQ(back.config_json, ck.config_json);
    EXPECT_EQ(back.fingerprint, ck.fingerprint);
    EXPECT_EQ(back.train_steps, 17u);
    EXPECT_EQ(back.src_tokens, ck.src_tokens);
    EXPECT_EQ(back.tgt_tokens, ck.tgt_tokens);
    ASSERT_EQ(back.params.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.params[i].first, ck.params[i].first);
        EXPECT_EQ(back.params[i].second.shape(), ck.params[i].second.shape());
        EXPECT_EQ(values(back.params[i].second), values(ck.params[i].second));
    }
    EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, CorruptionDetected) {
    Checkpoint ck;
    ck.arch = "monolstm";
    ck.params = {{"w", Tensor::zeros({2, 2})}};
    auto bytes = serialize_checkpoint(ck);
    EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), InputError);
    bytes[0] = 'X';
    EXPECT_THROW(deserialize_checkpoint(bytes), InputError);
}

TEST(Checkpoint, LoadParametersChecksShapes) {
    std::vector<std::pair<std::string, Tensor>> params{{"w", Tensor::zeros({2, 2})}};
    EXPECT_THROW(load_parameters(params, {{"w", Tensor::zeros({2, 3})}}), CompatibilityError);
    EXPECT_THROW(load_parameters(params, {{"v", Tensor::zeros({2, 2})}}), CompatibilityError);
    load_parameters(params, {{"w", Tensor::full({2, 2}, 3.0)}});
    EXPECT_EQ(params[0].second.data()[3], 3.0);
}
