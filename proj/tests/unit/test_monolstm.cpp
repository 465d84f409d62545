#include <gtest/gtest.h>

#include <cmath>

#include "adadata/error.hpp"
#include "adadata/monolstm/monolstm.hpp"
#include "fixtures.hpp"

using namespace adadata;
using namespace adadata::mono;

namespace {

constexpr std::size_t kV = 20;

double max_abs_diff_rows(const num::Tensor &a, const num::Tensor &b, std::size_t rows) {
    double d = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < a.dim(1); ++j) d = std::max(d, std::abs(a.at(r, j) - b.at(r, j)));
    return d;
}

} // namespace

TEST(MonoLstm, PrefixEncodingMatchesFullEncoding) {
    MonoLstmModel m(fixture::tiny_mono(8, 2), kV, kV);
    num::Rng rng(1);
    const auto x = fixture::random_ids(9, kV, rng);
    const auto full = m.encode_source(x);
    for (std::size_t s = 1; s <= x.size(); ++s) {
        const auto part = m.encode_source(std::span<const int>(x).first(s));
        ASSERT_EQ(part.dim(0), s);
        EXPECT_LE(max_abs_diff_rows(part, full, s), 1e-12);
    }
    EXPECT_THROW(m.encode_source({}), InputError);
}

TEST(MonoLstm, DecoderPrefixTruncation) {
    MonoLstmModel m(fixture::tiny_mono(8, 2), kV, kV);
    num::Rng rng(2);
    const auto y = fixture::random_ids(7, kV, rng);
    const auto full = m.decoder_states(y);
    for (std::size_t t = 1; t <= y.size(); ++t)
        EXPECT_LE(max_abs_diff_rows(m.decoder_states(std::span<const int>(y).first(t)), full, t), 1e-12);
    // Row 1 only depends on <bos>.
    const std::vector<int> other{static_cast<int>(kV) - 1};
    EXPECT_LE(max_abs_diff_rows(m.decoder_states(other), full, 1), 0.0);
}

TEST(MonoLstm, ScoresArePrefixLocal) {
    MonoLstmModel m(fixture::tiny_mono(8, 2), kV, kV);
    num::Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = fixture::random_ids(8, kV, rng);
        const auto y = fixture::random_ids(6, kV, rng);
        const auto h = m.decoder_states(y);
        const auto base = m.attention_and_predict(h, m.encode_source(x));
        const std::size_t keep = 1 + rng.below(x.size());
        auto x2 = x;
        const auto tail = fixture::random_ids(x.size() - keep, kV, rng);
        std::copy(tail.begin(), tail.end(), x2.begin() + static_cast<std::ptrdiff_t>(keep));
        const auto other = m.attention_and_predict(h, m.encode_source(x2));
        for (std::size_t t = 0; t < y.size(); ++t)
            for (std::size_t s = 0; s < keep; ++s)
                EXPECT_LE(std::abs(base.scores.at(t, s) - other.scores.at(t, s)), 1e-12);
    }
}

TEST(MonoLstm, AttentionMatrixContract) {
    MonoLstmModel m(fixture::tiny_mono(), kV, kV);
    const auto pairs = fixture::random_pairs(20, kV, kV, 1, 9, 4);
    for (const auto &p : pairs) {
        const auto a = m.attention_matrix(p);
        ASSERT_EQ(a.rows, p.target.size());
        ASSERT_EQ(a.cols, p.source.size());
        for (std::size_t t = 0; t < a.rows; ++t) {
            double row = 0.0;
            for (std::size_t s = 0; s < a.cols; ++s) {
                EXPECT_GE(a.at(t, s), 0.0);
                row += a.at(t, s);
            }
            EXPECT_NEAR(row, 1.0, 1e-9);
            if (a.cols == 1) {
                EXPECT_EQ(a.at(t, 0), 1.0);
            }
        }
        EXPECT_EQ(m.attention_matrix(p).weights, a.weights);
    }
}

TEST(MonoLstm, OutOfVocabularyIdRejected) {
    MonoLstmModel m(fixture::tiny_mono(), kV, kV);
    text::SentencePair p{{4, static_cast<int>(kV)}, {5, text::kEos}, 0};
    EXPECT_THROW(m.attention_matrix(p), EncodingError);
}

TEST(MonoLstm, DimensionMismatchRejected) {
    MonoLstmModel m(fixture::tiny_mono(), kV, kV);
    EXPECT_THROW(m.attention_and_predict(num::Tensor::zeros({2, 8}), num::Tensor::zeros({3, 5})), DimensionError);
}

TEST(MonoLstm, UntrainedLossNearLogV) {
    MonoLstmModel m(fixture::tiny_mono(16), kV, kV);
    const auto pairs = fixture::random_pairs(30, kV, kV, 3, 10, 5);
    std::vector<std::size_t> idx(pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    num::Rng rng(1);
    const double loss = m.batch_loss(text::make_batch(pairs, idx), false, rng).item();
    EXPECT_NEAR(loss, std::log(static_cast<double>(kV)), 0.05 * std::log(static_cast<double>(kV)));
}

TEST(MonoLstm, OverfitsFiftyPairs) {
    auto cfg = fixture::tiny_mono(32);
    cfg.label_smoothing = 0.0;
    cfg.epochs = 200;
    cfg.max_tokens = 120;
    cfg.adam.lr = 0.01;
    cfg.adam.warmup_steps = 0;
    const auto pairs = fixture::random_pairs(50, kV, kV, 3, 6, 6);
    std::vector<double> losses;
    train_monolstm(pairs, kV, kV, cfg, [&](const num::EpochLog &log) { losses.push_back(log.loss); });
    ASSERT_EQ(losses.size(), 200u);
    EXPECT_LT(losses.back(), 0.1 * losses.front());
}

TEST(MonoLstm, SeedDeterminismAndCheckpointRoundTrip) {
    auto cfg = fixture::tiny_mono();
    cfg.epochs = 2;
    cfg.dropout = 0.2;
    const auto pairs = fixture::random_pairs(40, kV, kV, 2, 8, 7);
    const auto src = fixture::numbered_vocab(kV, 's'), tgt = fixture::numbered_vocab(kV, 't');
    const auto a = num::serialize_checkpoint(to_checkpoint(train_monolstm(pairs, kV, kV, cfg), src, tgt));
    const auto b = num::serialize_checkpoint(to_checkpoint(train_monolstm(pairs, kV, kV, cfg), src, tgt));
    EXPECT_EQ(a, b);
    cfg.seed = 2;
    EXPECT_NE(num::serialize_checkpoint(to_checkpoint(train_monolstm(pairs, kV, kV, cfg), src, tgt)), a);

    const auto restored = model_from_checkpoint(num::deserialize_checkpoint(a));
    EXPECT_EQ(num::serialize_checkpoint(to_checkpoint(restored, src, tgt)), a);
    EXPECT_GT(restored.train_steps, 0u);
}

TEST(MonoLstm, CheckpointArchitectureChecked) {
    MonoLstmModel m(fixture::tiny_mono(), kV, kV);
    auto ck = to_checkpoint(m, fixture::numbered_vocab(kV, 's'), fixture::numbered_vocab(kV, 't'));
    auto wrong = ck;
    wrong.arch = "simul-lstm";
    EXPECT_THROW(model_from_checkpoint(wrong), CompatibilityError);
    wrong = ck;
    wrong.fingerprint ^= 1;
    EXPECT_THROW(model_from_checkpoint(wrong), CompatibilityError);
}

TEST(MonoLstm, ConfigJsonRoundTrip) {
    auto cfg = fixture::tiny_mono(12, 2);
    cfg.adam.lr = 0.0123;
    cfg.seed = 99;
    const auto back = MonoLstmConfig::from_json(cfg.to_json());
    EXPECT_EQ(back.to_json(), cfg.to_json());
    EXPECT_EQ(back.seed, 99u);
    cfg.dropout = 1.0;
    EXPECT_THROW(cfg.validate(), ParameterError);
}
