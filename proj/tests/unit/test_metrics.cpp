#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "adadata/error.hpp"
#include "adadata/metrics/metrics.hpp"
#include "adadata/textio/bpe.hpp"
#include "oracles.hpp"

using namespace adadata;
using namespace adadata::metrics;

namespace {

Tokens toks(const std::string &s) { return text::split_whitespace(s); }

std::vector<std::vector<Tokens>> single_refs(const std::vector<Tokens> &refs) {
    std::vector<std::vector<Tokens>> out;
    for (const auto &r : refs) out.push_back({r});
    return out;
}

} // namespace

TEST(Bleu, IdentityScoresHundred) {
    const std::vector<Tokens> h{toks("a b c d e"), toks("the quick brown fox jumps over"), toks("x y z w")};
    const auto score = corpus_bleu(h, single_refs(h));
    EXPECT_DOUBLE_EQ(score.bleu, 100.0);
    EXPECT_DOUBLE_EQ(score.brevity_penalty, 1.0);
}

TEST(Bleu, ClippedUnigramHandExample) {
    // "the" appears 4 times in the hypothesis but only once in the reference,
    // so the clipped unigram count is 1 of 4; no bigram matches.
    const std::vector<Tokens> h{toks("the the the the")};
    const auto score = corpus_bleu(h, single_refs({toks("the cat")}));
    EXPECT_DOUBLE_EQ(score.precisions[0], 0.25);
    EXPECT_DOUBLE_EQ(score.precisions[1], 0.0);
    EXPECT_DOUBLE_EQ(score.brevity_penalty, 1.0);
    EXPECT_DOUBLE_EQ(score.bleu, 0.0);
}

TEST(Bleu, ZeroOverlapIsZero) {
    const std::vector<Tokens> h{toks("a b c d")};
    EXPECT_DOUBLE_EQ(corpus_bleu(h, single_refs({toks("e f g h")})).bleu, 0.0);
}

TEST(Bleu, MultiReferenceClipUsesMaximum) {
    const std::vector<Tokens> h{toks("the the")};
    const std::vector<std::vector<Tokens>> refs{{toks("the cat"), toks("the the dog")}};
    const auto score = corpus_bleu(h, refs, 2);
    EXPECT_DOUBLE_EQ(score.precisions[0], 1.0);
    EXPECT_DOUBLE_EQ(score.precisions[1], 1.0);
    // Lengths 2 and 3 are both candidates; 2 is exact.
    EXPECT_EQ(score.ref_length, 2u);
    EXPECT_DOUBLE_EQ(score.bleu, 100.0);
}

TEST(Bleu, ClosestReferenceLengthTiesGoShorter) {
    const std::vector<Tokens> h{toks("a b c")};
    const std::vector<std::vector<Tokens>> refs{{toks("a b c d"), toks("a b")}};
    EXPECT_EQ(corpus_bleu(h, refs).ref_length, 2u);
}

TEST(Bleu, BrevityPenaltyHandExample) {
    // c = 3, r = 5; p1..p3 = 1 and no 4-grams exist, so only orders 1..3 count.
    const std::vector<Tokens> h{toks("a b c")};
    const auto score = corpus_bleu(h, single_refs({toks("a b c d e")}));
    EXPECT_EQ(score.effective_order, 3u);
    EXPECT_NEAR(score.brevity_penalty, std::exp(1.0 - 5.0 / 3.0), 1e-15);
    EXPECT_NEAR(score.bleu, 100.0 * std::exp(1.0 - 5.0 / 3.0), 1e-12);
}

TEST(Bleu, CorpusLevelAggregation) {
    // Sentence 1: 4 unigrams all matched, 3 bigrams all matched.
    // Sentence 2: "a x": unigram 1/2, bigram 0/1. Totals p1 = 5/6, p2 = 3/4.
    const std::vector<Tokens> h{toks("a b c d"), toks("a x")};
    const auto score = corpus_bleu(h, single_refs({toks("a b c d"), toks("a y")}), 2);
    EXPECT_DOUBLE_EQ(score.precisions[0], 5.0 / 6.0);
    EXPECT_DOUBLE_EQ(score.precisions[1], 3.0 / 4.0);
    EXPECT_NEAR(score.bleu, 100.0 * std::sqrt(5.0 / 6.0 * 3.0 / 4.0), 1e-12);
}

TEST(Bleu, PermutationInvariant) {
    std::vector<Tokens> h{toks("a b c d e"), toks("b c a"), toks("x y z q r s"), toks("a a b b")};
    std::vector<Tokens> r{toks("a b c d f"), toks("b c"), toks("x y z r s q"), toks("a b a b")};
    const double base = corpus_bleu(h, single_refs(r)).bleu;
    std::vector<std::size_t> order{3, 1, 0, 2};
    std::vector<Tokens> h2, r2;
    for (auto i : order) {
        h2.push_back(h[i]);
        r2.push_back(r[i]);
    }
    EXPECT_DOUBLE_EQ(corpus_bleu(h2, single_refs(r2)).bleu, base);
}

TEST(Bleu, InputErrors) {
    const std::vector<Tokens> h{toks("a")};
    EXPECT_THROW(corpus_bleu(h, single_refs({})), InputError);
    const std::vector<std::vector<Tokens>> empty_set{{}};
    EXPECT_THROW(corpus_bleu(h, empty_set), InputError);
    EXPECT_THROW(corpus_bleu(h, single_refs({toks("a")}), 5), ParameterError);
}

TEST(Bleu, SentenceLevelSmoothed) {
    const std::vector<Tokens> refs{toks("a b c d")};
    EXPECT_DOUBLE_EQ(sentence_bleu(toks("a b c d"), refs), 100.0);
    const double partial = sentence_bleu(toks("a b x d"), refs);
    EXPECT_GT(partial, 0.0);
    EXPECT_LT(partial, 100.0);
}

TEST(AverageLagging, WaitKClosedFormExhaustive) {
    for (std::size_t n = 2; n <= 50; ++n)
        for (std::size_t k = 1; k < n; ++k) {
            const auto g = oracle::waitk_delays(k, n, n);
            EXPECT_EQ(average_lagging(g, n), static_cast<double>(k)) << "n=" << n << " k=" << k;
        }
}

TEST(AverageLagging, FullSentenceIsSourceLength) {
    for (std::size_t S = 1; S <= 20; ++S)
        for (std::size_t T = 1; T <= 20; T += 3) {
            const std::vector<std::size_t> g(T, S);
            EXPECT_EQ(average_lagging(g, S), static_cast<double>(S));
        }
}

TEST(AverageLagging, WaitOneIsOne) {
    const std::vector<std::size_t> g{1, 2, 3, 4, 5};
    EXPECT_EQ(average_lagging(g, 5), 1.0);
}

TEST(AverageLagging, MatchesNaiveOracleOnRandomTraces) {
    num::Rng rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t S = 1 + rng.below(15), T = 1 + rng.below(15);
        std::vector<std::size_t> g(T);
        std::size_t r = 1 + rng.below(S);
        for (auto &x : g) {
            r = std::min(S, r + rng.below(3));
            x = r;
        }
        EXPECT_NEAR(average_lagging(g, S), oracle::naive_average_lagging(g, S), 1e-12);
        auto later = g;
        for (auto &x : later) x = std::min(S, x + 1);
        EXPECT_GE(average_lagging(later, S) + 1e-12, average_lagging(g, S));
    }
}

TEST(AverageLagging, EmptyTraceRejected) {
    EXPECT_THROW(average_lagging({}, 3), InputError);
}

TEST(WordLatency, HandTracedSegmentation) {
    // Source words: [lo w</w>] [cat</w>] [s it</w>].
    const auto src = toks("lo w</w> cat</w> s it</w>");
    // Target words: [a</w>] [b c</w>] [d</w>].
    const auto tgt = toks("a</w> b c</w> d</w>");
    const std::vector<std::size_t> g{1, 2, 3, 5};
    const auto w = word_level_delays(g, src, tgt);
    EXPECT_EQ(w.source_words, 3u);
    // a after 1 subword (word 1 started); c after 3 (words 1-2); d after 5 (all 3).
    EXPECT_EQ(w.delays, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(WordLatency, UnsegmentedTextIsTokenLevel) {
    const auto src = toks("a b c d");
    const auto tgt = toks("x y z");
    const std::vector<std::size_t> g{2, 3, 4};
    const auto w = word_level_delays(g, src, tgt);
    EXPECT_EQ(w.source_words, 4u);
    EXPECT_EQ(w.delays, g);
}

TEST(WordLatency, TruncatedFinalWordAndErrors) {
    const auto w = word_level_delays(std::vector<std::size_t>{1, 2}, toks("ab</w> c</w>"), toks("x</w> y"));
    EXPECT_EQ(w.delays, (std::vector<std::size_t>{1, 2}));
    EXPECT_THROW(word_level_delays(std::vector<std::size_t>{1}, toks("a</w>"), toks("x</w> y</w>")), InputError);
    EXPECT_THROW(word_level_delays(std::vector<std::size_t>{3}, toks("a</w>"), toks("x</w>")), InputError);
}

TEST(Report, FormatAndMean) {
    EvaluationReport rep;
    const std::vector<Tokens> h{toks("a b c d")};
    rep.bleu = corpus_bleu(h, single_refs(h));
    rep.latency.per_sentence = {1.0, 2.0, 4.5};
    rep.has_latency = true;
    rep.sentences = 3;
    EXPECT_DOUBLE_EQ(rep.latency.mean(), 2.5);
    const auto text = rep.format();
    EXPECT_NE(text.find("bleu=100.0000"), std::string::npos);
    EXPECT_NE(text.find("mean_al=2.5000"), std::string::npos);
    EXPECT_NE(text.find("n_sentences=3"), std::string::npos);
    EXPECT_NE(text.find("RESULT bleu=100.0000 al=2.5000"), std::string::npos);
}
