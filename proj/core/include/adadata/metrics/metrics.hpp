#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adadata::metrics {

using Tokens = std::vector<std::string>;

struct BleuScore {
    double bleu = 0.0; // 0..100
    std::array<double, 4> precisions{}; // p_1..p_4; orders above max_n stay 0
    double brevity_penalty = 0.0;
    std::size_t hyp_length = 0;
    std::size_t ref_length = 0;
    // Orders with at least one hypothesis n-gram in the corpus; only these
    // enter the geometric mean.
    std::size_t effective_order = 0;
};

/// Corpus-level BLEU with multi-reference clipping and no smoothing. Counts
/// are clipped by the per-n-gram maximum over a sentence's references; the
/// brevity penalty uses the reference length closest to each hypothesis
/// (ties go to the shorter one).
BleuScore corpus_bleu(std::span<const Tokens> hypotheses, std::span<const std::vector<Tokens>> references,
                      std::size_t max_n = 4);

// Add-one smoothing on orders >= 2. Diagnostics only.
double sentence_bleu(const Tokens &hypothesis, std::span<const Tokens> references, std::size_t max_n = 4);

/// Average Lagging over the delay function g (g[t-1] = g(t)) of a sentence
/// with source length S; T is g.size(). Throws InputError when T == 0.
double average_lagging(std::span<const std::size_t> delays, std::size_t source_len);

struct WordDelays {
    std::vector<std::size_t> delays;
    std::size_t source_words = 0;
};

// Maps subword delays onto words marked by the "</w>" suffix. A source word
// counts as read once its first subword has been read; a target word is
// emitted with its last subword. Trailing subwords without the marker form
// a final word, and a sequence without any marker is read token by token.
WordDelays word_level_delays(std::span<const std::size_t> subword_delays, const Tokens &source_subwords,
                             const Tokens &target_subwords);

struct LatencyReport {
    std::vector<double> per_sentence;
    double mean() const;
};

struct EvaluationReport {
    BleuScore bleu;
    LatencyReport latency;
    bool has_latency = false;
    std::size_t sentences = 0;

    // "bleu=..", "p1=..", ..., "bp=..", "mean_al=..", "n_sentences=..", then
    // "RESULT bleu=<v> al=<v>".
    std::string format() const;
};

} // namespace adadata::metrics
