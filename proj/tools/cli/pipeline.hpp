#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "adadata/metrics/metrics.hpp"
#include "adadata/streamdecode/streamdecode.hpp"
#include "adadata/textio/corpus.hpp"
#include "adadata/textio/vocab.hpp"
#include "run_config.hpp"

namespace adadata::cli {

struct Vocabs {
    text::Vocabulary src, tgt;
};

Vocabs load_vocabs(const RunConfig &config);
Vocabs vocabs_of(const num::Checkpoint &ckpt);

std::vector<text::SentencePair> load_corpus(const std::filesystem::path &src, const std::filesystem::path &tgt,
                                            const Vocabs &vocabs, std::size_t max_length);

void write_lines(const std::filesystem::path &path, const std::vector<std::string> &lines);

// "adaptive", "adaptive-carry", "full" or "waitk:<k>".
struct Policy {
    enum class Kind { Adaptive, AdaptiveCarry, Full, WaitK } kind = Kind::Adaptive;
    std::size_t k = 0;

    static Policy parse(const std::string &text);
};

struct DecodedSet {
    std::vector<std::vector<std::string>> hypotheses; // target tokens
    std::vector<stream::DecodeTrace> traces;
};

DecodedSet decode_lines(const simul::SimulModel &model, const Vocabs &vocabs,
                        const std::vector<std::string> &source_lines, const Policy &policy,
                        const stream::DecodeCaps &caps);

// Joins tokens with spaces, or de-BPEs them when `detok` is set.
std::string hypothesis_text(const std::vector<std::string> &tokens, bool detok);

/// BLEU over whitespace tokens of hypothesis/reference lines; latency from
/// parsed traces when given. A sentence with an empty translation gets AL = S.
/// With `word_sources` (the decoded source lines) AL is measured in words
/// instead of subwords.
metrics::EvaluationReport evaluate_lines(const std::vector<std::string> &hypotheses,
                                         const std::vector<std::vector<std::string>> &reference_sets,
                                         const std::vector<stream::ParsedTrace> *traces,
                                         const std::vector<std::string> *word_sources = nullptr);

// Teacher-forced training log line, "epoch=<n> step=<m> loss=<v>".
std::string log_line(const num::EpochLog &log);

} // namespace adadata::cli
