#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adadata/textio/vocab.hpp"

namespace adadata::text {

/// Source ids x_1..x_S and target ids y_1..y_T, where y_T is <eos>.
/// `line` is the 0-based line index in the corpus files.
struct SentencePair {
    std::vector<int> source;
    std::vector<int> target;
    std::size_t line = 0;

    bool operator==(const SentencePair &) const = default;
};

struct CorpusOptions {
    // Pairs whose source or target (without <eos>) exceeds this are dropped.
    std::size_t max_length = 100;
};

std::vector<std::string> read_lines(const std::filesystem::path &path);

// Encodes line-aligned token files; targets get a trailing <eos>. Empty or
// over-long pairs are dropped with a warning on stderr.
std::vector<SentencePair> load_parallel_corpus(const std::filesystem::path &source_file,
                                               const std::filesystem::path &target_file,
                                               const Vocabulary &source_vocab, const Vocabulary &target_vocab,
                                               const CorpusOptions &options = {});

std::vector<SentencePair> encode_parallel_lines(std::span<const std::string> source_lines,
                                                std::span<const std::string> target_lines,
                                                const Vocabulary &source_vocab, const Vocabulary &target_vocab,
                                                const CorpusOptions &options = {});

// max(|source|, |target|): the padded width a pair occupies in a batch.
std::size_t padded_length(const SentencePair &pair);

/// Groups pairs of similar length after a seeded shuffle. A batch never
/// exceeds batch_size * longest padded length <= max_tokens. Every index appears in
/// exactly one batch; the batch order is shuffled as well.
std::vector<std::vector<std::size_t>> batch_iterator(std::span<const SentencePair> pairs, std::size_t max_tokens,
                                                     std::uint64_t seed);

/// Time-major padded batch for teacher forcing: decoder inputs are
/// <bos> y_1 .. y_{T-1}, outputs y_1 .. y_T, padding id 0.
struct PaddedBatch {
    std::size_t size = 0;
    std::size_t src_len = 0;
    std::size_t tgt_len = 0;
    std::vector<std::vector<int>> source;     // [src_len][size]
    std::vector<std::vector<int>> target_in;  // [tgt_len][size]
    std::vector<std::vector<int>> target_out; // [tgt_len][size]
    std::vector<std::size_t> source_lengths;
    std::vector<std::size_t> target_lengths;

    std::size_t target_tokens() const;
};

PaddedBatch make_batch(std::span<const SentencePair> pairs, std::span<const std::size_t> indices);

} // namespace adadata::text
