#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "adadata/monolstm/monolstm.hpp"
#include "adadata/textio/corpus.hpp"

namespace adadata::prefix {

/// sigma[t][s] = sum_{i <= s} alpha[t][i], stored row-major T x S
/// (0-based indices; sigma[t][S-1] == 1 up to rounding).
struct CumulativeAttention {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t t, std::size_t s) const { return values[t * cols + s]; }
};

struct GenerationConfig {
    double threshold = 0.5; // e, compared with >=
    bool drop_empty_target = true;
    bool dedup = true;
    bool include_full_pair = false;

    void validate() const;
};

/// Source prefix x_1..x_s paired with target prefix y_1..y_t of the corpus
/// pair at `line` (1-based lengths; t counts <eos> when it is included).
struct PrefixPair {
    std::size_t line = 0;
    std::size_t s = 0;
    std::size_t t = 0;

    auto operator<=>(const PrefixPair &) const = default;
};

CumulativeAttention cumulative_info(const mono::AttentionMatrix &attention);

// Longest t such that every row j < t has sigma[j][s-1] >= threshold
// (0 when the first row already fails).
std::size_t max_translatable_prefix(const CumulativeAttention &sigma, std::size_t s, double threshold);

/// For each source prefix length s = 1..S emits (s, t*(s)) with t*(s) the
/// longest translatable target prefix, or T when no row fails. `config`
/// decides which pairs are filtered out.
std::vector<PrefixPair> generate_prefix_pairs(const mono::AttentionMatrix &attention, const GenerationConfig &config,
                                              std::size_t line = 0);

// Length-proportional baseline: t = round(s * T / S) clamped to [1, T].
std::vector<PrefixPair> proportional_prefix_pairs(const text::SentencePair &pair, bool include_full_pair = false);

/// Source prefix and target prefix, the latter terminated by <eos>. Throws
/// InputError naming the line when the lengths exceed the pair.
text::SentencePair materialize(const text::SentencePair &full, const PrefixPair &prefix);

struct MixedEpoch {
    std::vector<text::SentencePair> items;
    std::vector<bool> is_prefix;

    std::size_t prefix_count() const;
};

/// One epoch of training data: every full pair plus |full| prefix pairs drawn
/// uniformly without replacement (with replacement when fewer exist),
/// materialized and shuffled by seed.
MixedEpoch mix_dataset(std::span<const text::SentencePair> full_pairs, std::span<const PrefixPair> prefix_pairs,
                       std::uint64_t seed);

// Throws InputError naming the first prefix that references a missing line
// or exceeds its pair's lengths.
void validate_prefixes(std::span<const text::SentencePair> corpus, std::span<const PrefixPair> prefixes);

// Attention matrix then generate_prefix_pairs per pair, sorted by (line, s).
std::vector<PrefixPair> generate_corpus_prefixes(std::span<const text::SentencePair> corpus,
                                                 const mono::MonoLstmModel &model, const GenerationConfig &config);

struct PrefixFile {
    double threshold = 0.0;
    std::vector<PrefixPair> pairs;
};

// "# adadata-prefixes v1 e=<value>" header, then "line\ts\tt" rows.
std::string format_prefix_file(double threshold, std::span<const PrefixPair> pairs);
void write_prefix_file(const std::filesystem::path &path, double threshold, std::span<const PrefixPair> pairs);
PrefixFile read_prefix_file(const std::filesystem::path &path);
PrefixFile parse_prefix_file(std::string_view contents);

} // namespace adadata::prefix
