#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace adadata::text {

// Appended to the last character of every word before merging.
inline constexpr std::string_view kEndOfWord = "</w>";

using SymbolPair = std::pair<std::string, std::string>;

/// Learned byte-pair-encoding merges, in learned order.
class BpeModel {
  public:
    BpeModel() = default;
    explicit BpeModel(std::vector<SymbolPair> merges);

    const std::vector<SymbolPair> &merges() const { return merges_; }

    // Subword segmentation of one whitespace-delimited word.
    std::vector<std::string> segment(std::string_view word) const;

    // Header "bpe-v1 <num_merges>", then "left right" per line.
    void save(const std::filesystem::path &path) const;
    static BpeModel load(const std::filesystem::path &path);

  private:
    std::vector<SymbolPair> merges_;
    std::map<SymbolPair, std::size_t> ranks_;
};

// Splits into UTF-8 code points; malformed bytes become single symbols.
std::vector<std::string> utf8_chars(std::string_view word);

std::vector<std::string> split_whitespace(std::string_view line);

/// Greedy merge learning: each iteration merges the most frequent adjacent
/// symbol pair (ties: lexicographically smallest pair) until num_merges
/// merges are learned or no pair occurs at least twice.
BpeModel learn_bpe(std::span<const std::string> lines, std::size_t num_merges);

// Applies the model to each whitespace-delimited word of `sentence`.
std::vector<std::string> apply_bpe(std::string_view sentence, const BpeModel &model);

// Inverse of apply_bpe: concatenates subwords and turns end-of-word markers
// into single spaces.
std::string detokenize(std::span<const std::string> subwords);

} // namespace adadata::text
