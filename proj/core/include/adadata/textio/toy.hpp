#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace adadata::text {

// Synthetic word-level translation task. Source words s0..s{n-1} map one to
// one onto target words t0..t{n-1}; the first `modifiers` source words swap
// places with an immediately following non-modifier word in the target.
// Every sentence ends in `end_marker` on both sides, the way real sentences
// end in punctuation; without it a complete sentence ending in a modifier is
// indistinguishable from a prefix that must wait for the swap partner.
struct ToyOptions {
    std::size_t train_pairs = 2000;
    std::size_t test_pairs = 200;
    std::size_t vocab = 48;
    std::size_t modifiers = 12;
    double modifier_rate = 0.15;
    std::size_t min_length = 5;
    std::size_t max_length = 15;
    std::string end_marker = "."; // empty disables; counts toward the length
    std::uint64_t seed = 7;

    void validate() const;
};

struct ToyCorpus {
    std::vector<std::string> train_source, train_target;
    std::vector<std::string> test_source, test_target;
};

// Target side of the toy mapping for a whitespace-separated source line.
std::string toy_translate(const std::string &source_line, const ToyOptions &options);

ToyCorpus make_toy_corpus(const ToyOptions &options);

} // namespace adadata::text
