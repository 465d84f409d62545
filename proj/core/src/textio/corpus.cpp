#include "adadata/textio/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "adadata/error.hpp"
#include "adadata/numerics/rng.hpp"
#include "adadata/textio/bpe.hpp"

namespace adadata::text {

std::vector<std::string> read_lines(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<SentencePair> encode_parallel_lines(std::span<const std::string> source_lines,
                                                std::span<const std::string> target_lines,
                                                const Vocabulary &source_vocab, const Vocabulary &target_vocab,
                                                const CorpusOptions &options) {
    if (source_lines.size() != target_lines.size())
        throw InputError("parallel corpus line counts differ: source has " + std::to_string(source_lines.size()) +
                         ", target has " + std::to_string(target_lines.size()));
    std::vector<SentencePair> pairs;
    std::size_t empty = 0, too_long = 0;
    for (std::size_t i = 0; i < source_lines.size(); ++i) {
        const auto src = split_whitespace(source_lines[i]);
        const auto tgt = split_whitespace(target_lines[i]);
        if (src.empty() || tgt.empty()) {
            ++empty;
            continue;
        }
        if (src.size() > options.max_length || tgt.size() > options.max_length) {
            ++too_long;
            continue;
        }
        SentencePair p;
        p.source = source_vocab.encode(src);
        p.target = target_vocab.encode(tgt);
        p.target.push_back(kEos);
        p.line = i;
        pairs.push_back(std::move(p));
    }
    if (empty) std::cerr << "warning: dropped " << empty << " pair(s) with an empty side\n";
    if (too_long)
        std::cerr << "warning: dropped " << too_long << " pair(s) longer than " << options.max_length << " tokens\n";
    return pairs;
}

std::vector<SentencePair> load_parallel_corpus(const std::filesystem::path &source_file,
                                               const std::filesystem::path &target_file,
                                               const Vocabulary &source_vocab, const Vocabulary &target_vocab,
                                               const CorpusOptions &options) {
    const auto src = read_lines(source_file);
    const auto tgt = read_lines(target_file);
    return encode_parallel_lines(src, tgt, source_vocab, target_vocab, options);
}

std::size_t padded_length(const SentencePair &pair) { return std::max(pair.source.size(), pair.target.size()); }

std::vector<std::vector<std::size_t>> batch_iterator(std::span<const SentencePair> pairs, std::size_t max_tokens,
                                                     std::uint64_t seed) {
    for (const auto &p : pairs)
        if (padded_length(p) > max_tokens)
            throw InputError("pair at line " + std::to_string(p.line) + " has " + std::to_string(padded_length(p)) +
                             " tokens, more than max_tokens=" + std::to_string(max_tokens));
    num::Rng rng(seed, 0xBA7C);
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    // Stable sort keeps the shuffled order within a length bucket.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return padded_length(pairs[a]) < padded_length(pairs[b]); });
    std::vector<std::vector<std::size_t>> batches;
    std::vector<std::size_t> current;
    std::size_t width = 0;
    for (std::size_t idx : order) {
        const std::size_t w = std::max(width, padded_length(pairs[idx]));
        if (!current.empty() && (current.size() + 1) * w > max_tokens) {
            batches.push_back(std::move(current));
            current.clear();
            width = 0;
        }
        current.push_back(idx);
        width = std::max(width, padded_length(pairs[idx]));
    }
    if (!current.empty()) batches.push_back(std::move(current));
    rng.shuffle(batches);
    return batches;
}

std::size_t PaddedBatch::target_tokens() const {
    std::size_t n = 0;
    for (auto l : target_lengths) n += l;
    return n;
}

PaddedBatch make_batch(std::span<const SentencePair> pairs, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ContractError("make_batch: empty batch");
    PaddedBatch b;
    b.size = indices.size();
    for (auto i : indices) {
        const auto &p = pairs[i];
        if (p.source.empty() || p.target.empty())
            throw InputError("make_batch: empty sequence at line " + std::to_string(p.line));
        b.src_len = std::max(b.src_len, p.source.size());
        b.tgt_len = std::max(b.tgt_len, p.target.size());
        b.source_lengths.push_back(p.source.size());
        b.target_lengths.push_back(p.target.size());
    }
    b.source.assign(b.src_len, std::vector<int>(b.size, kPad));
    b.target_in.assign(b.tgt_len, std::vector<int>(b.size, kPad));
    b.target_out.assign(b.tgt_len, std::vector<int>(b.size, kPad));
    for (std::size_t k = 0; k < b.size; ++k) {
        const auto &p = pairs[indices[k]];
        for (std::size_t s = 0; s < p.source.size(); ++s) b.source[s][k] = p.source[s];
        for (std::size_t t = 0; t < p.target.size(); ++t) {
            b.target_in[t][k] = t == 0 ? kBos : p.target[t - 1];
            b.target_out[t][k] = p.target[t];
        }
    }
    return b;
}

} // namespace adadata::text
