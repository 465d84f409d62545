#include "adadata/textio/bpe.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "adadata/error.hpp"
#include "adadata/numerics/checkpoint.hpp"

namespace adadata::text {

std::vector<std::string> utf8_chars(std::string_view word) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < word.size()) {
        const auto lead = static_cast<unsigned char>(word[i]);
        std::size_t len = 1;
        if (lead >= 0xF0 && lead < 0xF8)
            len = 4;
        else if (lead >= 0xE0)
            len = lead < 0xF0 ? 3 : 1;
        else if (lead >= 0xC0)
            len = 2;
        if (i + len > word.size()) len = 1;
        for (std::size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
                len = 1;
                break;
            }
        out.emplace_back(word.substr(i, len));
        i += len;
    }
    return out;
}

std::vector<std::string> split_whitespace(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < line.size()) {
        while (i < line.size() && space(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !space(line[j])) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

namespace {

std::vector<std::string> initial_symbols(std::string_view word) {
    auto chars = utf8_chars(word);
    if (!chars.empty()) chars.back() += kEndOfWord;
    return chars;
}

void merge_in_place(std::vector<std::string> &symbols, const SymbolPair &pair) {
    std::vector<std::string> out;
    out.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
            out.push_back(symbols[i] + symbols[i + 1]);
            ++i;
        } else {
            out.push_back(std::move(symbols[i]));
        }
    }
    symbols = std::move(out);
}

} // namespace

BpeModel::BpeModel(std::vector<SymbolPair> merges) : merges_(std::move(merges)) {
    for (std::size_t i = 0; i < merges_.size(); ++i) ranks_.emplace(merges_[i], i);
}

std::vector<std::string> BpeModel::segment(std::string_view word) const {
    auto symbols = initial_symbols(word);
    // Repeatedly merge the adjacent pair learned earliest; equivalent to
    // replaying the merge list in order.
    while (symbols.size() > 1) {
        std::size_t best = std::numeric_limits<std::size_t>::max();
        const SymbolPair *best_pair = nullptr;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            auto it = ranks_.find({symbols[i], symbols[i + 1]});
            if (it != ranks_.end() && it->second < best) {
                best = it->second;
                best_pair = &it->first;
            }
        }
        if (!best_pair) break;
        merge_in_place(symbols, *best_pair);
    }
    return symbols;
}

void BpeModel::save(const std::filesystem::path &path) const {
    std::string body = "bpe-v1 " + std::to_string(merges_.size()) + "\n";
    for (const auto &[l, r] : merges_) body += l + " " + r + "\n";
    num::write_file_atomic(path, body);
}

BpeModel BpeModel::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open BPE model " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError("BPE model " + path.string() + " is empty");
    auto header = split_whitespace(line);
    if (header.size() != 2 || header[0] != "bpe-v1")
        throw CompatibilityError("BPE model " + path.string() + ": unknown header '" + line + "'");
    const std::size_t expected = std::stoull(header[1]);
    std::vector<SymbolPair> merges;
    while (std::getline(in, line)) {
        auto parts = split_whitespace(line);
        if (parts.empty()) continue;
        if (parts.size() != 2)
            throw InputError("BPE model " + path.string() + ": malformed merge '" + line + "'");
        merges.emplace_back(parts[0], parts[1]);
    }
    if (merges.size() != expected)
        throw InputError("BPE model " + path.string() + ": header announces " + std::to_string(expected) +
                         " merges, found " + std::to_string(merges.size()));
    return BpeModel(std::move(merges));
}

BpeModel learn_bpe(std::span<const std::string> lines, std::size_t num_merges) {
    std::map<std::string, std::size_t> word_counts;
    for (const auto &line : lines)
        for (auto &w : split_whitespace(line)) ++word_counts[w];
    if (word_counts.empty()) throw InputError("learn_bpe: corpus has no words");

    std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
    words.reserve(word_counts.size());
    for (const auto &[w, n] : word_counts) words.emplace_back(initial_symbols(w), n);

    std::vector<SymbolPair> merges;
    while (merges.size() < num_merges) {
        std::map<SymbolPair, std::size_t> pair_counts;
        for (const auto &[symbols, n] : words)
            for (std::size_t i = 0; i + 1 < symbols.size(); ++i) pair_counts[{symbols[i], symbols[i + 1]}] += n;
        // std::map iterates pairs in lexicographic order, so the first
        // maximum wins the tie-break.
        const SymbolPair *best = nullptr;
        std::size_t best_count = 0;
        for (const auto &[pair, n] : pair_counts)
            if (n > best_count) {
                best = &pair;
                best_count = n;
            }
        if (!best || best_count < 2) break;
        SymbolPair chosen = *best;
        for (auto &[symbols, n] : words) merge_in_place(symbols, chosen);
        merges.push_back(std::move(chosen));
    }
    return BpeModel(std::move(merges));
}

std::vector<std::string> apply_bpe(std::string_view sentence, const BpeModel &model) {
    std::vector<std::string> out;
    for (const auto &w : split_whitespace(sentence)) {
        auto seg = model.segment(w);
        out.insert(out.end(), std::make_move_iterator(seg.begin()), std::make_move_iterator(seg.end()));
    }
    return out;
}

std::string detokenize(std::span<const std::string> subwords) {
    std::string out;
    for (const auto &s : subwords) {
        std::string_view v = s;
        if (v.size() >= kEndOfWord.size() && v.substr(v.size() - kEndOfWord.size()) == kEndOfWord) {
            out.append(v.substr(0, v.size() - kEndOfWord.size()));
            out.push_back(' ');
        } else {
            out.append(v);
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

} // namespace adadata::text
