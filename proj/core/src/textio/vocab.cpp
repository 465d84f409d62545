#include "adadata/textio/vocab.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>

#include "adadata/error.hpp"
#include "adadata/numerics/checkpoint.hpp"

namespace adadata::text {

namespace {
const std::array<std::string, kNumReserved> kReserved = {"<pad>", "<unk>", "<bos>", "<eos>"};
}

bool is_reserved_token(std::string_view token) {
    return std::find(kReserved.begin(), kReserved.end(), token) != kReserved.end();
}

Vocabulary::Vocabulary() {
    for (const auto &r : kReserved) add(r);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : Vocabulary() {
    for (auto &t : tokens) {
        if (t.empty()) throw InputError("vocabulary: empty token");
        if (is_reserved_token(t) || ids_.count(t)) throw InputError("vocabulary: duplicate token '" + t + "'");
        add(std::move(t));
    }
}

void Vocabulary::add(std::string token) {
    ids_.emplace(token, static_cast<int>(tokens_.size()));
    tokens_.push_back(std::move(token));
}

int Vocabulary::id(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

const std::string &Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
        throw IndexError("vocabulary: id " + std::to_string(id) + " out of range");
    return tokens_[id];
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto &t : tokens) out.push_back(id(t));
    return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int i : ids) out.push_back(token(i));
    return out;
}

std::vector<std::string> Vocabulary::regular_tokens() const {
    return {tokens_.begin() + kNumReserved, tokens_.end()};
}

void Vocabulary::save(const std::filesystem::path &path) const {
    std::string body;
    for (std::size_t i = kNumReserved; i < tokens_.size(); ++i) body += tokens_[i] + "\n";
    num::write_file_atomic(path, body);
}

Vocabulary Vocabulary::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open vocabulary " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) tokens.push_back(line);
    return Vocabulary(std::move(tokens));
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, std::size_t min_frequency) {
    std::map<std::string, std::size_t> counts;
    for (const auto &sentence : corpus)
        for (const auto &tok : sentence)
            if (!is_reserved_token(tok)) ++counts[tok];
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto &[tok, n] : counts)
        if (n >= min_frequency) kept.emplace_back(tok, n);
    std::stable_sort(kept.begin(), kept.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
    std::vector<std::string> tokens;
    tokens.reserve(kept.size());
    for (auto &[tok, n] : kept) tokens.push_back(tok);
    return Vocabulary(std::move(tokens));
}

} // namespace adadata::text
