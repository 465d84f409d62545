#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace adadata::text {

inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kBos = 2;
inline constexpr int kEos = 3;
inline constexpr int kNumReserved = 4;

/// Bijective token <-> id map with the reserved ids 0..3 fixed as
/// <pad>, <unk>, <bos>, <eos>.
class Vocabulary {
  public:
    Vocabulary();
    // `tokens` are the non-reserved entries in id order starting at 4.
    explicit Vocabulary(std::vector<std::string> tokens);

    std::size_t size() const { return tokens_.size(); }
    int id(std::string_view token) const; // kUnk when absent
    bool contains(std::string_view token) const;
    const std::string &token(int id) const;

    std::vector<int> encode(std::span<const std::string> tokens) const;
    std::vector<std::string> decode(std::span<const int> ids) const;

    // Non-reserved tokens in id order.
    std::vector<std::string> regular_tokens() const;

    // One token per line; line k holds id k + 4.
    void save(const std::filesystem::path &path) const;
    static Vocabulary load(const std::filesystem::path &path);

    bool operator==(const Vocabulary &other) const { return tokens_ == other.tokens_; }

  private:
    void add(std::string token);
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

bool is_reserved_token(std::string_view token);

// Reserved ids 0-3, then every token with count >= min_frequency ordered by
// descending count and lexicographically among equal counts.
Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, std::size_t min_frequency);

} // namespace adadata::text
