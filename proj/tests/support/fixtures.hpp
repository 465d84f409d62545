#pragma once

// Small random corpora and model configurations shared by the tests.

#include <cstddef>
#include <vector>

#include "adadata/monolstm/monolstm.hpp"
#include "adadata/numerics/rng.hpp"
#include "adadata/simulmodel/simulmodel.hpp"
#include "adadata/textio/corpus.hpp"
#include "adadata/textio/vocab.hpp"

namespace fixture {

inline std::vector<int> random_ids(std::size_t n, std::size_t vocab, adadata::num::Rng &rng) {
    std::vector<int> ids(n);
    const auto regular = vocab - adadata::text::kNumReserved;
    for (auto &id : ids) id = adadata::text::kNumReserved + static_cast<int>(rng.below(regular));
    return ids;
}

// Target ends in <eos>, like pairs loaded from a corpus.
inline std::vector<adadata::text::SentencePair> random_pairs(std::size_t count, std::size_t src_vocab,
                                                             std::size_t tgt_vocab, std::size_t min_len,
                                                             std::size_t max_len, std::uint64_t seed) {
    adadata::num::Rng rng(seed, 77);
    std::vector<adadata::text::SentencePair> out;
    for (std::size_t i = 0; i < count; ++i) {
        adadata::text::SentencePair p;
        p.source = random_ids(min_len + rng.below(max_len - min_len + 1), src_vocab, rng);
        p.target = random_ids(min_len + rng.below(max_len - min_len + 1), tgt_vocab, rng);
        p.target.push_back(adadata::text::kEos);
        p.line = i;
        out.push_back(std::move(p));
    }
    return out;
}

// Deterministic "copy and shift" task that small models learn quickly.
inline std::vector<adadata::text::SentencePair> copy_pairs(std::size_t count, std::size_t vocab, std::size_t min_len,
                                                           std::size_t max_len, std::uint64_t seed) {
    auto pairs = random_pairs(count, vocab, vocab, min_len, max_len, seed);
    const int regular = static_cast<int>(vocab) - adadata::text::kNumReserved;
    for (auto &p : pairs) {
        p.target.clear();
        for (int id : p.source)
            p.target.push_back(adadata::text::kNumReserved + (id - adadata::text::kNumReserved + 1) % regular);
        p.target.push_back(adadata::text::kEos);
    }
    return pairs;
}

inline adadata::mono::MonoLstmConfig tiny_mono(std::size_t dim = 8, std::size_t layers = 1) {
    adadata::mono::MonoLstmConfig c;
    c.emb_dim = c.hidden_dim = dim;
    c.enc_layers = c.dec_layers = layers;
    c.dropout = 0.0;
    c.label_smoothing = 0.1;
    c.epochs = 1;
    c.max_tokens = 200;
    return c;
}

inline adadata::simul::SimulConfig tiny_simul(std::size_t dim = 8, std::size_t layers = 1) {
    adadata::simul::SimulConfig c;
    c.emb_dim = c.hidden_dim = dim;
    c.enc_layers = c.dec_layers = layers;
    c.dropout = 0.0;
    c.label_smoothing = 0.1;
    c.epochs = 1;
    c.max_tokens = 200;
    return c;
}

inline adadata::text::Vocabulary numbered_vocab(std::size_t size, char prefix) {
    std::vector<std::string> tokens;
    for (std::size_t i = adadata::text::kNumReserved; i < size; ++i) tokens.push_back(prefix + std::to_string(i));
    return adadata::text::Vocabulary(tokens);
}

} // namespace fixture
