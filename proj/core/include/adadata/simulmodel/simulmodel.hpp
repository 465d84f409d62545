#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adadata/numerics/adam.hpp"
#include "adadata/numerics/checkpoint.hpp"
#include "adadata/numerics/lstm.hpp"
#include "adadata/numerics/training.hpp"
#include "adadata/prefixgen/prefixgen.hpp"
#include "adadata/textio/corpus.hpp"
#include "adadata/textio/vocab.hpp"

// Attention encoder-decoder used as the simultaneous translation model.
// The encoder is unidirectional, so states for x_1..x_s are exactly the first
// s states of the full encoding and streaming reads extend it incrementally.
// The decoder uses input feeding: step t consumes [emb(y_{t-1}); htilde_{t-1}].
namespace adadata::simul {

inline constexpr const char *kArchTag = "simul-lstm";

struct SimulConfig {
    std::size_t emb_dim = 64;
    std::size_t hidden_dim = 64;
    std::size_t enc_layers = 1;
    std::size_t dec_layers = 1;
    double dropout = 0.1;
    double label_smoothing = 0.1;
    num::AdamConfig adam{.lr = 0.006, .beta1 = 0.9, .beta2 = 0.98, .eps = 1e-9, .warmup_steps = 200,
                         .warmup_init_lr = 1e-7, .clip_norm = 5.0};
    std::size_t epochs = 20;
    std::size_t max_tokens = 300;
    std::uint64_t seed = 1;
    // Fine-tuning scales the peak rate by this factor.
    double finetune_lr_scale = 0.1;
    // Prefix mix is redrawn every epoch; off reuses the epoch-1 draw.
    bool resample_each_epoch = true;

    void validate() const;
    std::string to_json() const;
    static SimulConfig from_json(const std::string &text);
};

struct ContinueResult {
    std::vector<int> tokens; // never contains <eos>, <pad> or <bos>
    bool hit_eos = false;
    bool capped = false;
};

class SimulModel {
  public:
    SimulModel(const SimulConfig &config, std::size_t src_vocab, std::size_t tgt_vocab);

    const SimulConfig &config() const { return config_; }
    std::size_t src_vocab() const { return src_vocab_; }
    std::size_t tgt_vocab() const { return tgt_vocab_; }
    std::uint64_t fingerprint() const;

    std::vector<std::pair<std::string, num::Tensor>> named_parameters() const;
    std::vector<num::Tensor> parameters() const;

    num::Tensor batch_loss(const text::PaddedBatch &batch, bool training, num::Rng &rng) const;

    /// Incremental source encoder: holds the recurrent state and every top
    /// layer state produced so far.
    class SourceStream {
      public:
        explicit SourceStream(const SimulModel &model);
        void read(int token);
        std::size_t length() const { return tops_.size(); }
        const std::vector<num::Tensor> &states() const { return tops_; }

      private:
        const SimulModel *model_;
        num::LstmState state_;
        std::vector<num::Tensor> tops_;
    };

    // [S x H] top-layer source states.
    num::Tensor encode_source(std::span<const int> source) const;

    /// Teacher-forces <bos> + committed over `source_states`, then decodes
    /// greedily until <eos> or `cap` new tokens. With allow_eos false the
    /// <eos> logit is masked too.
    ContinueResult continue_decode(std::span<const num::Tensor> source_states, std::span<const int> committed,
                                   std::size_t cap, bool allow_eos = true) const;

    // Full-sentence greedy decoding; <eos> is not part of the output.
    std::vector<int> greedy_decode(std::span<const int> source, std::size_t max_len) const;

    class CarriedDecoder;

    std::uint64_t train_steps = 0;

  private:
    struct DecoderState {
        num::LstmState lstm;
        num::Tensor feed;
    };
    // One decoder step; returns the attentional state htilde [B x H] and
    // stores it in `state.feed` for the next step.
    num::Tensor decoder_step(std::span<const int> prev, DecoderState &state, const num::Tensor &keys,
                             std::span<const std::size_t> source_lengths, bool training, num::Rng &rng) const;
    num::Tensor project(const num::Tensor &htilde) const;
    DecoderState initial_state(std::size_t batch) const;
    num::Tensor embed_source(std::span<const int> ids, bool training, num::Rng &rng) const;

    SimulConfig config_;
    std::size_t src_vocab_;
    std::size_t tgt_vocab_;
    num::Tensor src_emb_;
    num::Tensor tgt_emb_;
    std::vector<num::LstmWeights> encoder_;
    std::vector<num::LstmWeights> decoder_;
    num::Tensor combine_w_; // [2H x H]
    num::Tensor combine_b_;
    num::Tensor out_w_; // [H x V]
    num::Tensor out_b_;
};

/// Ablation of continue_decode: the decoder state is carried from one call
/// to the next instead of being rebuilt over the grown source, so the states
/// of already committed tokens keep the attention contexts they were first
/// computed with.
class SimulModel::CarriedDecoder {
  public:
    explicit CarriedDecoder(const SimulModel &model);
    ContinueResult extend(std::span<const num::Tensor> source_states, std::size_t cap, bool allow_eos = true);

  private:
    const SimulModel *model_;
    DecoderState state_; // has consumed every committed token except prev_
    int prev_;
};

// Full pairs only, every epoch.
SimulModel train_full_sentence(std::span<const text::SentencePair> corpus, std::size_t src_vocab,
                               std::size_t tgt_vocab, const SimulConfig &config,
                               const num::EpochCallback &on_epoch = {});

// Each epoch trains on a fresh 1:1 mix of full pairs and prefix pairs.
SimulModel train_mixed(std::span<const text::SentencePair> corpus, std::span<const prefix::PrefixPair> prefixes,
                       std::size_t src_vocab, std::size_t tgt_vocab, const SimulConfig &config,
                       const num::EpochCallback &on_epoch = {});

/// Exactly one epoch over a 1:1 mixed set, starting from `base`, at a
/// constant rate of finetune_lr_scale times the configured peak (no warm-up
/// restart). Throws CompatibilityError if `config` describes a different
/// architecture than `base`.
SimulModel finetune(const SimulModel &base, std::span<const text::SentencePair> corpus,
                    std::span<const prefix::PrefixPair> prefixes, const SimulConfig &config,
                    const num::EpochCallback &on_epoch = {});

num::Checkpoint to_checkpoint(const SimulModel &model, const text::Vocabulary &src, const text::Vocabulary &tgt);
SimulModel model_from_checkpoint(const num::Checkpoint &ckpt);

} // namespace adadata::simul
