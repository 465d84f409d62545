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
#include "adadata/textio/corpus.hpp"
#include "adadata/textio/vocab.hpp"

// Causal-attention measurement model: a unidirectional LSTM encoder, a
// decoder LSTM that never sees the source (zero initial state, no input
// feeding), and dot-product attention used only at the prediction layer.
// Hence the unnormalized score h_t . hbar_s depends on x_1..x_s and
// y_1..y_{t-1} alone.
namespace adadata::mono {

inline constexpr const char *kArchTag = "monolstm";

struct MonoLstmConfig {
    std::size_t emb_dim = 64;
    std::size_t hidden_dim = 64;
    std::size_t enc_layers = 2;
    std::size_t dec_layers = 2;
    double dropout = 0.2;
    double label_smoothing = 0.1;
    num::AdamConfig adam{.lr = 0.005, .beta1 = 0.9, .beta2 = 0.997, .eps = 1e-9, .warmup_steps = 400,
                         .warmup_init_lr = 1e-7, .clip_norm = 5.0};
    std::size_t epochs = 30;
    std::size_t max_tokens = 300;
    std::uint64_t seed = 1;

    void validate() const;
    std::string to_json() const;
    static MonoLstmConfig from_json(const std::string &text);
};

/// Row-stochastic T x S attention matrix; row t is the distribution over
/// source positions used to predict target token t (row T predicts <eos>).
struct AttentionMatrix {
    std::size_t rows = 0; // T
    std::size_t cols = 0; // S
    std::vector<double> weights;

    double at(std::size_t t, std::size_t s) const { return weights[t * cols + s]; }
};

struct AttentionOutput {
    num::Tensor scores;  // [T x S] unnormalized h_t . hbar_s
    num::Tensor weights; // [T x S] row softmax of scores
    num::Tensor logits;  // [T x V] W [h_t; c_t] + b
};

struct TeacherForcedStats {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

class MonoLstmModel {
  public:
    MonoLstmModel(const MonoLstmConfig &config, std::size_t src_vocab, std::size_t tgt_vocab);

    const MonoLstmConfig &config() const { return config_; }
    std::size_t src_vocab() const { return src_vocab_; }
    std::size_t tgt_vocab() const { return tgt_vocab_; }
    std::uint64_t fingerprint() const;

    // Fixed declaration order; also the checkpoint order.
    std::vector<std::pair<std::string, num::Tensor>> named_parameters() const;
    std::vector<num::Tensor> parameters() const;

    // [S x H] top-layer source states; row s depends on x_1..x_s only.
    num::Tensor encode_source(std::span<const int> source) const;
    // [T x H] top-layer target states; row t is computed after consuming
    // <bos> y_1 .. y_{t-1} and never sees the source.
    num::Tensor decoder_states(std::span<const int> target) const;
    AttentionOutput attention_and_predict(const num::Tensor &target_states, const num::Tensor &source_states) const;

    // Evaluation-mode attention for one pair; T counts the <eos> row.
    AttentionMatrix attention_matrix(const text::SentencePair &pair) const;

    // Label-smoothed teacher-forced loss of a padded batch.
    num::Tensor batch_loss(const text::PaddedBatch &batch, bool training, num::Rng &rng,
                           TeacherForcedStats *stats = nullptr) const;

    TeacherForcedStats teacher_forced_accuracy(std::span<const text::SentencePair> pairs,
                                               std::size_t max_tokens = 2048) const;

    std::uint64_t train_steps = 0;

  private:
    std::vector<num::Tensor> encoder_tops(const std::vector<std::vector<int>> &source, bool training,
                                          num::Rng &rng) const;
    std::vector<num::Tensor> decoder_tops(const std::vector<std::vector<int>> &target_in, bool training,
                                          num::Rng &rng) const;

    MonoLstmConfig config_;
    std::size_t src_vocab_;
    std::size_t tgt_vocab_;
    num::Tensor src_emb_;
    num::Tensor tgt_emb_;
    std::vector<num::LstmWeights> encoder_;
    std::vector<num::LstmWeights> decoder_;
    num::Tensor out_w_; // [2H x V]
    num::Tensor out_b_; // [V]
};

// Teacher-forced training with Adam; deterministic given config.seed.
MonoLstmModel train_monolstm(std::span<const text::SentencePair> corpus, std::size_t src_vocab,
                             std::size_t tgt_vocab, const MonoLstmConfig &config,
                             const num::EpochCallback &on_epoch = {});

num::Checkpoint to_checkpoint(const MonoLstmModel &model, const text::Vocabulary &src,
                              const text::Vocabulary &tgt);
MonoLstmModel model_from_checkpoint(const num::Checkpoint &ckpt);

} // namespace adadata::mono
