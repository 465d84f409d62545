#include "adadata/monolstm/monolstm.hpp"

#include <array>
#include <sstream>

#include "../config_json.hpp"
#include "adadata/error.hpp"
#include "adadata/numerics/ops.hpp"

namespace adadata::mono {

using num::Tensor;
using nlohmann::json;

void MonoLstmConfig::validate() const {
    if (emb_dim == 0 || hidden_dim == 0) throw ParameterError("monolstm: dimensions must be >= 1");
    if (enc_layers == 0 || dec_layers == 0) throw ParameterError("monolstm: layer counts must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("monolstm: dropout must lie in [0, 1)");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
        throw ParameterError("monolstm: label smoothing must lie in [0, 1)");
}

std::string MonoLstmConfig::to_json() const {
    json j = {{"emb_dim", emb_dim},       {"hidden_dim", hidden_dim},
              {"enc_layers", enc_layers}, {"dec_layers", dec_layers},
              {"dropout", dropout},       {"label_smoothing", label_smoothing},
              {"epochs", epochs},         {"max_tokens", max_tokens},
              {"seed", seed},             {"adam", detail::adam_to_json(adam)}};
    return j.dump();
}

MonoLstmConfig MonoLstmConfig::from_json(const std::string &text) {
    const json j = detail::parse_json(text);
    MonoLstmConfig c;
    detail::read_field(j, "emb_dim", c.emb_dim);
    detail::read_field(j, "hidden_dim", c.hidden_dim);
    detail::read_field(j, "enc_layers", c.enc_layers);
    detail::read_field(j, "dec_layers", c.dec_layers);
    detail::read_field(j, "dropout", c.dropout);
    detail::read_field(j, "label_smoothing", c.label_smoothing);
    detail::read_field(j, "epochs", c.epochs);
    detail::read_field(j, "max_tokens", c.max_tokens);
    detail::read_field(j, "seed", c.seed);
    if (j.contains("adam")) c.adam = detail::adam_from_json(j.at("adam"), c.adam);
    c.validate();
    return c;
}

MonoLstmModel::MonoLstmModel(const MonoLstmConfig &config, std::size_t src_vocab, std::size_t tgt_vocab)
    : config_(config), src_vocab_(src_vocab), tgt_vocab_(tgt_vocab) {
    config_.validate();
    if (src_vocab <= text::kNumReserved || tgt_vocab <= text::kNumReserved)
        throw ParameterError("monolstm: vocabularies must contain at least one regular token");
    num::Rng rng(config.seed, 0x1417);
    const auto e = config.emb_dim, h = config.hidden_dim;
    src_emb_ = num::uniform_param({src_vocab, e}, rng);
    tgt_emb_ = num::uniform_param({tgt_vocab, e}, rng);
    for (std::size_t l = 0; l < config.enc_layers; ++l) encoder_.push_back(num::LstmWeights::init(l ? h : e, h, rng));
    for (std::size_t l = 0; l < config.dec_layers; ++l) decoder_.push_back(num::LstmWeights::init(l ? h : e, h, rng));
    out_w_ = num::uniform_param({2 * h, tgt_vocab}, rng);
    out_b_ = Tensor::zeros({tgt_vocab}, true);
}

std::uint64_t MonoLstmModel::fingerprint() const {
    std::ostringstream os;
    os << kArchTag << '|' << config_.emb_dim << '|' << config_.hidden_dim << '|' << config_.enc_layers << '|'
       << config_.dec_layers << '|' << src_vocab_ << '|' << tgt_vocab_;
    return num::fnv1a64(os.str());
}

std::vector<std::pair<std::string, Tensor>> MonoLstmModel::named_parameters() const {
    std::vector<std::pair<std::string, Tensor>> p;
    p.emplace_back("src_emb", src_emb_);
    p.emplace_back("tgt_emb", tgt_emb_);
    for (std::size_t l = 0; l < encoder_.size(); ++l) {
        p.emplace_back("enc" + std::to_string(l) + ".w", encoder_[l].w);
        p.emplace_back("enc" + std::to_string(l) + ".b", encoder_[l].b);
    }
    for (std::size_t l = 0; l < decoder_.size(); ++l) {
        p.emplace_back("dec" + std::to_string(l) + ".w", decoder_[l].w);
        p.emplace_back("dec" + std::to_string(l) + ".b", decoder_[l].b);
    }
    p.emplace_back("out.w", out_w_);
    p.emplace_back("out.b", out_b_);
    return p;
}

std::vector<Tensor> MonoLstmModel::parameters() const {
    std::vector<Tensor> out;
    for (auto &[n, t] : named_parameters()) out.push_back(t);
    return out;
}

std::vector<Tensor> MonoLstmModel::encoder_tops(const std::vector<std::vector<int>> &source, bool training,
                                                num::Rng &rng) const {
    const std::size_t b = source.front().size();
    auto state = num::LstmState::zeros(encoder_.size(), b, config_.hidden_dim);
    std::vector<Tensor> tops;
    tops.reserve(source.size());
    for (const auto &ids : source) {
        Tensor x = num::dropout(num::embedding(src_emb_, ids), config_.dropout, training, rng);
        tops.push_back(num::lstm_stack_step(encoder_, x, state, config_.dropout, training, rng));
    }
    return tops;
}

std::vector<Tensor> MonoLstmModel::decoder_tops(const std::vector<std::vector<int>> &target_in, bool training,
                                                num::Rng &rng) const {
    // Zero initial state: no pathway from the encoder into the recurrence.
    const std::size_t b = target_in.front().size();
    auto state = num::LstmState::zeros(decoder_.size(), b, config_.hidden_dim);
    std::vector<Tensor> tops;
    tops.reserve(target_in.size());
    for (const auto &ids : target_in) {
        Tensor x = num::dropout(num::embedding(tgt_emb_, ids), config_.dropout, training, rng);
        tops.push_back(num::lstm_stack_step(decoder_, x, state, config_.dropout, training, rng));
    }
    return tops;
}

namespace {
std::vector<std::vector<int>> as_steps(std::span<const int> ids) {
    std::vector<std::vector<int>> steps;
    for (int id : ids) steps.push_back({id});
    return steps;
}

Tensor rows_of(std::vector<Tensor> tops) { return num::concat_rows(tops); }
} // namespace

Tensor MonoLstmModel::encode_source(std::span<const int> source) const {
    if (source.empty()) throw InputError("encode_source: empty source");
    num::Rng unused(0);
    return rows_of(encoder_tops(as_steps(source), false, unused));
}

Tensor MonoLstmModel::decoder_states(std::span<const int> target) const {
    if (target.empty()) throw InputError("decoder_states: empty target");
    std::vector<int> inputs{text::kBos};
    inputs.insert(inputs.end(), target.begin(), target.end() - 1);
    num::Rng unused(0);
    return rows_of(decoder_tops(as_steps(inputs), false, unused));
}

AttentionOutput MonoLstmModel::attention_and_predict(const Tensor &target_states, const Tensor &source_states) const {
    const std::size_t h = config_.hidden_dim;
    if (target_states.rank() != 2 || source_states.rank() != 2 || target_states.dim(1) != h ||
        source_states.dim(1) != h)
        throw DimensionError("attention_and_predict: states " + num::shape_str(target_states.shape()) + " and " +
                             num::shape_str(source_states.shape()) + " do not match hidden size " +
                             std::to_string(h));
    AttentionOutput out;
    out.scores = num::matmul(target_states, num::transpose(source_states));
    out.weights = num::softmax_rows(out.scores);
    Tensor ctx = num::matmul(out.weights, source_states);
    const std::array<Tensor, 2> parts{target_states, ctx};
    out.logits = num::add_bias(num::matmul(num::concat_cols(parts), out_w_), out_b_);
    return out;
}

AttentionMatrix MonoLstmModel::attention_matrix(const text::SentencePair &pair) const {
    for (int id : pair.source)
        if (id < 0 || static_cast<std::size_t>(id) >= src_vocab_)
            throw EncodingError("attention_matrix: source id " + std::to_string(id) + " outside vocabulary");
    for (int id : pair.target)
        if (id < 0 || static_cast<std::size_t>(id) >= tgt_vocab_)
            throw EncodingError("attention_matrix: target id " + std::to_string(id) + " outside vocabulary");
    const auto out = attention_and_predict(decoder_states(pair.target), encode_source(pair.source));
    AttentionMatrix a;
    a.rows = pair.target.size();
    a.cols = pair.source.size();
    a.weights.assign(out.weights.data().begin(), out.weights.data().end());
    return a;
}

Tensor MonoLstmModel::batch_loss(const text::PaddedBatch &batch, bool training, num::Rng &rng,
                                 TeacherForcedStats *stats) const {
    const auto src_tops = encoder_tops(batch.source, training, rng);
    const auto dec_tops = decoder_tops(batch.target_in, training, rng);
    Tensor keys = num::stack_time(src_tops);
    std::vector<Tensor> combined;
    combined.reserve(dec_tops.size());
    for (const auto &h : dec_tops) {
        Tensor alpha = num::softmax_rows(num::batch_dot(h, keys), batch.source_lengths);
        Tensor ctx = num::batch_weighted_sum(alpha, keys);
        const std::array<Tensor, 2> parts{h, ctx};
        combined.push_back(num::dropout(num::concat_cols(parts), config_.dropout, training, rng));
    }
    Tensor logits = num::add_bias(num::matmul(num::concat_rows(combined), out_w_), out_b_);
    std::vector<int> targets;
    targets.reserve(batch.tgt_len * batch.size);
    for (const auto &row : batch.target_out) targets.insert(targets.end(), row.begin(), row.end());
    if (stats) {
        const std::size_t v = tgt_vocab_;
        auto z = logits.data();
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (targets[i] == text::kPad) continue;
            std::size_t best = 0;
            for (std::size_t j = 1; j < v; ++j)
                if (z[i * v + j] > z[i * v + best]) best = j;
            stats->correct += best == static_cast<std::size_t>(targets[i]);
            ++stats->total;
        }
    }
    return num::label_smoothed_ce(logits, targets, config_.label_smoothing, text::kPad);
}

TeacherForcedStats MonoLstmModel::teacher_forced_accuracy(std::span<const text::SentencePair> pairs,
                                                          std::size_t max_tokens) const {
    TeacherForcedStats stats;
    num::Rng unused(0);
    for (const auto &indices : text::batch_iterator(pairs, max_tokens, 0))
        batch_loss(text::make_batch(pairs, indices), false, unused, &stats);
    return stats;
}

MonoLstmModel train_monolstm(std::span<const text::SentencePair> corpus, std::size_t src_vocab,
                             std::size_t tgt_vocab, const MonoLstmConfig &config,
                             const num::EpochCallback &on_epoch) {
    if (corpus.empty()) throw InputError("train_monolstm: empty corpus");
    MonoLstmModel model(config, src_vocab, tgt_vocab);
    auto params = model.parameters();
    num::AdamState opt(config.adam, params);
    std::vector<text::SentencePair> items(corpus.begin(), corpus.end());
    num::run_training(
        params, opt, [&](const text::PaddedBatch &b, num::Rng &rng) { return model.batch_loss(b, true, rng); },
        [&](std::size_t) { return items; }, {.epochs = config.epochs, .max_tokens = config.max_tokens, .seed = config.seed},
        on_epoch);
    model.train_steps = opt.step;
    return model;
}

num::Checkpoint to_checkpoint(const MonoLstmModel &model, const text::Vocabulary &src, const text::Vocabulary &tgt) {
    if (src.size() != model.src_vocab() || tgt.size() != model.tgt_vocab())
        throw CompatibilityError("vocabulary sizes do not match the model");
    num::Checkpoint c;
    c.arch = kArchTag;
    c.config_json = model.config().to_json();
    c.fingerprint = model.fingerprint();
    c.train_steps = model.train_steps;
    c.src_tokens = src.regular_tokens();
    c.tgt_tokens = tgt.regular_tokens();
    for (auto &[n, t] : model.named_parameters()) c.params.emplace_back(n, t.detach());
    return c;
}

MonoLstmModel model_from_checkpoint(const num::Checkpoint &ckpt) {
    if (ckpt.arch != kArchTag)
        throw CompatibilityError("checkpoint architecture '" + ckpt.arch + "' is not " + kArchTag);
    MonoLstmModel model(MonoLstmConfig::from_json(ckpt.config_json), ckpt.src_tokens.size() + text::kNumReserved,
                        ckpt.tgt_tokens.size() + text::kNumReserved);
    if (model.fingerprint() != ckpt.fingerprint) throw CompatibilityError("checkpoint fingerprint mismatch");
    num::load_parameters(model.named_parameters(), ckpt.params);
    model.train_steps = ckpt.train_steps;
    return model;
}

} // namespace adadata::mono
