#include "adadata/simulmodel/simulmodel.hpp"

#include <array>
#include <sstream>

#include "../config_json.hpp"
#include "adadata/error.hpp"
#include "adadata/numerics/ops.hpp"

namespace adadata::simul {

using num::Tensor;
using nlohmann::json;

void SimulConfig::validate() const {
    if (emb_dim == 0 || hidden_dim == 0) throw ParameterError("simul: dimensions must be >= 1");
    if (enc_layers == 0 || dec_layers == 0) throw ParameterError("simul: layer counts must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("simul: dropout must lie in [0, 1)");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
        throw ParameterError("simul: label smoothing must lie in [0, 1)");
    if (!(finetune_lr_scale > 0.0)) throw ParameterError("simul: finetune_lr_scale must be positive");
    if (epochs == 0) throw ParameterError("simul: epochs must be >= 1");
}

std::string SimulConfig::to_json() const {
    json j = {{"emb_dim", emb_dim},
              {"hidden_dim", hidden_dim},
              {"enc_layers", enc_layers},
              {"dec_layers", dec_layers},
              {"dropout", dropout},
              {"label_smoothing", label_smoothing},
              {"epochs", epochs},
              {"max_tokens", max_tokens},
              {"seed", seed},
              {"finetune_lr_scale", finetune_lr_scale},
              {"resample_each_epoch", resample_each_epoch},
              {"adam", detail::adam_to_json(adam)}};
    return j.dump();
}

SimulConfig SimulConfig::from_json(const std::string &text) {
    const json j = detail::parse_json(text);
    SimulConfig c;
    detail::read_field(j, "emb_dim", c.emb_dim);
    detail::read_field(j, "hidden_dim", c.hidden_dim);
    detail::read_field(j, "enc_layers", c.enc_layers);
    detail::read_field(j, "dec_layers", c.dec_layers);
    detail::read_field(j, "dropout", c.dropout);
    detail::read_field(j, "label_smoothing", c.label_smoothing);
    detail::read_field(j, "epochs", c.epochs);
    detail::read_field(j, "max_tokens", c.max_tokens);
    detail::read_field(j, "seed", c.seed);
    detail::read_field(j, "finetune_lr_scale", c.finetune_lr_scale);
    detail::read_field(j, "resample_each_epoch", c.resample_each_epoch);
    if (j.contains("adam")) c.adam = detail::adam_from_json(j.at("adam"), c.adam);
    c.validate();
    return c;
}

SimulModel::SimulModel(const SimulConfig &config, std::size_t src_vocab, std::size_t tgt_vocab)
    : config_(config), src_vocab_(src_vocab), tgt_vocab_(tgt_vocab) {
    config_.validate();
    if (src_vocab <= text::kNumReserved || tgt_vocab <= text::kNumReserved)
        throw ParameterError("simul: vocabularies must contain at least one regular token");
    num::Rng rng(config.seed, 0x5171);
    const auto e = config.emb_dim, h = config.hidden_dim;
    src_emb_ = num::uniform_param({src_vocab, e}, rng);
    tgt_emb_ = num::uniform_param({tgt_vocab, e}, rng);
    for (std::size_t l = 0; l < config.enc_layers; ++l) encoder_.push_back(num::LstmWeights::init(l ? h : e, h, rng));
    for (std::size_t l = 0; l < config.dec_layers; ++l)
        decoder_.push_back(num::LstmWeights::init(l ? h : e + h, h, rng));
    combine_w_ = num::uniform_param({2 * h, h}, rng);
    combine_b_ = Tensor::zeros({h}, true);
    out_w_ = num::uniform_param({h, tgt_vocab}, rng);
    out_b_ = Tensor::zeros({tgt_vocab}, true);
}

std::uint64_t SimulModel::fingerprint() const {
    std::ostringstream os;
    os << kArchTag << '|' << config_.emb_dim << '|' << config_.hidden_dim << '|' << config_.enc_layers << '|'
       << config_.dec_layers << '|' << src_vocab_ << '|' << tgt_vocab_;
    return num::fnv1a64(os.str());
}

std::vector<std::pair<std::string, Tensor>> SimulModel::named_parameters() const {
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
    p.emplace_back("combine.w", combine_w_);
    p.emplace_back("combine.b", combine_b_);
    p.emplace_back("out.w", out_w_);
    p.emplace_back("out.b", out_b_);
    return p;
}

std::vector<Tensor> SimulModel::parameters() const {
    std::vector<Tensor> out;
    for (auto &[n, t] : named_parameters()) out.push_back(t);
    return out;
}

Tensor SimulModel::embed_source(std::span<const int> ids, bool training, num::Rng &rng) const {
    return num::dropout(num::embedding(src_emb_, ids), config_.dropout, training, rng);
}

SimulModel::DecoderState SimulModel::initial_state(std::size_t batch) const {
    return {num::LstmState::zeros(decoder_.size(), batch, config_.hidden_dim),
            Tensor::zeros({batch, config_.hidden_dim})};
}

Tensor SimulModel::decoder_step(std::span<const int> prev, DecoderState &state, const Tensor &keys,
                                std::span<const std::size_t> source_lengths, bool training, num::Rng &rng) const {
    Tensor emb = num::dropout(num::embedding(tgt_emb_, prev), config_.dropout, training, rng);
    const std::array<Tensor, 2> in{emb, state.feed};
    Tensor h = num::lstm_stack_step(decoder_, num::concat_cols(in), state.lstm, config_.dropout, training, rng);
    Tensor alpha = num::softmax_rows(num::batch_dot(h, keys), source_lengths);
    Tensor ctx = num::batch_weighted_sum(alpha, keys);
    const std::array<Tensor, 2> hc{h, ctx};
    Tensor htilde = num::tanh(num::add_bias(num::matmul(num::concat_cols(hc), combine_w_), combine_b_));
    state.feed = htilde;
    return htilde;
}

Tensor SimulModel::project(const Tensor &htilde) const {
    return num::add_bias(num::matmul(htilde, out_w_), out_b_);
}

Tensor SimulModel::batch_loss(const text::PaddedBatch &batch, bool training, num::Rng &rng) const {
    auto enc = num::LstmState::zeros(encoder_.size(), batch.size, config_.hidden_dim);
    std::vector<Tensor> tops;
    tops.reserve(batch.src_len);
    for (const auto &ids : batch.source)
        tops.push_back(num::lstm_stack_step(encoder_, embed_source(ids, training, rng), enc, config_.dropout,
                                            training, rng));
    // Padded positions never receive attention, so running the encoder past a
    // sentence's end is harmless.
    const Tensor keys = num::stack_time(tops);

    auto state = initial_state(batch.size);
    std::vector<Tensor> outs;
    outs.reserve(batch.tgt_len);
    for (const auto &ids : batch.target_in)
        outs.push_back(num::dropout(decoder_step(ids, state, keys, batch.source_lengths, training, rng),
                                    config_.dropout, training, rng));
    Tensor logits = project(num::concat_rows(outs));
    std::vector<int> targets;
    targets.reserve(batch.tgt_len * batch.size);
    for (const auto &row : batch.target_out) targets.insert(targets.end(), row.begin(), row.end());
    return num::label_smoothed_ce(logits, targets, config_.label_smoothing, text::kPad);
}

SimulModel::SourceStream::SourceStream(const SimulModel &model)
    : model_(&model), state_(num::LstmState::zeros(model.encoder_.size(), 1, model.config_.hidden_dim)) {}

void SimulModel::SourceStream::read(int token) {
    if (token < 0 || static_cast<std::size_t>(token) >= model_->src_vocab_)
        throw EncodingError("source id " + std::to_string(token) + " outside vocabulary");
    num::Rng unused(0);
    const int ids[1] = {token};
    tops_.push_back(num::lstm_stack_step(model_->encoder_, model_->embed_source(ids, false, unused), state_,
                                         model_->config_.dropout, false, unused));
}

Tensor SimulModel::encode_source(std::span<const int> source) const {
    if (source.empty()) throw InputError("encode_source: empty source");
    SourceStream stream(*this);
    for (int id : source) stream.read(id);
    return num::concat_rows(stream.states());
}

namespace {
int masked_argmax(std::span<const double> z, bool allow_eos) {
    int best = -1;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const int id = static_cast<int>(j);
        if (id == text::kPad || id == text::kBos || (!allow_eos && id == text::kEos)) continue;
        if (best < 0 || z[j] > z[static_cast<std::size_t>(best)]) best = id;
    }
    return best;
}
} // namespace

ContinueResult SimulModel::continue_decode(std::span<const Tensor> source_states, std::span<const int> committed,
                                           std::size_t cap, bool allow_eos) const {
    if (source_states.empty()) throw ContractError("continue_decode: no source states");
    for (int id : committed)
        if (id < 0 || static_cast<std::size_t>(id) >= tgt_vocab_)
            throw EncodingError("continue_decode: target id " + std::to_string(id) + " outside vocabulary");
    const Tensor keys = num::stack_time(source_states);
    const std::size_t lengths[1] = {source_states.size()};
    num::Rng unused(0);
    auto state = initial_state(1);

    int prev = text::kBos;
    for (int tok : committed) {
        const int ids[1] = {prev};
        decoder_step(ids, state, keys, lengths, false, unused);
        prev = tok;
    }
    ContinueResult r;
    while (r.tokens.size() < cap) {
        const int ids[1] = {prev};
        const Tensor htilde = decoder_step(ids, state, keys, lengths, false, unused);
        const int next = masked_argmax(project(htilde).data(), allow_eos);
        if (next == text::kEos) {
            r.hit_eos = true;
            return r;
        }
        r.tokens.push_back(next);
        prev = next;
    }
    r.capped = true;
    return r;
}

SimulModel::CarriedDecoder::CarriedDecoder(const SimulModel &model)
    : model_(&model), state_(model.initial_state(1)), prev_(text::kBos) {}

ContinueResult SimulModel::CarriedDecoder::extend(std::span<const Tensor> source_states, std::size_t cap,
                                                  bool allow_eos) {
    if (source_states.empty()) throw ContractError("CarriedDecoder: no source states");
    const Tensor keys = num::stack_time(source_states);
    const std::size_t lengths[1] = {source_states.size()};
    num::Rng unused(0);
    ContinueResult r;
    while (r.tokens.size() < cap) {
        // Op results are immutable, so copying the handles is a snapshot.
        const DecoderState before = state_;
        const int ids[1] = {prev_};
        const Tensor htilde = model_->decoder_step(ids, state_, keys, lengths, false, unused);
        const int next = masked_argmax(model_->project(htilde).data(), allow_eos);
        if (next == text::kEos) {
            state_ = before;
            r.hit_eos = true;
            return r;
        }
        r.tokens.push_back(next);
        prev_ = next;
    }
    r.capped = true;
    return r;
}

std::vector<int> SimulModel::greedy_decode(std::span<const int> source, std::size_t max_len) const {
    SourceStream stream(*this);
    for (int id : source) stream.read(id);
    return continue_decode(stream.states(), {}, max_len, true).tokens;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::size_t epoch) { return seed * 7919 + epoch; }

void fit(SimulModel &model, const num::AdamConfig &adam, const num::EpochDataFn &data, std::size_t epochs,
         const SimulConfig &config, const num::EpochCallback &on_epoch) {
    auto params = model.parameters();
    num::AdamState opt(adam, params);
    num::run_training(
        params, opt, [&](const text::PaddedBatch &b, num::Rng &rng) { return model.batch_loss(b, true, rng); }, data,
        {.epochs = epochs, .max_tokens = config.max_tokens, .seed = config.seed}, on_epoch);
    model.train_steps += opt.step;
}

} // namespace

SimulModel train_full_sentence(std::span<const text::SentencePair> corpus, std::size_t src_vocab,
                               std::size_t tgt_vocab, const SimulConfig &config, const num::EpochCallback &on_epoch) {
    if (corpus.empty()) throw InputError("train_full_sentence: empty corpus");
    SimulModel model(config, src_vocab, tgt_vocab);
    std::vector<text::SentencePair> items(corpus.begin(), corpus.end());
    fit(model, config.adam, [&](std::size_t) { return items; }, config.epochs, config, on_epoch);
    return model;
}

SimulModel train_mixed(std::span<const text::SentencePair> corpus, std::span<const prefix::PrefixPair> prefixes,
                       std::size_t src_vocab, std::size_t tgt_vocab, const SimulConfig &config,
                       const num::EpochCallback &on_epoch) {
    if (corpus.empty()) throw InputError("train_mixed: empty corpus");
    prefix::validate_prefixes(corpus, prefixes);
    SimulModel model(config, src_vocab, tgt_vocab);
    auto data = [&](std::size_t epoch) {
        return prefix::mix_dataset(corpus, prefixes, mix_seed(config.seed, config.resample_each_epoch ? epoch : 1))
            .items;
    };
    fit(model, config.adam, data, config.epochs, config, on_epoch);
    return model;
}

SimulModel finetune(const SimulModel &base, std::span<const text::SentencePair> corpus,
                    std::span<const prefix::PrefixPair> prefixes, const SimulConfig &config,
                    const num::EpochCallback &on_epoch) {
    if (corpus.empty()) throw InputError("finetune: empty corpus");
    SimulModel model(config, base.src_vocab(), base.tgt_vocab());
    if (model.fingerprint() != base.fingerprint())
        throw CompatibilityError("finetune: configuration does not match the base model architecture");
    prefix::validate_prefixes(corpus, prefixes);
    // Deep copy: parameters are shared handles.
    std::vector<std::pair<std::string, Tensor>> stored;
    for (auto &[n, t] : base.named_parameters()) stored.emplace_back(n, t.detach());
    num::load_parameters(model.named_parameters(), stored);
    model.train_steps = base.train_steps;

    num::AdamConfig adam = config.adam;
    adam.lr *= config.finetune_lr_scale;
    adam.warmup_steps = 0;
    // A seed stream distinct from any scratch-training epoch.
    auto data = [&](std::size_t epoch) {
        return prefix::mix_dataset(corpus, prefixes, mix_seed(config.seed, 0x7E57 + epoch)).items;
    };
    fit(model, adam, data, 1, config, on_epoch);
    return model;
}

num::Checkpoint to_checkpoint(const SimulModel &model, const text::Vocabulary &src, const text::Vocabulary &tgt) {
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

SimulModel model_from_checkpoint(const num::Checkpoint &ckpt) {
    if (ckpt.arch != kArchTag)
        throw CompatibilityError("checkpoint architecture '" + ckpt.arch + "' is not " + kArchTag);
    SimulModel model(SimulConfig::from_json(ckpt.config_json), ckpt.src_tokens.size() + text::kNumReserved,
                     ckpt.tgt_tokens.size() + text::kNumReserved);
    if (model.fingerprint() != ckpt.fingerprint) throw CompatibilityError("checkpoint fingerprint mismatch");
    num::load_parameters(model.named_parameters(), ckpt.params);
    model.train_steps = ckpt.train_steps;
    return model;
}

} // namespace adadata::simul
