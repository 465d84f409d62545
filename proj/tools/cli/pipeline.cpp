#include "pipeline.hpp"

#include <charconv>
#include <cstdio>

#include "adadata/error.hpp"
#include "adadata/numerics/checkpoint.hpp"
#include "adadata/textio/bpe.hpp"

namespace adadata::cli {

Vocabs load_vocabs(const RunConfig &config) {
    config.require({&config.paths.src_vocab, &config.paths.tgt_vocab});
    return {text::Vocabulary::load(config.paths.src_vocab), text::Vocabulary::load(config.paths.tgt_vocab)};
}

Vocabs vocabs_of(const num::Checkpoint &ckpt) {
    return {text::Vocabulary(ckpt.src_tokens), text::Vocabulary(ckpt.tgt_tokens)};
}

std::vector<text::SentencePair> load_corpus(const std::filesystem::path &src, const std::filesystem::path &tgt,
                                            const Vocabs &vocabs, std::size_t max_length) {
    return text::load_parallel_corpus(src, tgt, vocabs.src, vocabs.tgt, {.max_length = max_length});
}

void write_lines(const std::filesystem::path &path, const std::vector<std::string> &lines) {
    std::string out;
    for (const auto &l : lines) {
        out += l;
        out += '\n';
    }
    num::write_file_atomic(path, out);
}

Policy Policy::parse(const std::string &text) {
    if (text == "adaptive") return {Kind::Adaptive, 0};
    if (text == "adaptive-carry") return {Kind::AdaptiveCarry, 0};
    if (text == "full") return {Kind::Full, 0};
    if (text.rfind("waitk:", 0) == 0) {
        const std::string n = text.substr(6);
        std::size_t k = 0;
        auto res = std::from_chars(n.data(), n.data() + n.size(), k);
        if (res.ec == std::errc() && res.ptr == n.data() + n.size() && k >= 1) return {Kind::WaitK, k};
    }
    throw ParameterError("policy must be adaptive, adaptive-carry, full or waitk:<k> with k >= 1, got '" + text + "'");
}

DecodedSet decode_lines(const simul::SimulModel &model, const Vocabs &vocabs,
                        const std::vector<std::string> &source_lines, const Policy &policy,
                        const stream::DecodeCaps &caps) {
    DecodedSet out;
    for (const auto &line : source_lines) {
        const auto ids = vocabs.src.encode(text::split_whitespace(line));
        if (ids.empty()) {
            out.hypotheses.emplace_back();
            out.traces.emplace_back();
            continue;
        }
        stream::DecodeResult r;
        switch (policy.kind) {
        case Policy::Kind::Adaptive: r = stream::adaptive_decode(model, ids, caps); break;
        case Policy::Kind::AdaptiveCarry:
            r = stream::adaptive_decode(model, ids, caps, stream::StateMode::Carry);
            break;
        case Policy::Kind::Full: r = stream::full_decode(model, ids, caps); break;
        case Policy::Kind::WaitK: r = stream::waitk_decode(model, ids, policy.k, caps); break;
        }
        out.hypotheses.push_back(vocabs.tgt.decode(r.tokens));
        out.traces.push_back(std::move(r.trace));
    }
    return out;
}

std::string hypothesis_text(const std::vector<std::string> &tokens, bool detok) {
    if (detok) return text::detokenize(tokens);
    std::string s;
    for (const auto &t : tokens) {
        if (!s.empty()) s += ' ';
        s += t;
    }
    return s;
}

metrics::EvaluationReport evaluate_lines(const std::vector<std::string> &hypotheses,
                                         const std::vector<std::vector<std::string>> &reference_sets,
                                         const std::vector<stream::ParsedTrace> *traces,
                                         const std::vector<std::string> *word_sources) {
    std::vector<metrics::Tokens> hyps;
    for (const auto &h : hypotheses) hyps.push_back(text::split_whitespace(h));
    std::vector<std::vector<metrics::Tokens>> refs(hyps.size());
    for (const auto &set : reference_sets) {
        if (set.size() != hyps.size())
            throw InputError("evaluate: " + std::to_string(hyps.size()) + " hypotheses but a reference file has " +
                             std::to_string(set.size()) + " lines");
        for (std::size_t i = 0; i < set.size(); ++i) refs[i].push_back(text::split_whitespace(set[i]));
    }
    if (reference_sets.empty()) throw InputError("evaluate: at least one reference file is required");

    metrics::EvaluationReport report;
    report.sentences = hyps.size();
    report.bleu = metrics::corpus_bleu(hyps, refs);
    if (traces) {
        if (traces->size() != hyps.size())
            throw InputError("evaluate: " + std::to_string(traces->size()) + " traces for " +
                             std::to_string(hyps.size()) + " hypotheses");
        if (word_sources && word_sources->size() != traces->size())
            throw InputError("evaluate: " + std::to_string(word_sources->size()) + " source lines for " +
                             std::to_string(traces->size()) + " traces");
        report.has_latency = true;
        for (std::size_t i = 0; i < traces->size(); ++i) {
            const auto &t = (*traces)[i];
            if (t.reads == 0) continue;
            std::vector<std::size_t> delays = t.delays;
            std::size_t source_len = t.reads;
            if (word_sources) {
                const auto source = text::split_whitespace((*word_sources)[i]);
                if (source.size() != t.reads)
                    throw InputError("evaluate: source line " + std::to_string(i + 1) + " has " +
                                     std::to_string(source.size()) + " tokens but its trace has " +
                                     std::to_string(t.reads) + " READs");
                auto words = metrics::word_level_delays(t.delays, source, t.tokens);
                delays = std::move(words.delays);
                source_len = words.source_words;
            }
            report.latency.per_sentence.push_back(delays.empty() ? static_cast<double>(source_len)
                                                                 : metrics::average_lagging(delays, source_len));
        }
    }
    return report;
}

std::string log_line(const num::EpochLog &log) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "epoch=%zu step=%llu loss=%.17g", log.epoch,
                  static_cast<unsigned long long>(log.step), log.loss);
    return buf;
}

} // namespace adadata::cli
