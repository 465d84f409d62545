#include "adadata/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "adadata/error.hpp"

namespace adadata::metrics {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const Tokens &tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            key += '\x1f';
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

struct SentenceStats {
    std::array<std::size_t, 4> matched{};
    std::array<std::size_t, 4> total{};
    std::size_t hyp_len = 0;
    std::size_t ref_len = 0;
};

SentenceStats sentence_stats(const Tokens &hyp, std::span<const Tokens> refs, std::size_t max_n) {
    if (refs.empty()) throw InputError("bleu: empty reference set");
    SentenceStats st;
    st.hyp_len = hyp.size();
    std::size_t best = refs.front().size();
    for (const auto &r : refs) {
        const auto d = [&](std::size_t len) { return len > hyp.size() ? len - hyp.size() : hyp.size() - len; };
        if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
    }
    st.ref_len = best;
    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto h = count_ngrams(hyp, n);
        NgramCounts max_ref;
        for (const auto &r : refs)
            for (const auto &[g, c] : count_ngrams(r, n)) {
                auto &m = max_ref[g];
                m = std::max(m, c);
            }
        for (const auto &[g, c] : h) {
            auto it = max_ref.find(g);
            st.matched[n - 1] += std::min(c, it == max_ref.end() ? std::size_t{0} : it->second);
            st.total[n - 1] += c;
        }
    }
    return st;
}

double brevity_penalty(std::size_t hyp_len, std::size_t ref_len) {
    if (hyp_len == 0) return 0.0;
    if (hyp_len >= ref_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

void check_order(std::size_t max_n) {
    if (max_n < 1 || max_n > 4) throw ParameterError("bleu: max_n must lie in [1, 4]");
}

} // namespace

BleuScore corpus_bleu(std::span<const Tokens> hypotheses, std::span<const std::vector<Tokens>> references,
                      std::size_t max_n) {
    check_order(max_n);
    if (hypotheses.size() != references.size())
        throw InputError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                         std::to_string(references.size()) + " reference sets");
    SentenceStats sum;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        const auto st = sentence_stats(hypotheses[i], references[i], max_n);
        for (std::size_t n = 0; n < max_n; ++n) {
            sum.matched[n] += st.matched[n];
            sum.total[n] += st.total[n];
        }
        sum.hyp_len += st.hyp_len;
        sum.ref_len += st.ref_len;
    }
    BleuScore score;
    score.hyp_length = sum.hyp_len;
    score.ref_length = sum.ref_len;
    score.brevity_penalty = brevity_penalty(sum.hyp_len, sum.ref_len);
    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t n = 0; n < max_n; ++n) {
        if (sum.total[n] == 0) continue;
        ++score.effective_order;
        score.precisions[n] = static_cast<double>(sum.matched[n]) / static_cast<double>(sum.total[n]);
        if (sum.matched[n] == 0)
            zero = true;
        else
            log_sum += std::log(score.precisions[n]);
    }
    if (score.effective_order == 0 || zero) return score;
    score.bleu = 100.0 * score.brevity_penalty * std::exp(log_sum / static_cast<double>(score.effective_order));
    return score;
}

double sentence_bleu(const Tokens &hypothesis, std::span<const Tokens> references, std::size_t max_n) {
    check_order(max_n);
    const auto st = sentence_stats(hypothesis, references, max_n);
    if (st.total[0] == 0 || st.matched[0] == 0) return 0.0;
    double log_sum = std::log(static_cast<double>(st.matched[0]) / static_cast<double>(st.total[0]));
    for (std::size_t n = 1; n < max_n; ++n)
        log_sum += std::log(static_cast<double>(st.matched[n] + 1) / static_cast<double>(st.total[n] + 1));
    return 100.0 * brevity_penalty(st.hyp_len, st.ref_len) * std::exp(log_sum / static_cast<double>(max_n));
}

double average_lagging(std::span<const std::size_t> delays, std::size_t source_len) {
    const std::size_t T = delays.size();
    if (T == 0) throw InputError("average lagging is undefined for an empty translation");
    if (source_len == 0) throw InputError("average lagging is undefined for an empty source");
    const double S = static_cast<double>(source_len);
    // (t - 1) / gamma with gamma = T / S.
    const double rate = S / static_cast<double>(T);
    std::size_t tau = T;
    for (std::size_t t = 0; t < T; ++t)
        if (delays[t] >= source_len) {
            tau = t + 1;
            break;
        }
    double acc = 0.0;
    for (std::size_t t = 0; t < tau; ++t) acc += static_cast<double>(delays[t]) - static_cast<double>(t) * rate;
    return acc / static_cast<double>(tau);
}

namespace {
bool has_marker(const std::string &subword) {
    constexpr std::string_view marker = "</w>";
    return subword.size() >= marker.size() && subword.compare(subword.size() - marker.size(), marker.size(), marker) == 0;
}

// Unsegmented text carries no marker at all; each of its tokens is a word.
std::vector<bool> word_ends(const Tokens &tokens) {
    const bool segmented = std::any_of(tokens.begin(), tokens.end(), has_marker);
    std::vector<bool> ends(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) ends[i] = !segmented || has_marker(tokens[i]);
    if (!ends.empty()) ends.back() = true;
    return ends;
}
} // namespace

WordDelays word_level_delays(std::span<const std::size_t> subword_delays, const Tokens &source_subwords,
                             const Tokens &target_subwords) {
    if (subword_delays.size() != target_subwords.size())
        throw InputError("word delays: " + std::to_string(subword_delays.size()) + " delays for " +
                         std::to_string(target_subwords.size()) + " target subwords");
    // started[r] = source words begun within the first r subwords.
    std::vector<std::size_t> started(source_subwords.size() + 1, 0);
    const auto source_ends = word_ends(source_subwords);
    bool at_word_start = true;
    for (std::size_t i = 0; i < source_subwords.size(); ++i) {
        started[i + 1] = started[i] + (at_word_start ? 1 : 0);
        at_word_start = source_ends[i];
    }
    const auto target_ends = word_ends(target_subwords);
    WordDelays out;
    out.source_words = started.back();
    for (std::size_t t = 0; t < target_subwords.size(); ++t) {
        if (subword_delays[t] > source_subwords.size())
            throw InputError("word delays: delay exceeds the source length");
        if (target_ends[t])
            out.delays.push_back(started[subword_delays[t]]);
    }
    return out;
}

double LatencyReport::mean() const {
    if (per_sentence.empty()) return 0.0;
    return std::accumulate(per_sentence.begin(), per_sentence.end(), 0.0) / static_cast<double>(per_sentence.size());
}

std::string EvaluationReport::format() const {
    char buf[128];
    std::string out = "# adadata-report v1\n";
    auto line = [&](const char *key, double v) {
        std::snprintf(buf, sizeof buf, "%s=%.4f\n", key, v);
        out += buf;
    };
    line("bleu", bleu.bleu);
    static constexpr const char *kP[] = {"p1", "p2", "p3", "p4"};
    for (std::size_t n = 0; n < 4; ++n) line(kP[n], 100.0 * bleu.precisions[n]);
    line("bp", bleu.brevity_penalty);
    const double al = has_latency ? latency.mean() : std::nan("");
    if (has_latency)
        line("mean_al", al);
    else
        out += "mean_al=nan\n";
    out += "n_sentences=" + std::to_string(sentences) + "\n";
    std::snprintf(buf, sizeof buf, "RESULT bleu=%.4f al=%.4f\n", bleu.bleu, al);
    out += buf;
    return out;
}

} // namespace adadata::metrics
