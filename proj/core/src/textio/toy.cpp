#include "adadata/textio/toy.hpp"

#include "adadata/error.hpp"
#include "adadata/numerics/rng.hpp"
#include "adadata/textio/bpe.hpp"

namespace adadata::text {

void ToyOptions::validate() const {
    if (vocab == 0 || modifiers >= vocab) throw ParameterError("toy: need 0 <= modifiers < vocab");
    if (min_length == 0 || min_length > max_length) throw ParameterError("toy: need 1 <= min_length <= max_length");
    if (!end_marker.empty() && min_length < 2) throw ParameterError("toy: an end marker needs min_length >= 2");
    if (!(modifier_rate >= 0.0 && modifier_rate <= 1.0)) throw ParameterError("toy: modifier_rate must lie in [0, 1]");
}

namespace {

std::size_t word_index(const std::string &w, const ToyOptions &o) {
    if (w.size() < 2 || w[0] != 's') throw InputError("toy: unknown source word '" + w + "'");
    std::size_t v = 0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (w[i] < '0' || w[i] > '9') throw InputError("toy: unknown source word '" + w + "'");
        v = v * 10 + static_cast<std::size_t>(w[i] - '0');
    }
    if (v >= o.vocab) throw InputError("toy: unknown source word '" + w + "'");
    return v;
}

std::string join(const std::vector<std::string> &words) {
    std::string out;
    for (const auto &w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

std::vector<std::string> sample_lines(std::size_t n, num::Rng &rng, const ToyOptions &o) {
    std::vector<std::string> lines;
    lines.reserve(n);
    const std::size_t plain = o.vocab - o.modifiers;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = o.min_length + rng.below(o.max_length - o.min_length + 1);
        std::vector<std::string> words;
        const std::size_t content = o.end_marker.empty() ? len : len - 1;
        for (std::size_t j = 0; j < content; ++j) {
            const bool mod = o.modifiers > 0 && rng.uniform() < o.modifier_rate;
            const std::size_t w = mod ? rng.below(o.modifiers) : o.modifiers + rng.below(plain);
            words.push_back("s" + std::to_string(w));
        }
        if (!o.end_marker.empty()) words.push_back(o.end_marker);
        lines.push_back(join(words));
    }
    return lines;
}

} // namespace

std::string toy_translate(const std::string &source_line, const ToyOptions &options) {
    auto words = split_whitespace(source_line);
    const bool marked = !options.end_marker.empty() && !words.empty() && words.back() == options.end_marker;
    if (marked) words.pop_back();
    std::vector<std::size_t> ids;
    for (const auto &w : words) ids.push_back(word_index(w, options));
    const auto is_mod = [&](std::size_t id) { return id < options.modifiers; };
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ids.size();) {
        if (is_mod(ids[i]) && i + 1 < ids.size() && !is_mod(ids[i + 1])) {
            out.push_back("t" + std::to_string(ids[i + 1]));
            out.push_back("t" + std::to_string(ids[i]));
            i += 2;
        } else {
            out.push_back("t" + std::to_string(ids[i]));
            ++i;
        }
    }
    if (marked) out.push_back(options.end_marker);
    return join(out);
}

ToyCorpus make_toy_corpus(const ToyOptions &options) {
    options.validate();
    ToyCorpus c;
    num::Rng train_rng(options.seed, 0x70A1);
    num::Rng test_rng(options.seed, 0x70A2);
    c.train_source = sample_lines(options.train_pairs, train_rng, options);
    c.test_source = sample_lines(options.test_pairs, test_rng, options);
    for (const auto &l : c.train_source) c.train_target.push_back(toy_translate(l, options));
    for (const auto &l : c.test_source) c.test_target.push_back(toy_translate(l, options));
    return c;
}

} // namespace adadata::text
