#include "adadata/prefixgen/prefixgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "adadata/error.hpp"
#include "adadata/numerics/checkpoint.hpp"
#include "adadata/numerics/rng.hpp"

namespace adadata::prefix {

void GenerationConfig::validate() const {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        throw ParameterError("generation threshold must be a positive number");
}

CumulativeAttention cumulative_info(const mono::AttentionMatrix &attention) {
    CumulativeAttention c;
    c.rows = attention.rows;
    c.cols = attention.cols;
    c.values.resize(attention.weights.size());
    for (std::size_t t = 0; t < c.rows; ++t) {
        double acc = 0.0;
        for (std::size_t s = 0; s < c.cols; ++s) {
            acc += attention.at(t, s);
            c.values[t * c.cols + s] = acc;
        }
    }
    return c;
}

std::size_t max_translatable_prefix(const CumulativeAttention &sigma, std::size_t s, double threshold) {
    std::size_t t = 0;
    while (t < sigma.rows && sigma.at(t, s - 1) >= threshold) ++t;
    return t;
}

namespace {
bool is_full(std::size_t s, std::size_t t, std::size_t S, std::size_t T) {
    // (S, T-1) materializes to the same example as (S, T): the dropped row is <eos>.
    return s == S && t + 1 >= T;
}
} // namespace

std::vector<PrefixPair> generate_prefix_pairs(const mono::AttentionMatrix &attention, const GenerationConfig &config,
                                              std::size_t line) {
    config.validate();
    const auto sigma = cumulative_info(attention);
    std::vector<PrefixPair> out;
    for (std::size_t s = 1; s <= sigma.cols; ++s) {
        const std::size_t t = max_translatable_prefix(sigma, s, config.threshold);
        if (t == 0 && config.drop_empty_target) continue;
        if (!config.include_full_pair && is_full(s, t, sigma.cols, sigma.rows)) continue;
        out.push_back({line, s, t});
    }
    if (config.dedup) out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<PrefixPair> proportional_prefix_pairs(const text::SentencePair &pair, bool include_full_pair) {
    const std::size_t S = pair.source.size(), T = pair.target.size();
    std::vector<PrefixPair> out;
    for (std::size_t s = 1; s <= S; ++s) {
        // Round half up, in integers: floor((2 s T + S) / 2S).
        std::size_t t = (2 * s * T + S) / (2 * S);
        t = std::clamp<std::size_t>(t, 1, T);
        if (!include_full_pair && is_full(s, t, S, T)) continue;
        PrefixPair p{pair.line, s, t};
        if (out.empty() || out.back() != p) out.push_back(p);
    }
    return out;
}

text::SentencePair materialize(const text::SentencePair &full, const PrefixPair &prefix) {
    if (prefix.s < 1 || prefix.s > full.source.size() || prefix.t > full.target.size())
        throw InputError("prefix (s=" + std::to_string(prefix.s) + ", t=" + std::to_string(prefix.t) +
                         ") exceeds the pair at line " + std::to_string(prefix.line));
    text::SentencePair p;
    p.line = full.line;
    p.source.assign(full.source.begin(), full.source.begin() + static_cast<std::ptrdiff_t>(prefix.s));
    p.target.assign(full.target.begin(), full.target.begin() + static_cast<std::ptrdiff_t>(prefix.t));
    if (p.target.empty() || p.target.back() != text::kEos) p.target.push_back(text::kEos);
    return p;
}

std::size_t MixedEpoch::prefix_count() const {
    return static_cast<std::size_t>(std::count(is_prefix.begin(), is_prefix.end(), true));
}

namespace {
std::unordered_map<std::size_t, std::size_t> index_by_line(std::span<const text::SentencePair> corpus) {
    std::unordered_map<std::size_t, std::size_t> idx;
    for (std::size_t i = 0; i < corpus.size(); ++i) idx.emplace(corpus[i].line, i);
    return idx;
}
} // namespace

void validate_prefixes(std::span<const text::SentencePair> corpus, std::span<const PrefixPair> prefixes) {
    const auto idx = index_by_line(corpus);
    for (const auto &p : prefixes) {
        auto it = idx.find(p.line);
        if (it == idx.end())
            throw InputError("prefix references line " + std::to_string(p.line) + ", which is not in the corpus");
        const auto &full = corpus[it->second];
        if (p.s < 1 || p.s > full.source.size() || p.t > full.target.size())
            throw InputError("prefix (s=" + std::to_string(p.s) + ", t=" + std::to_string(p.t) +
                             ") exceeds the pair at line " + std::to_string(p.line));
    }
}

MixedEpoch mix_dataset(std::span<const text::SentencePair> full_pairs, std::span<const PrefixPair> prefix_pairs,
                       std::uint64_t seed) {
    if (prefix_pairs.empty()) throw InputError("mix_dataset: no prefix pairs to mix");
    const auto idx = index_by_line(full_pairs);
    num::Rng rng(seed, 0x313C);
    const std::size_t n = full_pairs.size();

    std::vector<std::size_t> chosen;
    if (prefix_pairs.size() >= n) {
        // Partial Fisher-Yates: the first n slots become a uniform sample.
        std::vector<std::size_t> all(prefix_pairs.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        for (std::size_t i = 0; i < n; ++i) std::swap(all[i], all[i + rng.below(all.size() - i)]);
        chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
        for (std::size_t i = 0; i < n; ++i) chosen.push_back(rng.below(prefix_pairs.size()));
    }

    std::vector<std::pair<text::SentencePair, bool>> items;
    items.reserve(2 * n);
    for (const auto &p : full_pairs) items.emplace_back(p, false);
    for (auto k : chosen) {
        const auto &pp = prefix_pairs[k];
        auto it = idx.find(pp.line);
        if (it == idx.end())
            throw InputError("prefix references line " + std::to_string(pp.line) + ", which is not in the corpus");
        items.emplace_back(materialize(full_pairs[it->second], pp), true);
    }
    rng.shuffle(items);
    MixedEpoch out;
    out.items.reserve(items.size());
    for (auto &[p, is_prefix] : items) {
        out.items.push_back(std::move(p));
        out.is_prefix.push_back(is_prefix);
    }
    return out;
}

std::vector<PrefixPair> generate_corpus_prefixes(std::span<const text::SentencePair> corpus,
                                                 const mono::MonoLstmModel &model, const GenerationConfig &config) {
    config.validate();
    std::vector<PrefixPair> out;
    for (const auto &pair : corpus) {
        auto pairs = generate_prefix_pairs(model.attention_matrix(pair), config, pair.line);
        out.insert(out.end(), pairs.begin(), pairs.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {
constexpr std::string_view kHeaderPrefix = "# adadata-prefixes ";

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}
} // namespace

std::string format_prefix_file(double threshold, std::span<const PrefixPair> pairs) {
    std::string out = std::string(kHeaderPrefix) + "v1 e=" + format_double(threshold) + "\n";
    for (const auto &p : pairs)
        out += std::to_string(p.line) + "\t" + std::to_string(p.s) + "\t" + std::to_string(p.t) + "\n";
    return out;
}

void write_prefix_file(const std::filesystem::path &path, double threshold, std::span<const PrefixPair> pairs) {
    num::write_file_atomic(path, format_prefix_file(threshold, pairs));
}

PrefixFile parse_prefix_file(std::string_view contents) {
    std::istringstream in{std::string(contents)};
    std::string line;
    if (!std::getline(in, line) || line.rfind(kHeaderPrefix, 0) != 0)
        throw InputError("prefix file: missing '# adadata-prefixes' header");
    const std::string rest = line.substr(kHeaderPrefix.size());
    if (rest.rfind("v1 e=", 0) != 0) throw CompatibilityError("prefix file: unsupported version in '" + line + "'");
    PrefixFile f;
    const std::string ev = rest.substr(5);
    auto res = std::from_chars(ev.data(), ev.data() + ev.size(), f.threshold);
    if (res.ec != std::errc() || res.ptr != ev.data() + ev.size())
        throw InputError("prefix file: bad threshold in '" + line + "'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        PrefixPair p;
        std::string extra;
        if (!(row >> p.line >> p.s >> p.t) || (row >> extra))
            throw InputError("prefix file: malformed row " + std::to_string(lineno) + ": '" + line + "'");
        f.pairs.push_back(p);
    }
    return f;
}

PrefixFile read_prefix_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open prefix file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_prefix_file(ss.str());
}

} // namespace adadata::prefix
