#include "run_config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "adadata/error.hpp"

namespace adadata::cli {

using nlohmann::json;

namespace {

json parse(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::exception &e) {
        throw InputError(std::string("config: malformed JSON: ") + e.what());
    }
}

template <class T>
void get(const json &j, const char *key, T &out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw InputError(std::string("config field '") + key + "': " + e.what());
    }
}

void get_path(const json &j, const char *key, std::filesystem::path &out) {
    std::string s;
    get(j, key, s);
    if (!s.empty()) out = s;
}

} // namespace

RunConfig RunConfig::from_json(const std::string &text) {
    const json j = parse(text);
    if (!j.is_object()) throw InputError("config: top level must be an object");
    static const char *kKnown[] = {"paths", "max_length", "mono",     "simul",         "generation",
                                   "decode", "thresholds", "finetune", "detok_for_bleu"};
    for (const auto &[key, value] : j.items())
        if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown))
            throw InputError("config: unknown field '" + key + "'");

    RunConfig c;
    if (j.contains("paths")) {
        const auto &p = j.at("paths");
        get_path(p, "train_src", c.paths.train_src);
        get_path(p, "train_tgt", c.paths.train_tgt);
        get_path(p, "test_src", c.paths.test_src);
        get_path(p, "test_tgt", c.paths.test_tgt);
        get_path(p, "src_vocab", c.paths.src_vocab);
        get_path(p, "tgt_vocab", c.paths.tgt_vocab);
        get_path(p, "mono_checkpoint", c.paths.mono_checkpoint);
        get_path(p, "full_checkpoint", c.paths.full_checkpoint);
        std::vector<std::string> refs;
        get(p, "extra_refs", refs);
        for (auto &r : refs) c.paths.extra_refs.emplace_back(r);
    }
    get(j, "max_length", c.max_length);
    if (j.contains("mono")) c.mono = mono::MonoLstmConfig::from_json(j.at("mono").dump());
    if (j.contains("simul")) c.simul = simul::SimulConfig::from_json(j.at("simul").dump());
    if (j.contains("generation")) {
        const auto &g = j.at("generation");
        get(g, "threshold", c.generation.threshold);
        get(g, "drop_empty_target", c.generation.drop_empty_target);
        get(g, "dedup", c.generation.dedup);
        get(g, "include_full_pair", c.generation.include_full_pair);
    }
    if (j.contains("decode")) {
        const auto &d = j.at("decode");
        get(d, "per_read_cap", c.caps.per_read);
        get(d, "global_factor", c.caps.global_factor);
        get(d, "global_offset", c.caps.global_offset);
    }
    get(j, "thresholds", c.thresholds);
    get(j, "finetune", c.finetune);
    get(j, "detok_for_bleu", c.detok_for_bleu);
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string RunConfig::to_json() const {
    std::vector<std::string> refs;
    for (const auto &r : paths.extra_refs) refs.push_back(r.string());
    json j = {
        {"paths",
         {{"train_src", paths.train_src.string()},
          {"train_tgt", paths.train_tgt.string()},
          {"test_src", paths.test_src.string()},
          {"test_tgt", paths.test_tgt.string()},
          {"extra_refs", refs},
          {"src_vocab", paths.src_vocab.string()},
          {"tgt_vocab", paths.tgt_vocab.string()},
          {"mono_checkpoint", paths.mono_checkpoint.string()},
          {"full_checkpoint", paths.full_checkpoint.string()}}},
        {"max_length", max_length},
        {"mono", json::parse(mono.to_json())},
        {"simul", json::parse(simul.to_json())},
        {"generation",
         {{"threshold", generation.threshold},
          {"drop_empty_target", generation.drop_empty_target},
          {"dedup", generation.dedup},
          {"include_full_pair", generation.include_full_pair}}},
        {"decode",
         {{"per_read_cap", caps.per_read}, {"global_factor", caps.global_factor}, {"global_offset", caps.global_offset}}},
        {"thresholds", thresholds},
        {"finetune", finetune},
        {"detok_for_bleu", detok_for_bleu}};
    return j.dump(2) + "\n";
}

void RunConfig::require(std::initializer_list<const std::filesystem::path *> files) const {
    for (const auto *p : files) {
        if (p->empty()) throw InputError("a required path is not set (see the config 'paths' section)");
        if (!std::filesystem::exists(*p)) throw InputError("no such file: " + p->string());
    }
}

void RunConfig::validate() const {
    mono.validate();
    simul.validate();
    generation.validate();
    if (max_length == 0) throw ParameterError("max_length must be >= 1");
    if (caps.per_read == 0) throw ParameterError("decode.per_read_cap must be >= 1");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) throw ParameterError("thresholds must be positive");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw ParameterError("thresholds must be strictly increasing");
    }
}

} // namespace adadata::cli
