#pragma once

#include <json.hpp>

#include "adadata/error.hpp"
#include "adadata/numerics/adam.hpp"

namespace adadata::detail {

inline nlohmann::json adam_to_json(const num::AdamConfig &a) {
    return {{"lr", a.lr},
            {"beta1", a.beta1},
            {"beta2", a.beta2},
            {"eps", a.eps},
            {"warmup_steps", a.warmup_steps},
            {"warmup_init_lr", a.warmup_init_lr},
            {"clip_norm", a.clip_norm}};
}

template <class T>
void read_field(const nlohmann::json &j, const char *key, T &out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
        throw InputError(std::string("config field '") + key + "': " + e.what());
    }
}

inline num::AdamConfig adam_from_json(const nlohmann::json &j, num::AdamConfig a) {
    read_field(j, "lr", a.lr);
    read_field(j, "beta1", a.beta1);
    read_field(j, "beta2", a.beta2);
    read_field(j, "eps", a.eps);
    read_field(j, "warmup_steps", a.warmup_steps);
    read_field(j, "warmup_init_lr", a.warmup_init_lr);
    read_field(j, "clip_norm", a.clip_norm);
    return a;
}

inline nlohmann::json parse_json(const std::string &text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
}

} // namespace adadata::detail
