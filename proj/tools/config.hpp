#ifndef HAWKESWAVE_TOOLS_CONFIG_HPP
#define HAWKESWAVE_TOOLS_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <hawkeswave/error.hpp>

namespace hwcli {

using nlohmann::json;
using hawkeswave::ConfigError;

/// Keys with defaults. model.* has none: a run must name its model explicitly.
inline const json& default_values() {
    static const json d = {
        {"profile.step", 0.0},
        {"profile.half_width", 0.0},
        {"sim.epsilon", 0.02},
        {"sim.beta", 0.75},
        {"sim.t_end", 10.0},
        {"sim.seed", 1},
        {"sim.init", "ramp"},
        {"sim.band_tol", 1e-10},
        {"sim.observe_every", 0.0},
        {"sim.far_tail", true},
        {"sim.spikes", true},
        {"nfe.dt", 0.01},
        {"nfe.T", 10.0},
        {"nfe.observe_every", 1.0},
        {"nfe.kind", "voltage"},
        {"nfe.rule", "cell"},
        {"ensemble.runs", 200},
        {"ensemble.t_f", 2.0},
        {"ensemble.base_seed", 1},
        {"ensemble.jobs", 1},
        {"ensemble.spikes", false},
        {"phase.tube_radius", 0.0},
        {"spectrum.epsilon", 0.02},
        {"spectrum.half_width", 10.0},
        {"spectrum.refine", false},
        {"rates.T0", 5.0},
        {"rates.observe_every", 0.01},
        {"out.dir", "out"},
    };
    return d;
}

inline const std::vector<std::string>& required_keys() {
    static const std::vector<std::string> k{"model.f.family", "model.f.gain", "model.f.center", "model.sigma"};
    return k;
}

/// Flat namespaced configuration: nested objects are flattened to dotted keys.
class Config {
public:
    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw ConfigError("config root must be a JSON object");
        Config c;
        flatten(j, "", c.values_);
        return c;
    }

    /// key=value; the value is parsed as JSON when possible, else taken as a string.
    void set(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
        const std::string key = assignment.substr(0, eq);
        const std::string text = assignment.substr(eq + 1);
        json v = json::parse(text, nullptr, false);
        if (v.is_discarded()) v = text;
        values_[key] = v;
    }

    void set(const std::string& key, json value) { values_[key] = std::move(value); }

    /// Fills defaults, rejects unknown keys and checks that every required key is present.
    void resolve() {
        for (auto it = values_.begin(); it != values_.end(); ++it) {
            const bool known = default_values().contains(it.key()) ||
                               std::find(required_keys().begin(), required_keys().end(), it.key()) != required_keys().end();
            if (!known) throw ConfigError("unknown config key '" + it.key() + "'");
        }
        for (const auto& k : required_keys())
            if (!values_.contains(k)) throw ConfigError("missing required config key '" + k + "'");
        for (auto it = default_values().begin(); it != default_values().end(); ++it)
            if (!values_.contains(it.key())) values_[it.key()] = it.value();
    }

    double number(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
        return v.get<double>();
    }

    std::uint64_t unsigned_int(const std::string& key) const {
        const json& v = at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        throw ConfigError("config key '" + key + "' must be a nonnegative integer");
    }

    std::string text(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
        return v.get<bool>();
    }

    const json& values() const noexcept { return values_; }

private:
    const json& at(const std::string& key) const {
        if (!values_.contains(key)) throw ConfigError("missing config key '" + key + "'");
        return values_.at(key);
    }

    static void flatten(const json& j, const std::string& prefix, json& out) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
            if (it.value().is_object()) flatten(it.value(), key, out);
            else out[key] = it.value();
        }
    }

    json values_ = json::object();
};

}  // namespace hwcli

#endif  // HAWKESWAVE_TOOLS_CONFIG_HPP
