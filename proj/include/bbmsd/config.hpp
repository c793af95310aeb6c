#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "resources.hpp"

namespace bbmsd {

// Ordered key-value pairs from a "key = value" text file; '#' starts a comment.
struct KeyValues {
    std::vector<std::pair<std::string, std::string>> entries;
    std::filesystem::path base_dir;  // relative paths resolve against this

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries)
            if (k == key) {
                v = value;
                return;
            }
        entries.emplace_back(key, value);
    }

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline KeyValues parse_key_values(std::istream& in, const std::string& origin = "config") {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(fmt::format("{}:{}: expected key = value", origin, lineno));
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw std::runtime_error(fmt::format("{}:{}: empty key", origin, lineno));
        kv.set(key, trim(line.substr(eq + 1)));
    }
    return kv;
}

inline KeyValues load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    auto kv = parse_key_values(in, path);
    kv.base_dir = std::filesystem::path(path).parent_path();
    return kv;
}

inline std::string resolve_path(const KeyValues& kv, const std::string& p) {
    if (p.empty() || p == "gross" || p == "two-gross") return p;
    std::filesystem::path path(p);
    if (path.is_absolute() || kv.base_dir.empty()) return p;
    return (kv.base_dir / path).lexically_normal().string();
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error(fmt::format("{}: expected a boolean, got '{}'", key, v));
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("{}: expected a number, got '{}'", key, v));
    }
}

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long d = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("{}: expected an integer, got '{}'", key, v));
    }
}

inline InputNoise parse_input_noise(const std::string& v) {
    if (v == "dephasing") return InputNoise::Dephasing;
    if (v == "depolarizing") return InputNoise::Depolarizing;
    throw std::runtime_error("input_noise: expected dephasing or depolarizing, got '" + v + "'");
}

inline const std::vector<std::string>& factory_keys() {
    static const std::vector<std::string> keys = {
        "name",      "code",           "protocol", "scheme",      "tracks",          "recycle",
        "compress_target", "masking",  "seed",     "p_phys",      "p_in",            "lambda",
        "syndrome_rounds", "input_noise", "twirl_input", "block_depolarizing"};
    return keys;
}

inline FactoryConfig factory_config(const KeyValues& kv, const std::vector<std::string>& extra_keys = {}) {
    FactoryConfig c;
    for (const auto& [k, v] : kv.entries) {
        if (k == "name") c.name = v;
        else if (k == "code") c.code = resolve_path(kv, v);
        else if (k == "protocol") c.protocol = resolve_path(kv, v);
        else if (k == "scheme") c.scheme = parse_scheme(v);
        else if (k == "tracks") c.tracks = static_cast<int>(parse_long(k, v));
        else if (k == "recycle") c.recycle = parse_bool(k, v);
        else if (k == "compress_target") c.compress_target = static_cast<std::size_t>(parse_long(k, v));
        else if (k == "masking") c.masking = parse_bool(k, v);
        else if (k == "seed") c.seed = static_cast<uint64_t>(parse_long(k, v));
        else if (k == "p_phys") c.noise.p_phys = parse_double(k, v);
        else if (k == "p_in") c.noise.p_in = parse_double(k, v);
        else if (k == "lambda") c.noise.lambda = parse_double(k, v);
        else if (k == "syndrome_rounds") c.noise.syndrome_rounds = static_cast<int>(parse_long(k, v));
        else if (k == "input_noise") c.noise.input_kind = parse_input_noise(v);
        else if (k == "twirl_input") c.noise.twirl_input = parse_bool(k, v);
        else if (k == "block_depolarizing") c.noise.block_depolarizing = parse_bool(k, v);
        else if (std::find(extra_keys.begin(), extra_keys.end(), k) == extra_keys.end())
            throw std::runtime_error("unknown config key '" + k + "'");
    }
    if (c.protocol.empty()) throw std::runtime_error("config needs a protocol path");
    if (!std::filesystem::exists(c.protocol)) throw std::runtime_error("protocol file not found: " + c.protocol);
    if (c.code != "gross" && c.code != "two-gross" && !std::filesystem::exists(c.code))
        throw std::runtime_error("code spec not found: " + c.code);
    if (c.tracks != 1 && c.tracks != 2) throw std::runtime_error("tracks must be 1 or 2");
    if (c.noise.syndrome_rounds < 1) throw std::runtime_error("syndrome_rounds must be positive");
    return c;
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Cartesian product over comma-separated values; the last listed key varies fastest.
inline std::vector<FactoryConfig> expand_grid(const KeyValues& kv, const std::vector<std::string>& extra_keys = {}) {
    std::vector<KeyValues> points{KeyValues{{}, kv.base_dir}};
    for (const auto& [k, v] : kv.entries) {
        if (std::find(extra_keys.begin(), extra_keys.end(), k) != extra_keys.end()) continue;
        const auto values = split_list(v);
        if (values.empty()) throw std::runtime_error("grid key '" + k + "' has no values");
        std::vector<KeyValues> next;
        for (const auto& p : points)
            for (const auto& val : values) {
                KeyValues q = p;
                q.set(k, val);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    std::vector<FactoryConfig> grid;
    if (kv.entries.empty()) return grid;
    for (const auto& p : points) grid.push_back(factory_config(p));
    return grid;
}

// FNV-1a over the canonical key=value listing.
inline uint64_t config_hash(const KeyValues& kv) {
    uint64_t h = 1469598103934665603ull;
    for (const auto& [k, v] : kv.entries)
        for (char ch : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ull;
        }
    return h;
}

}  // namespace bbmsd
