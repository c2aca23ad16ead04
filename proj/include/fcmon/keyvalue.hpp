#pragma once

#include <charconv>
#include <istream>
#include <map>
#include <string>

#include "fcmon/errors.hpp"
#include "fcmon/text.hpp"

namespace fcmon::kv {

inline double to_double(const std::string& key, std::string_view v) {
    v = trim(v);
    double d = 0.0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (v.empty() || ec != std::errc{} || end != v.data() + v.size())
        throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
    return d;
}

inline long to_long(const std::string& key, std::string_view v) {
    v = trim(v);
    long l = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), l);
    if (v.empty() || ec != std::errc{} || end != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
    return l;
}

inline std::size_t to_size(const std::string& key, std::string_view v) {
    const long l = to_long(key, v);
    if (l < 0) throw ConfigError(key, "must be >= 0");
    return static_cast<std::size_t>(l);
}

inline bool to_bool(const std::string& key, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true/false, got '" + std::string(v) + "'");
}

/// `key = value` per line; blank lines and '#' comments skipped. Duplicate
/// keys and lines without '=' throw ConfigError.
inline std::map<std::string, std::string> read(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto v = line.substr(0, line.find('#'));
        auto t = trim(v);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        const std::string key(trim(t.substr(0, eq)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
        if (!out.emplace(key, std::string(trim(t.substr(eq + 1)))).second)
            throw ConfigError(key, "duplicate key");
    }
    return out;
}

}  // namespace fcmon::kv
