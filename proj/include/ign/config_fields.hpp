#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ign/errors.hpp"

namespace ign {

// Strict reader for one JSON config section: type errors and unknown keys are
// collected instead of thrown, so a caller can report every violation at once.
class FieldReader {
public:
    FieldReader(const nlohmann::json& j, std::string section, std::vector<std::string>& problems)
        : j_(j), section_(std::move(section)), problems_(problems) {
        if (!j_.is_null() && !j_.is_object()) problems_.push_back(section_ + ": expected an object");
    }

    template <class T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            problems_.push_back(section_ + "." + key + ": wrong type (" + j_.at(key).dump() + ")");
        }
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key) || j_.at(key).is_null()) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            problems_.push_back(section_ + "." + key + ": wrong type (" + j_.at(key).dump() + ")");
        }
    }

    // Reads a string and converts it, recording conversion failures.
    template <class T, class Parse>
    void read_parsed(const std::string& key, T& out, Parse parse) {
        std::optional<std::string> text;
        read(key, text);
        if (!text) return;
        try {
            out = parse(*text);
        } catch (const Error& e) {
            problems_.push_back(section_ + "." + key + ": " + e.what());
        }
    }

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    // Marks `key` as known and returns its value (null when absent), for nested sections.
    nlohmann::json take(const std::string& key) {
        seen_.insert(key);
        return has(key) ? j_.at(key) : nlohmann::json();
    }

    void finish() {
        if (!j_.is_object()) return;
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) problems_.push_back(section_ + "." + key + ": unknown key");
        }
    }

private:
    const nlohmann::json& j_;
    std::string section_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

inline void throw_if_problems(const std::vector<std::string>& problems, const std::string& what) {
    if (problems.empty()) return;
    std::string msg = "invalid " + what + ":";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
}

}  // namespace ign
