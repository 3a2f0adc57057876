#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermelt/material.hpp"

namespace thermelt {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': cannot parse '" + text + "' as a number");
    }
}

}  // namespace detail

// Flat `key = value` configuration with `#` comments. Dotted prefixes are
// plain key text, not nesting. Parsing is strict: every key must be consumed
// by the experiment setup, and leftovers are reported as errors so that a
// misspelled key can never silently fall back to a default.
class Config {
public:
    Config() = default;

    static Config from_string(const std::string& text, const std::string& name = "<string>") {
        Config c;
        c.name_ = name;
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config: " + name + ":" + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config: " + name + ":" + std::to_string(line_no) +
                                  ": empty key");
            if (c.values_.count(key))
                throw ConfigError("config: " + name + ": duplicate key '" + key + "'");
            c.values_[key] = value;
        }
        return c;
    }

    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str(), path);
    }

    const std::string& name() const { return name_; }

    // Command line overrides replace or add values before consumption.
    void set_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: override '" + assignment + "' is not of the form key=value");
        const std::string key = detail::trim(assignment.substr(0, eq));
        const std::string value = detail::trim(assignment.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: override with empty key");
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("config: missing required key '" + key + "'");
        used_.insert(key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) {
        return detail::parse_double(key, get_string(key));
    }

    double get_double(const std::string& key, double fallback) {
        return has(key) ? get_double(key) : fallback;
    }

    int get_int(const std::string& key) {
        const double v = get_double(key);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError("config: key '" + key + "' must be an integer");
        return i;
    }

    int get_int(const std::string& key, int fallback) {
        return has(key) ? get_int(key) : fallback;
    }

    bool get_bool(const std::string& key) {
        const std::string v = get_string(key);
        if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "off" || v == "no" || v == "0") return false;
        throw ConfigError("config: key '" + key + "': cannot parse '" + v + "' as a boolean");
    }

    bool get_bool(const std::string& key, bool fallback) {
        return has(key) ? get_bool(key) : fallback;
    }

    // Lengths are SI (meters); a `_mm` suffixed twin expresses the same key
    // in millimeters. Giving both is ambiguous and rejected.
    bool has_length(const std::string& key) const { return has(key) || has(key + "_mm"); }

    double get_length(const std::string& key) {
        const std::string mm_key = key + "_mm";
        if (has(key) && has(mm_key))
            throw ConfigError("config: both '" + key + "' and '" + mm_key + "' given");
        if (has(mm_key)) return get_double(mm_key) * 1e-3;
        return get_double(key);
    }

    double get_length(const std::string& key, double fallback) {
        return has_length(key) ? get_length(key) : fallback;
    }

    // Temperature tables: either a plain number (constant) or a list of
    // `T:value` breakpoints, e.g. `200:0.2, 1600:0.3`.
    PiecewiseLinear get_table(const std::string& key) {
        const std::string text = get_string(key);
        if (text.find(':') == std::string::npos)
            return PiecewiseLinear::constant(detail::parse_double(key, text));
        std::vector<double> ts, vs;
        std::istringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("config: key '" + key + "': table entry '" + item +
                                  "' is not of the form T:value");
            ts.push_back(detail::parse_double(key, detail::trim(item.substr(0, colon))));
            vs.push_back(detail::parse_double(key, detail::trim(item.substr(colon + 1))));
        }
        try {
            return PiecewiseLinear(ts, vs);
        } catch (const std::exception& err) {
            throw ConfigError("config: key '" + key + "': " + err.what());
        }
    }

    PiecewiseLinear get_table(const std::string& key, double fallback_constant) {
        return has(key) ? get_table(key) : PiecewiseLinear::constant(fallback_constant);
    }

    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    void require_all_consumed() const {
        const auto leftover = unused_keys();
        if (leftover.empty()) return;
        std::string msg = "config: " + name_ + ": unknown key";
        msg += leftover.size() > 1 ? "s:" : ":";
        for (const auto& k : leftover) msg += " '" + k + "'";
        throw ConfigError(msg);
    }

private:
    std::string name_ = "<empty>";
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

}  // namespace thermelt
