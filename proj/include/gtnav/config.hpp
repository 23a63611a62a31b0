#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gtnav/errors.hpp"
#include "gtnav/geometry.hpp"

namespace gtnav {

/// One parsed configuration value, tagged with the line it came from.
struct ConfigValue {
    enum class Kind { String, Number, Boolean, NumberList, StringList };
    Kind kind = Kind::String;
    std::string text;
    double number = 0.0;
    bool boolean = false;
    std::vector<double> numbers;
    std::vector<std::string> strings;
    int line = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

/// Strip a trailing comment that is not inside a quoted string.
inline std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

inline bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            return false;
    return true;
}

inline std::string parse_quoted(const std::string& raw, int line_no) {
    std::string out;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c == '\\') {
            if (i + 1 >= raw.size()) throw ParseError("config: dangling escape", line_no);
            const char next = raw[++i];
            if (next == 'n')
                out += '\n';
            else if (next == 't')
                out += '\t';
            else if (next == '"' || next == '\\')
                out += next;
            else
                throw ParseError("config: unknown escape '\\" + std::string(1, next) + "'",
                                 line_no);
            continue;
        }
        if (c == '"') {
            if (trim(raw.substr(i + 1)).empty()) return out;
            throw ParseError("config: text after closing quote", line_no);
        }
        out += c;
    }
    throw ParseError("config: unterminated string", line_no);
}

inline double parse_number(const std::string& raw, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ParseError("config: not a number: '" + raw + "'", line_no);
    }
}

inline ConfigValue parse_value(const std::string& raw, int line_no) {
    ConfigValue v;
    v.line = line_no;
    if (raw.empty()) throw ParseError("config: missing value", line_no);
    if (raw.front() == '"') {
        v.kind = ConfigValue::Kind::String;
        v.text = parse_quoted(raw, line_no);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = ConfigValue::Kind::Boolean;
        v.boolean = raw == "true";
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') throw ParseError("config: unterminated array", line_no);
        const std::string body = trim(raw.substr(1, raw.size() - 2));
        if (body.empty()) throw ParseError("config: empty array", line_no);
        std::vector<std::string> items;
        std::string current;
        bool quoted = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            const char c = body[i];
            if (c == '"' && (i == 0 || body[i - 1] != '\\')) quoted = !quoted;
            if (c == ',' && !quoted) {
                items.push_back(trim(current));
                current.clear();
                continue;
            }
            current += c;
        }
        items.push_back(trim(current));
        const bool string_list = items.front().size() > 0 && items.front().front() == '"';
        v.kind = string_list ? ConfigValue::Kind::StringList : ConfigValue::Kind::NumberList;
        for (const auto& item : items) {
            if (item.empty()) throw ParseError("config: empty array element", line_no);
            if (string_list) {
                if (item.front() != '"')
                    throw ParseError("config: mixed array element types", line_no);
                v.strings.push_back(parse_quoted(item, line_no));
            } else {
                v.numbers.push_back(parse_number(item, line_no));
            }
        }
        return v;
    }
    v.kind = ConfigValue::Kind::Number;
    v.number = parse_number(raw, line_no);
    return v;
}

} // namespace detail

/**
 * @brief A parsed configuration document: dotted keys mapped to typed values.
 *
 * The source is line-oriented text: `key = value` pairs, `[table]` headers
 * that prefix the keys below them, and '#' comments. Values are quoted
 * strings, numbers, true/false, or bracketed arrays of numbers or strings.
 */
struct ConfigDoc {
    std::map<std::string, ConfigValue> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    const ConfigValue& at(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) throw ConfigError("config: missing key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key) const {
        const ConfigValue& v = at(key);
        if (v.kind != ConfigValue::Kind::String)
            throw ConfigError("config: key '" + key + "' must be a string");
        return v.text;
    }

    double get_double(const std::string& key) const {
        const ConfigValue& v = at(key);
        if (v.kind != ConfigValue::Kind::Number)
            throw ConfigError("config: key '" + key + "' must be a number");
        return v.number;
    }

    int get_int(const std::string& key) const {
        const double v = get_double(key);
        const double rounded = std::round(v);
        if (std::abs(v - rounded) > 1e-9)
            throw ConfigError("config: key '" + key + "' must be an integer");
        return static_cast<int>(rounded);
    }

    bool get_bool(const std::string& key) const {
        const ConfigValue& v = at(key);
        if (v.kind != ConfigValue::Kind::Boolean)
            throw ConfigError("config: key '" + key + "' must be true or false");
        return v.boolean;
    }

    Vec2 get_vec2(const std::string& key) const {
        const ConfigValue& v = at(key);
        if (v.kind != ConfigValue::Kind::NumberList || v.numbers.size() != 2)
            throw ConfigError("config: key '" + key + "' must be an array of two numbers");
        return {v.numbers[0], v.numbers[1]};
    }

    std::vector<double> get_numbers(const std::string& key) const {
        const ConfigValue& v = at(key);
        if (v.kind != ConfigValue::Kind::NumberList)
            throw ConfigError("config: key '" + key + "' must be an array of numbers");
        return v.numbers;
    }

    std::vector<std::string> get_strings(const std::string& key) const {
        const ConfigValue& v = at(key);
        if (v.kind == ConfigValue::Kind::String) return {v.text};
        if (v.kind != ConfigValue::Kind::StringList)
            throw ConfigError("config: key '" + key + "' must be an array of strings");
        return v.strings;
    }

    std::string get_string_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }
    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }
    int get_int_or(const std::string& key, int fallback) const {
        return has(key) ? get_int(key) : fallback;
    }
    bool get_bool_or(const std::string& key, bool fallback) const {
        return has(key) ? get_bool(key) : fallback;
    }

    /// All keys beginning with the given dotted prefix, in sorted order.
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& [key, value] : values)
            if (key.compare(0, prefix.size(), prefix) == 0) out.push_back(key);
        return out;
    }
};

inline ConfigDoc parse_config(std::istream& in) {
    ConfigDoc doc;
    std::string line;
    std::string prefix;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string cleaned = detail::trim(detail::strip_comment(line));
        if (cleaned.empty()) continue;
        if (cleaned.front() == '[') {
            if (cleaned.back() != ']')
                throw ParseError("config: unterminated table header", line_no);
            const std::string name = detail::trim(cleaned.substr(1, cleaned.size() - 2));
            if (!detail::valid_key(name))
                throw ParseError("config: bad table name '" + name + "'", line_no);
            prefix = name + ".";
            continue;
        }
        const std::size_t eq = cleaned.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: expected 'key = value'", line_no);
        const std::string key = detail::trim(cleaned.substr(0, eq));
        if (!detail::valid_key(key))
            throw ParseError("config: bad key '" + key + "'", line_no);
        const std::string full = prefix + key;
        if (doc.values.count(full))
            throw ParseError("config: duplicate key '" + full + "'", line_no);
        doc.values.emplace(full,
                           detail::parse_value(detail::trim(cleaned.substr(eq + 1)), line_no));
    }
    return doc;
}

inline ConfigDoc parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ConfigDoc parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in);
}

} // namespace gtnav
