#pragma once

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "zappa/error.hpp"

namespace zappa {

/**
 * @brief Parser for the configuration grammar, a subset of TOML.
 *
 * Supported: `# comments`, `[table]` and `[a.b]` headers, `key = value` with
 * bare or dotted keys, basic and literal strings, integers, floats, booleans
 * and (nested, multi-line) arrays. Duplicate keys are errors. The result is a
 * JSON object tree.
 */
class TomlLite {
public:
    static nlohmann::json parse(std::string_view text) {
        TomlLite p(text);
        return p.document();
    }

private:
    explicit TomlLite(std::string_view text) : s_(text) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + what);
    }

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }
    char get() {
        char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    void skip_blank() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
    }
    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') get();
    }
    /// whitespace, newlines and comments, for use inside arrays
    void skip_all() {
        for (;;) {
            skip_blank();
            if (peek() == '#') {
                skip_comment();
            } else if (peek() == '\n') {
                get();
            } else {
                return;
            }
        }
    }
    void end_of_line() {
        skip_blank();
        skip_comment();
        if (!eof() && get() != '\n') fail("unexpected text after value");
    }

    static bool bare_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

    std::vector<std::string> key_path() {
        std::vector<std::string> parts;
        for (;;) {
            skip_blank();
            std::string part;
            if (peek() == '"') {
                part = basic_string();
            } else {
                while (!eof() && bare_char(peek())) part += get();
            }
            if (part.empty()) fail("expected a key");
            parts.push_back(part);
            skip_blank();
            if (peek() != '.') return parts;
            get();
        }
    }

    std::string basic_string() {
        get();  // opening quote
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = get();
            if (c == '"') return out;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                char e = get();
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
    }

    std::string literal_string() {
        get();
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = get();
            if (c == '\'') return out;
            out += c;
        }
    }

    nlohmann::json number_or_bool() {
        std::string tok;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                          peek() == '.' || peek() == '_'))
            tok += get();
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::string clean;
        for (char c : tok)
            if (c != '_') clean += c;
        if (clean.empty()) fail("expected a value");
        const bool is_float = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "+inf" ||
                              clean == "-inf" || clean == "nan";
        try {
            std::size_t used = 0;
            if (is_float) {
                double d = std::stod(clean, &used);
                if (used != clean.size()) fail("malformed number '" + tok + "'");
                return d;
            }
            long long v = std::stoll(clean, &used, 10);
            if (used != clean.size()) fail("malformed number '" + tok + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("malformed value '" + tok + "'");
        }
    }

    nlohmann::json value() {
        skip_blank();
        char c = peek();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '[') {
            get();
            nlohmann::json arr = nlohmann::json::array();
            for (;;) {
                skip_all();
                if (peek() == ']') {
                    get();
                    return arr;
                }
                arr.push_back(value());
                skip_all();
                if (peek() == ',') {
                    get();
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
        }
        if (c == '{') fail("inline tables are not supported");
        return number_or_bool();
    }

    nlohmann::json& descend(nlohmann::json& root, const std::vector<std::string>& path, std::size_t count) {
        nlohmann::json* node = &root;
        for (std::size_t k = 0; k < count; ++k) {
            auto& child = (*node)[path[k]];
            if (child.is_null()) child = nlohmann::json::object();
            if (!child.is_object()) fail("key '" + path[k] + "' is not a table");
            node = &child;
        }
        return *node;
    }

    nlohmann::json document() {
        nlohmann::json root = nlohmann::json::object();
        std::vector<std::string> table;
        while (!eof()) {
            skip_blank();
            if (peek() == '#') {
                skip_comment();
                continue;
            }
            if (peek() == '\n') {
                get();
                continue;
            }
            if (eof()) break;
            if (peek() == '[') {
                get();
                table = key_path();
                if (peek() != ']') fail("expected ']' after table name");
                get();
                descend(root, table, table.size());
                end_of_line();
                continue;
            }
            auto path = key_path();
            if (peek() != '=') fail("expected '=' after key");
            get();
            nlohmann::json v = value();
            std::vector<std::string> full = table;
            full.insert(full.end(), path.begin(), path.end());
            auto& parent = descend(root, full, full.size() - 1);
            if (parent.contains(full.back())) fail("duplicate key '" + full.back() + "'");
            parent[full.back()] = std::move(v);
            end_of_line();
        }
        return root;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace zappa
