// Copyright 2026 The QCBM Search Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Minimal strict JSON reader that keeps the byte offset of every value.
 *
 * Used for the circuit DSL, where diagnostics must point at the offending
 * token inside untrusted model output. Parsing starts at an arbitrary offset
 * and stops after one value, so a document can be lifted out of surrounding
 * prose.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qcbm::json {

struct SourcePos {
    std::size_t offset = 0;
    std::size_t line = 1;   ///< 1-based
    std::size_t column = 1; ///< 1-based, in bytes
};

[[nodiscard]] inline SourcePos positionAt(std::string_view text, std::size_t offset) {
    SourcePos p{offset, 1, 1};
    const std::size_t end = offset < text.size() ? offset : text.size();
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

enum class Type { Null, Bool, Number, String, Array, Object };

[[nodiscard]] inline std::string_view typeName(Type t) {
    switch (t) {
    case Type::Null: return "null";
    case Type::Bool: return "boolean";
    case Type::Number: return "number";
    case Type::String: return "string";
    case Type::Array: return "array";
    case Type::Object: return "object";
    }
    return "?";
}

struct Value {
    Type type = Type::Null;
    std::size_t offset = 0; ///< byte offset of the value's first character
    bool boolean = false;
    double number = 0.0;
    std::string text; ///< string contents, or the literal spelling of a number
    std::vector<Value> items;
    std::vector<std::pair<std::string, std::size_t>> keys; ///< (key, key offset), parallel to items for objects

    /// Member lookup for objects; nullptr when absent.
    [[nodiscard]] const Value *find(std::string_view key) const {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i].first == key) {
                return &items[i];
            }
        }
        return nullptr;
    }
};

struct SyntaxError {
    std::size_t offset = 0;
    std::string message;
};

struct ParseOutcome {
    std::optional<Value> value;
    std::optional<SyntaxError> error;
    std::size_t end = 0; ///< one past the parsed value on success
};

namespace detail {

class Reader {
  public:
    explicit Reader(std::string_view text, std::size_t maxDepth) : text_(text), maxDepth_(maxDepth) {}

    ParseOutcome parseAt(std::size_t start) {
        pos_ = start;
        ParseOutcome out;
        skipSpace();
        Value v;
        if (!parseValue(v, 0)) {
            out.error = error_;
            return out;
        }
        out.value = std::move(v);
        out.end = pos_;
        return out;
    }

  private:
    bool fail(std::size_t at, std::string message) {
        if (!failed_) {
            failed_ = true;
            error_ = SyntaxError{at, std::move(message)};
        }
        return false;
    }

    void skipSpace() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool expectLiteral(std::string_view lit) {
        if (text_.substr(pos_, lit.size()) != lit) {
            return fail(pos_, "invalid literal");
        }
        pos_ += lit.size();
        return true;
    }

    bool parseValue(Value &v, std::size_t depth) {
        if (depth > maxDepth_) {
            return fail(pos_, "nesting deeper than " + std::to_string(maxDepth_));
        }
        if (pos_ >= text_.size()) {
            return fail(pos_, "unexpected end of input, expected a value");
        }
        v.offset = pos_;
        const char c = text_[pos_];
        switch (c) {
        case '{': return parseObject(v, depth);
        case '[': return parseArray(v, depth);
        case '"': v.type = Type::String; return parseString(v.text);
        case 't': v.type = Type::Bool; v.boolean = true; return expectLiteral("true");
        case 'f': v.type = Type::Bool; v.boolean = false; return expectLiteral("false");
        case 'n': v.type = Type::Null; return expectLiteral("null");
        default:
            if (c == '-' || (c >= '0' && c <= '9')) {
                return parseNumber(v);
            }
            return fail(pos_, std::string("unexpected character '") + printable(c) + "'");
        }
    }

    static std::string printable(char c) {
        if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
            return buf;
        }
        return std::string(1, c);
    }

    bool digits() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
            ++pos_;
        }
        return pos_ > start;
    }

    bool parseNumber(Value &v) {
        const std::size_t start = pos_;
        if (text_[pos_] == '-') {
            ++pos_;
        }
        if (pos_ < text_.size() && text_[pos_] == '0') {
            ++pos_;
        } else if (!digits()) {
            return fail(pos_, "malformed number");
        }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            if (!digits()) {
                return fail(pos_, "malformed number: digits expected after '.'");
            }
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                ++pos_;
            }
            if (!digits()) {
                return fail(pos_, "malformed number: exponent digits expected");
            }
        }
        v.type = Type::Number;
        v.text = std::string(text_.substr(start, pos_ - start));
        v.number = std::strtod(v.text.c_str(), nullptr);
        if (!std::isfinite(v.number)) {
            return fail(start, "number out of range");
        }
        return true;
    }

    static void appendUtf8(std::string &out, std::uint32_t cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6U));
            out += static_cast<char>(0x80 | (cp & 0x3FU));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12U));
            out += static_cast<char>(0x80 | ((cp >> 6U) & 0x3FU));
            out += static_cast<char>(0x80 | (cp & 0x3FU));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18U));
            out += static_cast<char>(0x80 | ((cp >> 12U) & 0x3FU));
            out += static_cast<char>(0x80 | ((cp >> 6U) & 0x3FU));
            out += static_cast<char>(0x80 | (cp & 0x3FU));
        }
    }

    bool hex4(std::uint32_t &cp) {
        if (pos_ + 4 > text_.size()) {
            return fail(pos_, "truncated \\u escape");
        }
        cp = 0;
        for (int i = 0; i < 4; ++i) {
            const char h = text_[pos_++];
            cp <<= 4U;
            if (h >= '0' && h <= '9') {
                cp |= static_cast<std::uint32_t>(h - '0');
            } else if (h >= 'a' && h <= 'f') {
                cp |= static_cast<std::uint32_t>(h - 'a' + 10);
            } else if (h >= 'A' && h <= 'F') {
                cp |= static_cast<std::uint32_t>(h - 'A' + 10);
            } else {
                return fail(pos_ - 1, "invalid hex digit in \\u escape");
            }
        }
        return true;
    }

    /// Length of the well-formed UTF-8 sequence at `at`, or 0.
    std::size_t utf8Length(std::size_t at) const {
        auto byte = [&](std::size_t i) { return at + i < text_.size() ? static_cast<unsigned char>(text_[at + i]) : 0U; };
        const unsigned b0 = byte(0);
        std::size_t len = 0;
        unsigned lo = 0x80, hi = 0xBF; // allowed range of the second byte
        if (b0 >= 0xC2 && b0 <= 0xDF) {
            len = 2;
        } else if (b0 >= 0xE0 && b0 <= 0xEF) {
            len = 3;
            lo = b0 == 0xE0 ? 0xA0 : 0x80;
            hi = b0 == 0xED ? 0x9F : 0xBF;
        } else if (b0 >= 0xF0 && b0 <= 0xF4) {
            len = 4;
            lo = b0 == 0xF0 ? 0x90 : 0x80;
            hi = b0 == 0xF4 ? 0x8F : 0xBF;
        } else {
            return 0;
        }
        if (byte(1) < lo || byte(1) > hi) {
            return 0;
        }
        for (std::size_t i = 2; i < len; ++i) {
            if (byte(i) < 0x80 || byte(i) > 0xBF) {
                return 0;
            }
        }
        return len;
    }

    bool parseString(std::string &out) {
        ++pos_; // opening quote
        while (true) {
            if (pos_ >= text_.size()) {
                return fail(pos_, "unterminated string");
            }
            const char c = text_[pos_];
            if (c == '"') {
                ++pos_;
                return true;
            }
            if (static_cast<unsigned char>(c) < 0x20) {
                return fail(pos_, "control character in string");
            }
            if (static_cast<unsigned char>(c) >= 0x80) {
                const std::size_t len = utf8Length(pos_);
                if (len == 0) {
                    return fail(pos_, "invalid UTF-8 in string");
                }
                out.append(text_.substr(pos_, len));
                pos_ += len;
                continue;
            }
            if (c != '\\') {
                out += c;
                ++pos_;
                continue;
            }
            ++pos_;
            if (pos_ >= text_.size()) {
                return fail(pos_, "unterminated escape");
            }
            const char e = text_[pos_++];
            switch (e) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case '/': out += '/'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            case 't': out += '\t'; break;
            case 'u': {
                std::uint32_t cp = 0;
                if (!hex4(cp)) {
                    return false;
                }
                if (cp >= 0xD800 && cp <= 0xDBFF) {
                    if (text_.substr(pos_, 2) != "\\u") {
                        return fail(pos_, "unpaired surrogate in \\u escape");
                    }
                    pos_ += 2;
                    std::uint32_t lo = 0;
                    if (!hex4(lo)) {
                        return false;
                    }
                    if (lo < 0xDC00 || lo > 0xDFFF) {
                        return fail(pos_ - 4, "invalid low surrogate");
                    }
                    cp = 0x10000 + ((cp - 0xD800) << 10U) + (lo - 0xDC00);
                } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
                    return fail(pos_ - 4, "unpaired low surrogate");
                }
                appendUtf8(out, cp);
                break;
            }
            default: return fail(pos_ - 1, "invalid escape sequence");
            }
        }
    }

    bool parseArray(Value &v, std::size_t depth) {
        v.type = Type::Array;
        ++pos_;
        skipSpace();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return true;
        }
        while (true) {
            Value item;
            if (!parseValue(item, depth + 1)) {
                return false;
            }
            v.items.push_back(std::move(item));
            skipSpace();
            if (pos_ >= text_.size()) {
                return fail(pos_, "unexpected end of input inside array");
            }
            if (text_[pos_] == ',') {
                ++pos_;
                skipSpace();
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return true;
            }
            return fail(pos_, "expected ',' or ']' in array");
        }
    }

    bool parseObject(Value &v, std::size_t depth) {
        v.type = Type::Object;
        ++pos_;
        skipSpace();
        if (pos_ < text_.size() && text_[pos_] == '}') {
            ++pos_;
            return true;
        }
        while (true) {
            if (pos_ >= text_.size()) {
                return fail(pos_, "unexpected end of input inside object");
            }
            if (text_[pos_] != '"') {
                return fail(pos_, "expected a string key");
            }
            const std::size_t keyOffset = pos_;
            std::string key;
            if (!parseString(key)) {
                return false;
            }
            for (const auto &k : v.keys) {
                if (k.first == key) {
                    return fail(keyOffset, "duplicate key \"" + key + "\"");
                }
            }
            skipSpace();
            if (pos_ >= text_.size() || text_[pos_] != ':') {
                return fail(pos_, "expected ':' after object key");
            }
            ++pos_;
            skipSpace();
            Value item;
            if (!parseValue(item, depth + 1)) {
                return false;
            }
            v.keys.emplace_back(std::move(key), keyOffset);
            v.items.push_back(std::move(item));
            skipSpace();
            if (pos_ >= text_.size()) {
                return fail(pos_, "unexpected end of input inside object");
            }
            if (text_[pos_] == ',') {
                ++pos_;
                skipSpace();
                continue;
            }
            if (text_[pos_] == '}') {
                ++pos_;
                return true;
            }
            return fail(pos_, "expected ',' or '}' in object");
        }
    }

    std::string_view text_;
    std::size_t maxDepth_;
    std::size_t pos_ = 0;
    bool failed_ = false;
    SyntaxError error_;
};

} // namespace detail

/// Parses one JSON value starting at `start` (leading whitespace skipped).
[[nodiscard]] inline ParseOutcome parseValueAt(std::string_view text, std::size_t start,
                                               std::size_t maxDepth = 64) {
    return detail::Reader(text, maxDepth).parseAt(start);
}

} // namespace qcbm::json
