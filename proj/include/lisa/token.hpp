// Lexer for the supported Solidity subset. Comments are skipped; every token
// keeps its exact span in the original text, so later passes slice correctly
// even around discarded comments.
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lisa/source.hpp"
#include "lisa/util.hpp"

namespace lisa {

class LexError : public Error {
  public:
    LexError(const std::string& msg, SourcePos pos)
        : Error(msg + " at " + std::to_string(pos.line) + ":" + std::to_string(pos.column)),
          position(pos) {}
    SourcePos position;
};

enum class TokenKind {
    Identifier,
    Number,      // decimal or hex, optionally with an underscore separator or unit suffix
    AddressLit,  // 0x followed by exactly 40 hex digits
    StringLit,   // quoted, quotes included in text
    Punct,       // operator or punctuation, possibly multi-character
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    Span span;

    bool is(TokenKind k) const { return kind == k; }
    bool is_punct(std::string_view p) const { return kind == TokenKind::Punct && text == p; }
    bool is_ident(std::string_view name) const {
        return kind == TokenKind::Identifier && text == name;
    }
};

namespace detail {

inline bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_hex_digit(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Longest-match table of multi-character operators.
inline const std::array<std::string_view, 21>& multi_punct() {
    static const std::array<std::string_view, 21> ops = {
        "**", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=",
        "*=", "/=", "%=",  "|=", "&=", "^=", "++", "--", "=>", "->"};
    return ops;
}

inline bool is_single_punct(char c) {
    static const std::string chars = "{}()[];,.?:=+-*/%<>!&|^~";
    return chars.find(c) != std::string::npos;
}

}  // namespace detail

// Tokenizes the whole file. Throws LexError on characters outside the
// recognized set; everything lexable is tokenized even when the parser will
// later treat it as opaque.
inline std::vector<Token> lex(const SourceFile& file) {
    std::vector<Token> out;
    const std::string& text = file.text;
    uint32_t line = 1, col = 1;
    size_t i = 0;
    const size_t n = text.size();

    auto pos_here = [&]() { return SourcePos{line, col, static_cast<uint32_t>(i)}; };
    auto advance = [&](size_t count) {
        for (size_t k = 0; k < count && i < n; ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    while (i < n) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        // Comments are discarded entirely.
        if (c == '/' && i + 1 < n && text[i + 1] == '/') {
            while (i < n && text[i] != '\n')
                advance(1);
            continue;
        }
        if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            SourcePos start = pos_here();
            advance(2);
            bool closed = false;
            while (i < n) {
                if (text[i] == '*' && i + 1 < n && text[i + 1] == '/') {
                    advance(2);
                    closed = true;
                    break;
                }
                advance(1);
            }
            if (!closed)
                throw LexError("unterminated block comment", start);
            continue;
        }

        Token tok;
        tok.span.begin = pos_here();

        if (detail::is_ident_start(c)) {
            size_t start = i;
            while (i < n && detail::is_ident_char(text[i]))
                advance(1);
            tok.kind = TokenKind::Identifier;
            tok.text = text.substr(start, i - start);
        } else if (detail::is_digit(c)) {
            size_t start = i;
            if (c == '0' && i + 1 < n && (text[i + 1] == 'x' || text[i + 1] == 'X')) {
                advance(2);
                size_t hex_start = i;
                while (i < n && detail::is_hex_digit(text[i]))
                    advance(1);
                tok.kind = (i - hex_start == 40) ? TokenKind::AddressLit : TokenKind::Number;
            } else {
                while (i < n && (detail::is_digit(text[i]) || text[i] == '_'))
                    advance(1);
                if (i < n && text[i] == '.' && i + 1 < n && detail::is_digit(text[i + 1])) {
                    advance(1);
                    while (i < n && detail::is_digit(text[i]))
                        advance(1);
                }
                if (i < n && (text[i] == 'e' || text[i] == 'E') && i + 1 < n &&
                    detail::is_digit(text[i + 1])) {
                    advance(1);
                    while (i < n && detail::is_digit(text[i]))
                        advance(1);
                }
                tok.kind = TokenKind::Number;
            }
            tok.text = text.substr(start, i - start);
        } else if (c == '"' || c == '\'') {
            char quote = c;
            size_t start = i;
            SourcePos open = pos_here();
            advance(1);
            while (i < n && text[i] != quote) {
                if (text[i] == '\\' && i + 1 < n)
                    advance(1);
                if (text[i] == '\n')
                    throw LexError("unterminated string literal", open);
                advance(1);
            }
            if (i >= n)
                throw LexError("unterminated string literal", open);
            advance(1);
            tok.kind = TokenKind::StringLit;
            tok.text = text.substr(start, i - start);
        } else {
            bool matched = false;
            for (std::string_view op : detail::multi_punct()) {
                if (text.compare(i, op.size(), op) == 0) {
                    tok.kind = TokenKind::Punct;
                    tok.text = std::string(op);
                    advance(op.size());
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (!detail::is_single_punct(c))
                    throw LexError(std::string("illegal character '") + c + "'", pos_here());
                tok.kind = TokenKind::Punct;
                tok.text = std::string(1, c);
                advance(1);
            }
        }

        tok.span.end = pos_here();
        out.push_back(std::move(tok));
    }

    Token end;
    end.kind = TokenKind::End;
    end.span.begin = end.span.end = pos_here();
    out.push_back(std::move(end));
    return out;
}

inline std::vector<Token> lex_text(std::string_view text) {
    return lex(SourceFile::from_text("<fragment>", std::string(text)));
}

// Solidity keywords and declaration words recognized by the parser.
inline bool is_keyword(std::string_view s) {
    static const std::unordered_set<std::string_view> kw = {
        "pragma",   "solidity",  "contract", "interface", "library",  "function", "modifier",
        "event",    "struct",    "enum",     "mapping",   "public",   "private",  "internal",
        "external", "payable",   "view",     "pure",      "constant", "immutable","virtual",
        "override", "returns",   "return",   "if",        "else",     "for",      "while",
        "do",       "break",     "continue", "require",   "assert",   "revert",   "emit",
        "new",      "delete",    "memory",   "storage",   "calldata", "is",       "using",
        "constructor", "receive", "fallback", "true",     "false",    "indexed",  "anonymous",
        "unchecked", "assembly", "try",      "catch",     "type",     "abstract",
    };
    return kw.contains(s);
}

// Elementary type names (uintN/intN/bytesN handled by prefix).
inline bool is_elementary_type(std::string_view s) {
    if (s == "address" || s == "bool" || s == "string" || s == "bytes" || s == "byte")
        return true;
    auto all_digits = [](std::string_view v) {
        if (v.empty())
            return true;
        for (char c : v)
            if (!detail::is_digit(c))
                return false;
        return true;
    };
    if (starts_with(s, "uint"))
        return all_digits(s.substr(4));
    if (starts_with(s, "int"))
        return all_digits(s.substr(3));
    if (starts_with(s, "bytes"))
        return all_digits(s.substr(5));
    return false;
}

// Ether / time denominations folded into number literals by the parser.
inline bool is_denomination(std::string_view s) {
    static const std::unordered_set<std::string_view> d = {
        "wei", "gwei", "ether", "seconds", "minutes", "hours", "days", "weeks"};
    return d.contains(s);
}

}  // namespace lisa
