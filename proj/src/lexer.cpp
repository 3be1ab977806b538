#include "stprio/lexer.hpp"

#include "stprio/value.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

namespace stprio {

namespace {

const std::array<const char*, 45> kKeywords = {
    "PROGRAM", "END_PROGRAM", "FUNCTION_BLOCK", "END_FUNCTION_BLOCK", "FUNCTION",
    "END_FUNCTION", "VAR_INPUT", "VAR_OUTPUT", "VAR_GLOBAL", "VAR", "END_VAR",
    "TYPE", "END_TYPE", "STRUCT", "END_STRUCT", "IF", "THEN", "ELSIF", "ELSE",
    "END_IF", "CASE", "OF", "END_CASE", "WHILE", "DO", "END_WHILE", "FOR", "TO",
    "BY", "END_FOR", "RETURN", "TRUE", "FALSE", "AND", "OR", "XOR", "NOT", "MOD",
    "STEP", "INITIAL", "END_STEP", "ACTION", "END_ACTION", "TRANSITION", "FROM",
};

std::string to_upper(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

struct Cursor {
    const std::string& src;
    const std::string& file;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    bool done() const { return pos >= src.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }
    char advance() {
        char c = src[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
    SourcePos here() const { return SourcePos{static_cast<int>(pos), line, col}; }
};

void skip_ws_and_comments(Cursor& c) {
    for (;;) {
        while (!c.done() && std::isspace(static_cast<unsigned char>(c.peek()))) c.advance();
        if (c.peek() == '(' && c.peek(1) == '*') {
            SourcePos start = c.here();
            c.advance();
            c.advance();
            int depth = 1;
            while (depth > 0) {
                if (c.done()) fail_at(ErrorCode::Syntax, c.file, start, "unterminated comment");
                if (c.peek() == '(' && c.peek(1) == '*') {
                    c.advance();
                    c.advance();
                    ++depth;
                } else if (c.peek() == '*' && c.peek(1) == ')') {
                    c.advance();
                    c.advance();
                    --depth;
                } else {
                    c.advance();
                }
            }
            continue;
        }
        if (c.peek() == '/' && c.peek(1) == '/') {
            while (!c.done() && c.peek() != '\n') c.advance();
            continue;
        }
        break;
    }
}

} // namespace

bool is_keyword(const std::string& upper) {
    return std::find_if(kKeywords.begin(), kKeywords.end(), [&](const char* k) {
               return upper == k;
           }) != kKeywords.end();
}

std::vector<Token> lex(const std::string& source, const std::string& file) {
    std::vector<Token> tokens;
    Cursor c{source, file};
    for (;;) {
        skip_ws_and_comments(c);
        SourcePos pos = c.here();
        if (c.done()) {
            tokens.push_back(Token{TokenKind::EndOfFile, "", pos, pos.offset});
            break;
        }
        char ch = c.peek();
        Token tok;
        tok.pos = pos;
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::string word;
            while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) ||
                                 c.peek() == '_')) {
                word += c.advance();
            }
            std::string upper = to_upper(word);
            // TIME literal: T#...
            if ((upper == "T") && c.peek() == '#') {
                std::string lit = word;
                lit += c.advance(); // '#'
                while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())))) {
                    lit += c.advance();
                }
                std::int64_t ms = 0;
                if (!parse_time_literal(lit, ms)) {
                    fail_at(ErrorCode::Syntax, file, pos, "malformed TIME literal '" + lit + "'");
                }
                tok.kind = TokenKind::TimeLiteral;
                tok.text = lit;
            } else if (is_keyword(upper)) {
                tok.kind = TokenKind::Keyword;
                tok.text = upper;
            } else {
                tok.kind = TokenKind::Identifier;
                tok.text = word;
            }
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::string num;
            bool is_real = false;
            while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) {
                num += c.advance();
            }
            if (c.peek() == '.' && std::isdigit(static_cast<unsigned char>(c.peek(1)))) {
                is_real = true;
                num += c.advance();
                while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) {
                    num += c.advance();
                }
            }
            tok.kind = is_real ? TokenKind::RealLiteral : TokenKind::IntLiteral;
            tok.text = num;
        } else {
            auto two = [&](TokenKind kind, const char* text) {
                c.advance();
                c.advance();
                tok.kind = kind;
                tok.text = text;
            };
            switch (ch) {
            case ':':
                if (c.peek(1) == '=') two(TokenKind::Assign, ":=");
                else { c.advance(); tok.kind = TokenKind::Colon; tok.text = ":"; }
                break;
            case '=':
                if (c.peek(1) == '>') two(TokenKind::OutArrow, "=>");
                else { c.advance(); tok.kind = TokenKind::Eq; tok.text = "="; }
                break;
            case '<':
                if (c.peek(1) == '>') two(TokenKind::Neq, "<>");
                else if (c.peek(1) == '=') two(TokenKind::Le, "<=");
                else { c.advance(); tok.kind = TokenKind::Lt; tok.text = "<"; }
                break;
            case '>':
                if (c.peek(1) == '=') two(TokenKind::Ge, ">=");
                else { c.advance(); tok.kind = TokenKind::Gt; tok.text = ">"; }
                break;
            case '(': c.advance(); tok.kind = TokenKind::LParen; tok.text = "("; break;
            case ')': c.advance(); tok.kind = TokenKind::RParen; tok.text = ")"; break;
            case ',': c.advance(); tok.kind = TokenKind::Comma; tok.text = ","; break;
            case ';': c.advance(); tok.kind = TokenKind::Semicolon; tok.text = ";"; break;
            case '.': c.advance(); tok.kind = TokenKind::Dot; tok.text = "."; break;
            case '+': c.advance(); tok.kind = TokenKind::Plus; tok.text = "+"; break;
            case '-': c.advance(); tok.kind = TokenKind::Minus; tok.text = "-"; break;
            case '*': c.advance(); tok.kind = TokenKind::Star; tok.text = "*"; break;
            case '/': c.advance(); tok.kind = TokenKind::Slash; tok.text = "/"; break;
            default: {
                std::string shown;
                if (std::isprint(static_cast<unsigned char>(ch))) {
                    shown = std::string("'") + ch + "'";
                } else {
                    char buf[16];
                    std::snprintf(buf, sizeof(buf), "0x%02x",
                                  static_cast<unsigned char>(ch));
                    shown = buf;
                }
                fail_at(ErrorCode::Syntax, file, pos, "unexpected character " + shown);
            }
            }
        }
        tok.end_offset = static_cast<int>(c.pos);
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

std::string normalize_tokens(const std::string& source) {
    std::vector<Token> tokens = lex(source);
    std::string out;
    for (const Token& t : tokens) {
        if (t.kind == TokenKind::EndOfFile) break;
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

} // namespace stprio
