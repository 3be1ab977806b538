#pragma once

#include "stprio/diag.hpp"

#include <string>
#include <vector>

namespace stprio {

enum class TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    RealLiteral,
    TimeLiteral,
    Assign,    // :=
    OutArrow,  // =>
    LParen,
    RParen,
    Comma,
    Semicolon,
    Colon,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    EndOfFile,
};

struct Token {
    TokenKind kind = TokenKind::EndOfFile;
    std::string text; // keywords canonicalized to upper case
    SourcePos pos;
    int end_offset = 0;
};

bool is_keyword(const std::string& upper);

// Tokenizes mini-ST source. Strips (* *) block comments (nesting allowed)
// and // line comments. Throws Error(Syntax) on malformed input.
std::vector<Token> lex(const std::string& source, const std::string& file = "<memory>");

// Canonical single-spaced token text, used for checksums and block matching.
std::string normalize_tokens(const std::string& source);

} // namespace stprio
