// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "easytime/ast.hpp"

namespace easytime::frontend {

enum class TokenKind {
    Int,
    Ident,
    String,
    Ip,
    // keywords
    KwManual,
    KwAuto,
    KwVar,
    KwMp,
    KwAgnt,
    KwDec,
    KwUpd,
    KwTrue,
    KwFalse,
    // punctuation
    Assign,    // :=
    Arrow,     // -> (the arrow glyph U+2192 is accepted as well)
    EqEq,      // ==
    NotEq,     // !=
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semicolon,
    End,
};

std::string_view describe(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::End;
    std::string lexeme;  // String tokens carry the text between the quotes
    int line = 1;
    int col = 1;

    bool operator==(const Token&) const = default;
};

/// Thrown by tokenize, parse and the code-text loader.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int col, std::vector<TokenKind> expected = {});

    const std::string& message() const { return message_; }
    int line() const { return line_; }
    int col() const { return col_; }
    const std::vector<TokenKind>& expected() const { return expected_; }

private:
    std::string message_;
    int line_;
    int col_;
    std::vector<TokenKind> expected_;
};

/// Maximal-munch scan. `//` comments run to end of line. The returned list
/// has no End sentinel; parse() synthesizes one.
std::vector<Token> tokenize(std::string_view source);

/// Recursive descent with one token of lookahead; stops at the first error.
ast::Program parse(std::span<const Token> tokens);

ast::Program parse_source(std::string_view source);

}  // namespace easytime::frontend
