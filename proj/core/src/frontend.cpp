// SPDX-License-Identifier: Apache-2.0

#include "easytime/frontend.hpp"

#include <charconv>
#include <optional>

namespace easytime::frontend {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::optional<TokenKind> keyword(std::string_view word) {
    if (word == "manual") return TokenKind::KwManual;
    if (word == "auto") return TokenKind::KwAuto;
    if (word == "var") return TokenKind::KwVar;
    if (word == "mp") return TokenKind::KwMp;
    if (word == "agnt") return TokenKind::KwAgnt;
    if (word == "dec") return TokenKind::KwDec;
    if (word == "upd") return TokenKind::KwUpd;
    if (word == "true") return TokenKind::KwTrue;
    if (word == "false") return TokenKind::KwFalse;
    return std::nullopt;
}

constexpr std::string_view kArrowGlyph = "\xE2\x86\x92";

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            if (at_end()) {
                return out;
            }
            out.push_back(next());
        }
    }

private:
    bool at_end() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
            ++col_;
        }
    }

    void skip_trivia() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (!at_end() && peek() != '\n') {
                    advance();
                }
            } else {
                return;
            }
        }
    }

    Token make(TokenKind kind, std::size_t start, int line, int col) const {
        return Token{kind, std::string(src_.substr(start, pos_ - start)), line, col};
    }

    Token next() {
        const std::size_t start = pos_;
        const int line = line_;
        const int col = col_;
        const char c = peek();

        if (is_digit(c)) {
            bool dotted = false;
            while (is_digit(peek()) || (peek() == '.' && is_digit(peek(1)))) {
                dotted = dotted || peek() == '.';
                advance();
            }
            Token tok = make(dotted ? TokenKind::Ip : TokenKind::Int, start, line, col);
            if (dotted && !ast::is_ipv4(tok.lexeme)) {
                throw ParseError("malformed address '" + tok.lexeme + "'", line, col);
            }
            return tok;
        }
        if (is_alpha(c)) {
            while (is_alpha(peek()) || is_digit(peek()) || peek() == '_') {
                advance();
            }
            Token tok = make(TokenKind::Ident, start, line, col);
            if (auto kw = keyword(tok.lexeme)) {
                tok.kind = *kw;
            }
            return tok;
        }
        if (c == '"') {
            advance();
            const std::size_t body = pos_;
            while (!at_end() && peek() != '"' && peek() != '\n') {
                advance();
            }
            if (peek() != '"') {
                throw ParseError("unterminated string", line, col);
            }
            std::string text(src_.substr(body, pos_ - body));
            advance();
            return Token{TokenKind::String, std::move(text), line, col};
        }
        if (src_.substr(pos_, kArrowGlyph.size()) == kArrowGlyph) {
            for (std::size_t i = 0; i < kArrowGlyph.size(); ++i) {
                advance();
            }
            return Token{TokenKind::Arrow, "->", line, col};
        }

        auto two = [&](char second, TokenKind kind) -> std::optional<Token> {
            if (peek(1) != second) {
                return std::nullopt;
            }
            advance();
            advance();
            return make(kind, start, line, col);
        };
        std::optional<Token> pair;
        switch (c) {
            case ':': pair = two('=', TokenKind::Assign); break;
            case '-': pair = two('>', TokenKind::Arrow); break;
            case '=': pair = two('=', TokenKind::EqEq); break;
            case '!': pair = two('=', TokenKind::NotEq); break;
            default: break;
        }
        if (pair) {
            return *pair;
        }

        std::optional<TokenKind> single;
        switch (c) {
            case '(': single = TokenKind::LParen; break;
            case ')': single = TokenKind::RParen; break;
            case '[': single = TokenKind::LBracket; break;
            case ']': single = TokenKind::RBracket; break;
            case '{': single = TokenKind::LBrace; break;
            case '}': single = TokenKind::RBrace; break;
            case ';': single = TokenKind::Semicolon; break;
            default: break;
        }
        if (single) {
            advance();
            return make(*single, start, line, col);
        }

        std::string shown = (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7F)
                                ? "byte 0x" + to_hex(static_cast<unsigned char>(c))
                                : std::string("'") + c + "'";
        throw ParseError("unexpected character " + shown, line, col);
    }

    static std::string to_hex(unsigned char byte) {
        constexpr char digits[] = "0123456789ABCDEF";
        return {digits[byte >> 4], digits[byte & 0xF]};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::span<const Token> tokens) : tokens_(tokens) {
        if (tokens.empty()) {
            end_ = Token{TokenKind::End, "", 1, 1};
        } else {
            const Token& last = tokens.back();
            int width = static_cast<int>(last.lexeme.size()) + (last.kind == TokenKind::String ? 2 : 0);
            end_ = Token{TokenKind::End, "", last.line, last.col + width};
        }
    }

    ast::Program program() {
        ast::Program p;
        do {
            p.agents.push_back(agent());
        } while (at(TokenKind::Int));
        if (!at(TokenKind::KwVar)) {
            fail({TokenKind::Int, TokenKind::KwVar});
        }
        do {
            p.decls.push_back(var_decl());
        } while (at(TokenKind::KwVar));
        if (!at(TokenKind::KwMp)) {
            orphaned_body();
            fail({TokenKind::KwVar, TokenKind::KwMp});
        }
        do {
            p.places.push_back(place());
        } while (at(TokenKind::KwMp));
        if (!at(TokenKind::End)) {
            orphaned_body();
            fail({TokenKind::KwMp, TokenKind::End});
        }
        return p;
    }

private:
    const Token& peek() const { return index_ < tokens_.size() ? tokens_[index_] : end_; }
    bool at(TokenKind kind) const { return peek().kind == kind; }

    ast::SourcePos pos() const { return {peek().line, peek().col}; }

    [[noreturn]] void fail(std::vector<TokenKind> expected) const {
        const Token& tok = peek();
        std::string message = "expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i > 0) {
                message += i + 1 == expected.size() ? " or " : ", ";
            }
            message += describe(expected[i]);
        }
        message += ", found ";
        message += tok.kind == TokenKind::End ? std::string("end of input") : "'" + tok.lexeme + "'";
        throw ParseError(std::move(message), tok.line, tok.col, std::move(expected));
    }

    // `agnt[n] {` where a place should start means the `mp[k] ->` head was
    // lost. Point at the body it no longer introduces.
    void orphaned_body() {
        const std::size_t k = index_;
        if (k + 4 < tokens_.size() && tokens_[k].kind == TokenKind::KwAgnt &&
            tokens_[k + 1].kind == TokenKind::LBracket && tokens_[k + 2].kind == TokenKind::Int &&
            tokens_[k + 3].kind == TokenKind::RBracket && tokens_[k + 4].kind == TokenKind::LBrace) {
            const Token& brace = tokens_[k + 4];
            throw ParseError("statement block after agnt[" + tokens_[k + 2].lexeme + "] has no 'mp[n] ->' head",
                             brace.line, brace.col, {TokenKind::KwMp});
        }
    }

    const Token& expect(TokenKind kind) {
        if (!at(kind)) {
            fail({kind});
        }
        return tokens_[index_++];
    }

    std::int64_t integer(const Token& tok) const {
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(tok.lexeme.data(), tok.lexeme.data() + tok.lexeme.size(), value);
        if (ec != std::errc{} || ptr != tok.lexeme.data() + tok.lexeme.size()) {
            throw ParseError("integer literal '" + tok.lexeme + "' out of range", tok.line, tok.col);
        }
        return value;
    }

    std::int64_t positive(const Token& tok) const {
        std::int64_t value = integer(tok);
        if (value <= 0) {
            throw ParseError("expected a positive number, found '" + tok.lexeme + "'", tok.line, tok.col);
        }
        return value;
    }

    ast::AgentDecl agent() {
        ast::AgentDecl a;
        a.pos = pos();
        a.number = positive(expect(TokenKind::Int));
        if (at(TokenKind::KwManual)) {
            ++index_;
            a.kind = ast::AgentKind::Manual;
            a.source = expect(TokenKind::String).lexeme;
        } else if (at(TokenKind::KwAuto)) {
            ++index_;
            a.kind = ast::AgentKind::Auto;
            a.source = expect(TokenKind::Ip).lexeme;
        } else {
            fail({TokenKind::KwManual, TokenKind::KwAuto});
        }
        expect(TokenKind::Semicolon);
        return a;
    }

    ast::VarDecl var_decl() {
        ast::VarDecl d;
        d.pos = pos();
        expect(TokenKind::KwVar);
        d.name = expect(TokenKind::Ident).lexeme;
        expect(TokenKind::Assign);
        d.init = aexp();
        expect(TokenKind::Semicolon);
        return d;
    }

    ast::MeasPlace place() {
        ast::MeasPlace m;
        m.pos = pos();
        expect(TokenKind::KwMp);
        expect(TokenKind::LBracket);
        m.mp = positive(expect(TokenKind::Int));
        expect(TokenKind::RBracket);
        expect(TokenKind::Arrow);
        expect(TokenKind::KwAgnt);
        expect(TokenKind::LBracket);
        m.agent = positive(expect(TokenKind::Int));
        expect(TokenKind::RBracket);
        m.body = block();
        return m;
    }

    std::vector<ast::Stmt> block() {
        expect(TokenKind::LBrace);
        std::vector<ast::Stmt> body;
        do {
            body.push_back(stmt());
        } while (!at(TokenKind::RBrace) && !at(TokenKind::End));
        expect(TokenKind::RBrace);
        return body;
    }

    ast::Stmt stmt() {
        ast::Stmt s;
        s.pos = pos();
        switch (peek().kind) {
            case TokenKind::KwDec:
                ++index_;
                s.node = ast::Dec{expect(TokenKind::Ident).lexeme};
                expect(TokenKind::Semicolon);
                return s;
            case TokenKind::KwUpd:
                ++index_;
                s.node = ast::Upd{expect(TokenKind::Ident).lexeme};
                expect(TokenKind::Semicolon);
                return s;
            case TokenKind::Ident: {
                std::string target = tokens_[index_++].lexeme;
                expect(TokenKind::Assign);
                ast::Aexp value = aexp();
                expect(TokenKind::Semicolon);
                s.node = ast::Assign{std::move(target), std::move(value)};
                return s;
            }
            case TokenKind::LParen: {
                ++index_;
                ast::Bexp test = bexp();
                expect(TokenKind::RParen);
                expect(TokenKind::Arrow);
                std::vector<ast::Stmt> body;
                if (at(TokenKind::LBrace)) {
                    body = block();
                } else {
                    body.push_back(stmt());
                }
                s.node = ast::Cond{std::move(test), std::move(body)};
                return s;
            }
            default:
                fail({TokenKind::KwDec, TokenKind::KwUpd, TokenKind::Ident, TokenKind::LParen});
        }
    }

    ast::Bexp bexp() {
        ast::Bexp b;
        b.pos = pos();
        if (at(TokenKind::KwTrue)) {
            ++index_;
            b.node = ast::True{};
            return b;
        }
        if (at(TokenKind::KwFalse)) {
            ++index_;
            b.node = ast::False{};
            return b;
        }
        if (!at(TokenKind::Int) && !at(TokenKind::Ident)) {
            fail({TokenKind::KwTrue, TokenKind::KwFalse, TokenKind::Int, TokenKind::Ident});
        }
        ast::Aexp lhs = aexp();
        if (at(TokenKind::EqEq)) {
            ++index_;
            b.node = ast::Eq{std::move(lhs), aexp()};
        } else if (at(TokenKind::NotEq)) {
            ++index_;
            b.node = ast::Neq{std::move(lhs), aexp()};
        } else {
            fail({TokenKind::EqEq, TokenKind::NotEq});
        }
        return b;
    }

    ast::Aexp aexp() {
        ast::Aexp a;
        a.pos = pos();
        if (at(TokenKind::Int)) {
            a.node = ast::Num{integer(tokens_[index_++])};
        } else if (at(TokenKind::Ident)) {
            a.node = ast::Var{tokens_[index_++].lexeme};
        } else {
            fail({TokenKind::Int, TokenKind::Ident});
        }
        return a;
    }

    std::span<const Token> tokens_;
    std::size_t index_ = 0;
    Token end_;
};

}  // namespace

std::string_view describe(TokenKind kind) {
    switch (kind) {
        case TokenKind::Int: return "integer";
        case TokenKind::Ident: return "identifier";
        case TokenKind::String: return "file string";
        case TokenKind::Ip: return "ip address";
        case TokenKind::KwManual: return "'manual'";
        case TokenKind::KwAuto: return "'auto'";
        case TokenKind::KwVar: return "'var'";
        case TokenKind::KwMp: return "'mp'";
        case TokenKind::KwAgnt: return "'agnt'";
        case TokenKind::KwDec: return "'dec'";
        case TokenKind::KwUpd: return "'upd'";
        case TokenKind::KwTrue: return "'true'";
        case TokenKind::KwFalse: return "'false'";
        case TokenKind::Assign: return "':='";
        case TokenKind::Arrow: return "'->'";
        case TokenKind::EqEq: return "'=='";
        case TokenKind::NotEq: return "'!='";
        case TokenKind::LParen: return "'('";
        case TokenKind::RParen: return "')'";
        case TokenKind::LBracket: return "'['";
        case TokenKind::RBracket: return "']'";
        case TokenKind::LBrace: return "'{'";
        case TokenKind::RBrace: return "'}'";
        case TokenKind::Semicolon: return "';'";
        case TokenKind::End: return "end of input";
    }
    return "?";
}

ParseError::ParseError(std::string message, int line, int col, std::vector<TokenKind> expected)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
      message_(std::move(message)),
      line_(line),
      col_(col),
      expected_(std::move(expected)) {}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

ast::Program parse(std::span<const Token> tokens) { return Parser(tokens).program(); }

ast::Program parse_source(std::string_view source) {
    std::vector<Token> tokens = tokenize(source);
    return parse(tokens);
}

}  // namespace easytime::frontend
