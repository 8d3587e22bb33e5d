// SPDX-License-Identifier: Apache-2.0

#include "easytime/vm.hpp"

#include <charconv>
#include <optional>

#include "easytime/frontend.hpp"

namespace easytime::vm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using codegen::Code;
using codegen::Instr;

class Machine {
public:
    Machine(Row& data, std::int64_t time_reg) : data_(data), time_reg_(time_reg) {}

    void run(const Code& code) {
        for (const Instr& instr : code) {
            step(instr);
        }
    }

    std::size_t steps() const { return steps_; }
    bool stack_empty() const { return stack_.empty(); }

private:
    std::int64_t pop() {
        if (stack_.empty()) {
            throw VmFault("stack underflow");
        }
        std::int64_t v = stack_.back();
        stack_.pop_back();
        return v;
    }

    std::int64_t& cell(const std::string& name) {
        auto it = data_.find(name);
        if (it == data_.end()) {
            throw VmFault("unknown identifier " + name);
        }
        return it->second;
    }

    void step(const Instr& instr) {
        ++steps_;
        std::visit(Overloaded{
                       [&](const codegen::Fetch& f) { stack_.push_back(cell(f.var)); },
                       // the source annotation documents provenance only
                       [&](const codegen::FetchSrc&) { stack_.push_back(time_reg_); },
                       [&](const codegen::Store& s) {
                           std::int64_t v = pop();
                           cell(s.var) = v;
                       },
                       [&](const codegen::Push& p) { stack_.push_back(p.value); },
                       [&](const codegen::Dec&) { stack_.push_back(pop() - 1); },
                       [&](const codegen::Eq&) {
                           std::int64_t b = pop();
                           std::int64_t a = pop();
                           stack_.push_back(a == b ? 1 : 0);
                       },
                       [&](const codegen::Neq&) {
                           std::int64_t b = pop();
                           std::int64_t a = pop();
                           stack_.push_back(a != b ? 1 : 0);
                       },
                       [&](const codegen::Branch& br) { run(pop() != 0 ? br.then_code : br.else_code); },
                       [](const codegen::Noop&) {},
                   },
                   instr.op);
    }

    Row& data_;
    std::int64_t time_reg_;
    std::vector<std::int64_t> stack_;
    std::size_t steps_ = 0;
};

// Rendered code text: words, integers, dotted addresses, strings, ( ) ,
class CodeReader {
public:
    explicit CodeReader(std::string_view text) : text_(text) {}

    std::vector<codegen::CodeBlock> blocks() {
        std::vector<codegen::CodeBlock> out;
        skip_space();
        while (!at_end()) {
            out.push_back(block());
            skip_space();
        }
        return out;
    }

private:
    struct Tok {
        enum Kind { Word, Number, Dotted, String, Punct, End } kind;
        std::string text;
        int line;
        int col;
    };

    bool at_end() const { return pos_ >= text_.size(); }

    void bump() {
        if (text_[pos_++] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
    }

    void skip_space() {
        while (!at_end() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
                             text_[pos_] == '\n')) {
            bump();
        }
    }

    static bool word_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    }
    static bool digit(char c) { return c >= '0' && c <= '9'; }

    Tok next() {
        skip_space();
        const int line = line_;
        const int col = col_;
        if (at_end()) {
            return {Tok::End, "", line, col};
        }
        const std::size_t start = pos_;
        const char c = text_[pos_];
        if (c == '(' || c == ')' || c == ',') {
            bump();
            return {Tok::Punct, std::string(1, c), line, col};
        }
        if (c == '"') {
            bump();
            while (!at_end() && text_[pos_] != '"' && text_[pos_] != '\n') {
                bump();
            }
            if (at_end() || text_[pos_] != '"') {
                throw frontend::ParseError("unterminated string in code text", line, col);
            }
            std::string body(text_.substr(start + 1, pos_ - start - 1));
            bump();
            return {Tok::String, std::move(body), line, col};
        }
        if (digit(c) || (c == '-' && pos_ + 1 < text_.size() && digit(text_[pos_ + 1]))) {
            bump();
            bool dotted = false;
            while (!at_end() && (digit(text_[pos_]) || text_[pos_] == '.')) {
                dotted = dotted || text_[pos_] == '.';
                bump();
            }
            return {dotted ? Tok::Dotted : Tok::Number, std::string(text_.substr(start, pos_ - start)), line,
                    col};
        }
        if (word_char(c)) {
            while (!at_end() && word_char(text_[pos_])) {
                bump();
            }
            return {Tok::Word, std::string(text_.substr(start, pos_ - start)), line, col};
        }
        throw frontend::ParseError(std::string("unexpected character '") + c + "' in code text", line, col);
    }

    const Tok& peek() {
        if (!lookahead_) {
            lookahead_ = next();
        }
        return *lookahead_;
    }

    Tok take() {
        Tok t = peek();
        lookahead_.reset();
        return t;
    }

    [[noreturn]] static void fail(const Tok& t, const std::string& what) {
        std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw frontend::ParseError("expected " + what + ", found " + found, t.line, t.col);
    }

    void punct(char c) {
        Tok t = take();
        if (t.kind != Tok::Punct || t.text[0] != c) {
            fail(t, std::string("'") + c + "'");
        }
    }

    void word(std::string_view w) {
        Tok t = take();
        if (t.kind != Tok::Word || t.text != w) {
            fail(t, "'" + std::string(w) + "'");
        }
    }

    std::string ident() {
        Tok t = take();
        if (t.kind != Tok::Word || !ast::is_identifier(t.text)) {
            fail(t, "identifier");
        }
        return t.text;
    }

    std::int64_t number() {
        Tok t = take();
        std::int64_t v = 0;
        if (t.kind != Tok::Number) {
            fail(t, "integer");
        }
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || ptr != t.text.data() + t.text.size()) {
            fail(t, "integer in range");
        }
        return v;
    }

    bool at_punct(char c) {
        const Tok& t = peek();
        return t.kind == Tok::Punct && t.text[0] == c;
    }

    codegen::CodeBlock block() {
        punct('(');
        word("WAIT");
        word("i");
        codegen::CodeBlock b;
        b.code = instrs();
        punct(',');
        b.mp = number();
        punct(')');
        return b;
    }

    Code instrs() {
        Code code;
        do {
            code.push_back(instr());
        } while (!at_punct(',') && !at_punct(')') && peek().kind != Tok::End);
        return code;
    }

    Instr instr() {
        Tok t = take();
        if (t.kind != Tok::Word) {
            fail(t, "instruction");
        }
        if (t.text == "FETCH") {
            const Tok& operand = peek();
            if (operand.kind == Tok::Word && (operand.text == "accessfile" || operand.text == "connect")) {
                Tok fn = take();
                if (at_punct('(')) {
                    take();
                    Tok arg = take();
                    codegen::SourceRef src;
                    if (fn.text == "accessfile") {
                        if (arg.kind != Tok::String) {
                            fail(arg, "quoted file spec");
                        }
                        src = {ast::AgentKind::Manual, arg.text};
                    } else {
                        if (arg.kind != Tok::Dotted || !ast::is_ipv4(arg.text)) {
                            fail(arg, "ip address");
                        }
                        src = {ast::AgentKind::Auto, arg.text};
                    }
                    punct(')');
                    return Instr{codegen::FetchSrc{std::move(src)}};
                }
                // a variable that happens to share the name
                return Instr{codegen::Fetch{fn.text}};
            }
            return Instr{codegen::Fetch{ident()}};
        }
        if (t.text == "STORE") return Instr{codegen::Store{ident()}};
        if (t.text == "PUSH") return Instr{codegen::Push{number()}};
        if (t.text == "DEC") return Instr{codegen::Dec{}};
        if (t.text == "EQ") return Instr{codegen::Eq{}};
        if (t.text == "NEQ") return Instr{codegen::Neq{}};
        if (t.text == "NOOP") return Instr{codegen::Noop{}};
        if (t.text == "BRANCH") {
            punct('(');
            codegen::Branch br;
            br.then_code = instrs();
            punct(',');
            br.else_code = instrs();
            punct(')');
            return Instr{std::move(br)};
        }
        fail(t, "instruction");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::optional<Tok> lookahead_;
};

std::int64_t value_of(const ast::Aexp& a, const Row& row) {
    return std::visit(Overloaded{
                          [](const ast::Num& n) { return n.value; },
                          [&](const ast::Var& v) { return row.at(v.name); },
                      },
                      a.node);
}

bool holds(const ast::Bexp& b, const Row& row) {
    return std::visit(Overloaded{
                          [](const ast::True&) { return true; },
                          [](const ast::False&) { return false; },
                          [&](const ast::Eq& e) { return value_of(e.lhs, row) == value_of(e.rhs, row); },
                          [&](const ast::Neq& e) { return value_of(e.lhs, row) != value_of(e.rhs, row); },
                      },
                      b.node);
}

void walk(const std::vector<ast::Stmt>& body, Row& row, std::int64_t event_time) {
    for (const ast::Stmt& s : body) {
        std::visit(Overloaded{
                       [&](const ast::Upd& u) { row.at(u.var) = event_time; },
                       [&](const ast::Dec& d) { row.at(d.var) -= 1; },
                       [&](const ast::Assign& a) { row.at(a.var) = value_of(a.value, row); },
                       [&](const ast::Cond& c) {
                           if (holds(c.test, row)) {
                               walk(c.body, row, event_time);
                           }
                       },
                   },
                   s.node);
    }
}

}  // namespace

ExecResult VmInstance::run(Row data, std::int64_t event_time) const {
    Machine m(data, event_time);
    m.run(block_.code);
    if (!m.stack_empty()) {
        throw VmFault("unbalanced stack after mp[" + std::to_string(block_.mp) + "]");
    }
    return ExecResult{std::move(data), m.steps()};
}

ExecResult execute(const codegen::CodeBlock& block, Row row, std::int64_t event_time) {
    return VmInstance(block).run(std::move(row), event_time);
}

std::vector<codegen::CodeBlock> load(std::string_view code_text) { return CodeReader(code_text).blocks(); }

Row reference_execute(const ast::MeasPlace& place, const sema::AgentTable& /*agents*/, Row row,
                      std::int64_t event_time) {
    walk(place.body, row, event_time);
    return row;
}

}  // namespace easytime::vm
