// SPDX-License-Identifier: Apache-2.0

#include "easytime/codegen.hpp"

#include <cctype>

namespace easytime::codegen {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append(Code& dst, Code src) {
    dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
}

Instr load(const ast::Aexp& a) {
    return std::visit(Overloaded{
                          [](const ast::Num& n) { return Instr{Push{n.value}}; },
                          [](const ast::Var& v) { return Instr{Fetch{v.name}}; },
                      },
                      a.node);
}

// A literal operand is pushed before a variable one, so `(ROUND3 == 55)`
// becomes PUSH 55 FETCH ROUND3 EQ. Other operand pairs keep source order.
Code comparison(const ast::Aexp& lhs, const ast::Aexp& rhs, Instr op) {
    const bool swap = std::holds_alternative<ast::Var>(lhs.node) && std::holds_alternative<ast::Num>(rhs.node);
    Code code;
    code.push_back(load(swap ? rhs : lhs));
    code.push_back(load(swap ? lhs : rhs));
    code.push_back(std::move(op));
    return code;
}

Code conditional(const ast::Cond& c, const SourceRef& src) {
    return std::visit(Overloaded{
                          [&](const ast::True&) { return compile_body(c.body, src); },
                          [](const ast::False&) { return Code{Instr{Noop{}}}; },
                          [&](const ast::Eq& e) {
                              Code code = comparison(e.lhs, e.rhs, Instr{Eq{}});
                              code.push_back(Instr{Branch{compile_body(c.body, src), {Instr{Noop{}}}}});
                              return code;
                          },
                          [&](const ast::Neq& e) {
                              Code code = comparison(e.lhs, e.rhs, Instr{Neq{}});
                              code.push_back(Instr{Branch{compile_body(c.body, src), {Instr{Noop{}}}}});
                              return code;
                          },
                      },
                      c.test.node);
}

}  // namespace

const CodeBlock* CompiledProgram::find_block(std::int64_t mp) const {
    for (const CodeBlock& b : blocks) {
        if (b.mp == mp) {
            return &b;
        }
    }
    return nullptr;
}

Code compile_stmt(const ast::Stmt& stmt, const SourceRef& src) {
    return std::visit(Overloaded{
                          [&](const ast::Upd& u) {
                              return Code{Instr{FetchSrc{src}}, Instr{Store{u.var}}};
                          },
                          [](const ast::Dec& d) {
                              return Code{Instr{Fetch{d.var}}, Instr{Dec{}}, Instr{Store{d.var}}};
                          },
                          [](const ast::Assign& a) { return Code{load(a.value), Instr{Store{a.var}}}; },
                          [&](const ast::Cond& c) { return conditional(c, src); },
                      },
                      stmt.node);
}

Code compile_body(const std::vector<ast::Stmt>& body, const SourceRef& src) {
    Code code;
    for (const ast::Stmt& s : body) {
        append(code, compile_stmt(s, src));
    }
    return code;
}

CodeBlock compile_place(const ast::MeasPlace& place, const sema::AgentTable& agents) {
    const sema::AgentInfo* info = agents.find(place.agent);
    SourceRef src = info ? SourceRef{info->kind, info->source} : SourceRef{};
    return CodeBlock{place.mp, compile_body(place.body, src)};
}

CompileResult compile_program(const ast::Program& program) {
    CompileResult result;
    auto agents = sema::build_agents(program.agents);
    auto state = sema::build_state(program.decls);
    result.errors = std::move(agents.errors);
    result.errors.insert(result.errors.end(), state.errors.begin(), state.errors.end());
    auto checks = sema::check_program(program, agents.value, state.value);
    result.errors.insert(result.errors.end(), checks.begin(), checks.end());
    if (!result.errors.empty()) {
        return result;
    }

    CompiledProgram cp;
    for (const ast::MeasPlace& m : program.places) {
        cp.blocks.push_back(compile_place(m, agents.value));
        cp.place_agents.emplace(m.mp, m.agent);
    }
    cp.agents = std::move(agents.value);
    cp.state = std::move(state.value);
    result.program = std::move(cp);
    return result;
}

std::string render(const Instr& instr) {
    return std::visit(Overloaded{
                          [](const Fetch& f) { return "FETCH " + f.var; },
                          [](const FetchSrc& f) {
                              return f.src.kind == ast::AgentKind::Manual
                                         ? "FETCH accessfile(\"" + f.src.source + "\")"
                                         : "FETCH connect(" + f.src.source + ")";
                          },
                          [](const Store& s) { return "STORE " + s.var; },
                          [](const Push& p) { return "PUSH " + std::to_string(p.value); },
                          [](const Dec&) { return std::string("DEC"); },
                          [](const Eq&) { return std::string("EQ"); },
                          [](const Neq&) { return std::string("NEQ"); },
                          [](const Noop&) { return std::string("NOOP"); },
                          [](const Branch& b) {
                              return "BRANCH( " + render(b.then_code) + ", " + render(b.else_code) + ")";
                          },
                      },
                      instr.op);
}

std::string render(const Code& code) {
    std::string out;
    for (const Instr& i : code) {
        if (!out.empty()) {
            out += ' ';
        }
        out += render(i);
    }
    return out;
}

std::string render(const CodeBlock& block) {
    return "(WAIT i " + render(block.code) + ", " + std::to_string(block.mp) + ")";
}

std::string render(const CompiledProgram& program) {
    std::string out;
    for (const CodeBlock& b : program.blocks) {
        if (!out.empty()) {
            out += '\n';
        }
        out += render(b);
        out += '\n';
    }
    return out;
}

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

std::size_t instruction_count(const Code& code) {
    std::size_t n = 0;
    for (const Instr& i : code) {
        ++n;
        if (const auto* b = std::get_if<Branch>(&i.op)) {
            n += instruction_count(b->then_code) + instruction_count(b->else_code);
        }
    }
    return n;
}

}  // namespace easytime::codegen
