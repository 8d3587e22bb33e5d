// SPDX-License-Identifier: Apache-2.0

#include "easytime/sema.hpp"

#include <set>

namespace easytime::sema {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class Checker {
public:
    Checker(const AgentTable& agents, const VarState& state) : agents_(agents), state_(state) {}

    void place(const ast::MeasPlace& m) {
        const std::string mp_name = "mp[" + std::to_string(m.mp) + "]";
        if (!seen_places_.insert(m.mp).second) {
            errors_.push_back({ErrorKind::DuplicateVar, mp_name, m.pos.line, m.pos.col,
                               "measuring place " + mp_name + " is already defined"});
        }
        if (!agents_.contains(m.agent)) {
            const std::string subject = std::to_string(m.agent);
            errors_.push_back({ErrorKind::UndefinedAgent, subject, m.pos.line, m.pos.col,
                               "agent " + subject + " is not declared"});
        }
        body(m.body);
    }

    std::vector<SemaError> take() { return std::move(errors_); }

private:
    void body(const std::vector<ast::Stmt>& stmts) {
        for (const ast::Stmt& s : stmts) {
            stmt(s);
        }
    }

    void stmt(const ast::Stmt& s) {
        std::visit(Overloaded{
                       [&](const ast::Dec& d) { use(d.var, s.pos); },
                       [&](const ast::Upd& u) { use(u.var, s.pos); },
                       [&](const ast::Assign& a) {
                           use(a.var, s.pos);
                           use(a.value);
                       },
                       [&](const ast::Cond& c) {
                           std::visit(Overloaded{
                                          [](const ast::True&) {},
                                          [](const ast::False&) {},
                                          [&](const ast::Eq& e) {
                                              use(e.lhs);
                                              use(e.rhs);
                                          },
                                          [&](const ast::Neq& e) {
                                              use(e.lhs);
                                              use(e.rhs);
                                          },
                                      },
                                      c.test.node);
                           body(c.body);
                       },
                   },
                   s.node);
    }

    void use(const ast::Aexp& a) {
        if (const auto* v = std::get_if<ast::Var>(&a.node)) {
            use(v->name, a.pos);
        }
    }

    void use(const std::string& name, ast::SourcePos pos) {
        if (!state_.contains(name)) {
            errors_.push_back({ErrorKind::UndefinedVar, name, pos.line, pos.col,
                               "variable " + name + " is not declared"});
        }
    }

    const AgentTable& agents_;
    const VarState& state_;
    std::set<std::int64_t> seen_places_;
    std::vector<SemaError> errors_;
};

}  // namespace

bool AgentTable::insert(std::int64_t number, AgentInfo info) {
    return entries_.emplace(number, std::move(info)).second;
}

const AgentInfo* AgentTable::find(std::int64_t number) const {
    auto it = entries_.find(number);
    return it == entries_.end() ? nullptr : &it->second;
}

bool VarState::insert(std::string name, std::int64_t value) {
    if (index_.contains(name)) {
        return false;
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), value);
    return true;
}

std::optional<std::int64_t> VarState::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return entries_[it->second].second;
}

std::vector<std::string> VarState::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, value] : entries_) {
        out.push_back(name);
    }
    return out;
}

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DuplicateAgent: return "DuplicateAgent";
        case ErrorKind::DuplicateVar: return "DuplicateVar";
        case ErrorKind::UndefinedVar: return "UndefinedVar";
        case ErrorKind::UndefinedAgent: return "UndefinedAgent";
    }
    return "?";
}

std::string format_diagnostic(const SemaError& error) {
    return std::to_string(error.line) + ":" + std::to_string(error.col) + ": " +
           std::string(to_string(error.kind)) + ": " + error.subject + ": " + error.message;
}

Checked<AgentTable> build_agents(std::span<const ast::AgentDecl> decls) {
    Checked<AgentTable> out;
    for (const ast::AgentDecl& d : decls) {
        if (!out.value.insert(d.number, AgentInfo{d.kind, d.source})) {
            const std::string subject = std::to_string(d.number);
            out.errors.push_back({ErrorKind::DuplicateAgent, subject, d.pos.line, d.pos.col,
                                  "Agent " + subject + " is already defined"});
        }
    }
    return out;
}

Checked<VarState> build_state(std::span<const ast::VarDecl> decls) {
    Checked<VarState> out;
    for (const ast::VarDecl& d : decls) {
        std::int64_t value = 0;
        if (const auto* n = std::get_if<ast::Num>(&d.init.node)) {
            value = n->value;
        } else {
            const auto& ref = std::get<ast::Var>(d.init.node).name;
            if (auto bound = out.value.find(ref)) {
                value = *bound;
            } else {
                out.errors.push_back({ErrorKind::UndefinedVar, ref, d.init.pos.line, d.init.pos.col,
                                      "variable " + ref + " is not declared"});
            }
        }
        if (!out.value.insert(d.name, value)) {
            out.errors.push_back({ErrorKind::DuplicateVar, d.name, d.pos.line, d.pos.col,
                                  "variable " + d.name + " is already defined"});
        }
    }
    return out;
}

std::vector<SemaError> check_program(const ast::Program& program, const AgentTable& agents,
                                     const VarState& state) {
    Checker checker(agents, state);
    for (const ast::MeasPlace& m : program.places) {
        checker.place(m);
    }
    return checker.take();
}

}  // namespace easytime::sema
