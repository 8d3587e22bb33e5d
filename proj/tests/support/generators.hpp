// SPDX-License-Identifier: Apache-2.0
//
// Seeded generators of valid programs, rows and event times for the property
// suites. Every program produced here passes sema, so compile_program always
// yields code for it.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "easytime/ast.hpp"
#include "easytime/vm.hpp"

namespace easytime::testkit {

class AstGenerator {
public:
    explicit AstGenerator(std::uint64_t seed) : rng_(seed) {}

    ast::Program program() {
        ast::Program p;
        const int agents = pick(1, 3);
        for (int i = 1; i <= agents; ++i) {
            ast::AgentDecl a;
            a.number = i + pick(0, 1) * 10;
            if (coin()) {
                a.kind = ast::AgentKind::Manual;
                a.source = "lap" + std::to_string(pick(0, 99)) + ".res";
            } else {
                a.kind = ast::AgentKind::Auto;
                a.source = "10.0." + std::to_string(pick(0, 255)) + "." + std::to_string(pick(1, 254));
            }
            p.agents.push_back(a);
        }

        names_.clear();
        const int vars = pick(1, 5);
        for (int i = 0; i < vars; ++i) {
            std::string name = "V" + std::to_string(i);
            ast::Aexp init = (!names_.empty() && pick(0, 4) == 0) ? ast::var(any_name()) : ast::num(pick(0, 60));
            p.decls.push_back({name, init, {}});
            names_.push_back(name);
        }

        const int places = pick(1, 4);
        std::int64_t mp = 0;
        for (int i = 0; i < places; ++i) {
            mp += pick(1, 3);
            ast::MeasPlace m;
            m.mp = mp;
            m.agent = p.agents[static_cast<std::size_t>(pick(0, agents - 1))].number;
            m.body = body(0);
            p.places.push_back(std::move(m));
        }
        return p;
    }

    /// Values around the interesting boundaries: zero, one, the generator's
    /// literal range and negatives left by repeated dec.
    vm::Row row(const ast::Program& p) {
        vm::Row r;
        for (const ast::VarDecl& d : p.decls) {
            r[d.name] = pick(0, 3) == 0 ? pick(-2, 3) : pick(0, 60);
        }
        return r;
    }

    std::int64_t time() { return pick(0, 2) == 0 ? pick(0, 3) : pick(1, 2'000'000'000); }

    std::int64_t pick(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    bool coin() { return (rng_() & 1U) != 0; }
    const std::string& any_name() { return names_[static_cast<std::size_t>(pick(0, names_.size() - 1))]; }

    ast::Aexp aexp() { return coin() ? ast::var(any_name()) : ast::num(pick(0, 3)); }

    ast::Bexp bexp() {
        switch (pick(0, 5)) {
            case 0: return ast::always();
            case 1: return ast::never();
            case 2:
            case 3: return ast::eq(aexp(), aexp());
            default: return ast::neq(aexp(), aexp());
        }
    }

    std::vector<ast::Stmt> body(int depth) {
        std::vector<ast::Stmt> out;
        const int n = pick(1, depth == 0 ? 4 : 2);
        for (int i = 0; i < n; ++i) {
            out.push_back(stmt(depth));
        }
        return out;
    }

    ast::Stmt stmt(int depth) {
        switch (pick(0, depth < 2 ? 4 : 2)) {
            case 0: return ast::dec(any_name());
            case 1: return ast::upd(any_name());
            case 2: return ast::assign(any_name(), aexp());
            default: return ast::cond(bexp(), body(depth + 1));
        }
    }

    std::mt19937_64 rng_;
    std::vector<std::string> names_;
};

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("easytime-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace easytime::testkit
