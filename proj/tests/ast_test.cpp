// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "easytime/ast.hpp"
#include "easytime/frontend.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

namespace {

using namespace easytime;
using namespace easytime::ast;

TEST(Ast, IdentifiersExcludeKeywords) {
    EXPECT_TRUE(is_identifier("ROUND1"));
    EXPECT_TRUE(is_identifier("lap_2"));
    EXPECT_FALSE(is_identifier("upd"));
    EXPECT_FALSE(is_identifier("agnt"));
    EXPECT_FALSE(is_identifier("1X"));
    EXPECT_FALSE(is_identifier("_x"));
    EXPECT_FALSE(is_identifier(""));
}

TEST(Ast, Ipv4Shape) {
    EXPECT_TRUE(is_ipv4("192.168.225.100"));
    EXPECT_TRUE(is_ipv4("0.0.0.0"));
    EXPECT_FALSE(is_ipv4("256.1.1.1"));
    EXPECT_FALSE(is_ipv4("1.2.3"));
    EXPECT_FALSE(is_ipv4("1.2.3.4.5"));
    EXPECT_FALSE(is_ipv4("1..3.4"));
}

TEST(Ast, StructuralEqualityIgnoresPositions) {
    Stmt a = upd("X");
    Stmt b = upd("X");
    a.pos = {3, 7};
    b.pos = {9, 1};
    EXPECT_EQ(a, b);
    EXPECT_NE(upd("X"), dec("X"));
}

TEST(Ast, ValidateFlagsBrokenTrees) {
    Program p;
    EXPECT_EQ(validate(p).size(), 3U);

    p.agents.push_back({1, AgentKind::Auto, "not-an-ip", {}});
    p.decls.push_back({"X", num(-1), {}});
    p.places.push_back({1, 1, {cond(always(), {})}, {}});
    auto problems = validate(p);
    ASSERT_EQ(problems.size(), 3U);
    EXPECT_NE(problems[0].find("dotted-quad"), std::string::npos);
    EXPECT_NE(problems[1].find("negative"), std::string::npos);
    EXPECT_NE(problems[2].find("empty statement list"), std::string::npos);
}

TEST(Ast, GeneratedProgramsValidate) {
    testkit::AstGenerator gen(11);
    for (int i = 0; i < 200; ++i) {
        EXPECT_TRUE(validate(gen.program()).empty());
    }
}

TEST(PrettyPrint, SingleDeclaration) {
    VarDecl d{"X", num(0), {}};
    Program p{{{1, AgentKind::Manual, "a.res", {}}}, {d}, {{1, 1, {upd("X")}, {}}}};
    const std::string text = pretty_print(p);
    EXPECT_NE(text.find("var X := 0;\n"), std::string::npos);
}

TEST(PrettyPrint, ConditionChainsStayOnOneLine) {
    Stmt s = cond(eq(var("A"), num(1)), {cond(neq(var("B"), num(2)), {upd("X")})});
    EXPECT_EQ(pretty_print(s), "(A == 1) -> (B != 2) -> upd X;\n");

    Stmt block = cond(always(), {dec("X"), assign("Y", var("X"))});
    EXPECT_EQ(pretty_print(block), "(true) -> {\n  dec X;\n  Y := X;\n}\n");
}

TEST(PrettyPrint, TriathlonModuloWhitespace) {
    const std::string printed = pretty_print(testkit::triathlon());
    const std::string source = testkit::fixture_text("double_triathlon.et");
    // Collapsing every whitespace run makes the two layouts comparable;
    // the only other difference is `:=0` against `:= 0` in the source.
    auto squash = [](std::string s) {
        std::string out;
        for (char c : s) {
            if (c != ' ' && c != '\n' && c != '\t') {
                out += c;
            }
        }
        return out;
    };
    EXPECT_EQ(squash(printed), squash(source));
}

TEST(PrettyPrint, RoundTripsTriathlon) {
    const Program p = testkit::triathlon();
    EXPECT_EQ(frontend::parse_source(pretty_print(p)), p);
}

TEST(PrettyPrint, RoundTripsGeneratedPrograms) {
    testkit::AstGenerator gen(2024);
    for (int i = 0; i < 500; ++i) {
        const Program p = gen.program();
        const std::string text = pretty_print(p);
        ASSERT_EQ(frontend::parse_source(text), p) << text;
    }
}

}  // namespace
