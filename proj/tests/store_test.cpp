// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "easytime/store.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

namespace {

using namespace easytime;
using store::StoreError;

TEST(Runners, RoundTrip) {
    const std::vector<store::RunnerRecord> runners{{1, "T1", "Novak", "Ana"}, {12, "E200 3411", "Zupan", "Jan"}};
    EXPECT_EQ(store::parse_runners(store::format_runners(runners)), runners);
}

TEST(Runners, FixtureParses) {
    auto runners = store::read_runners(testkit::fixture("runners3.txt"));
    ASSERT_EQ(runners.size(), 3U);
    EXPECT_EQ(runners[2], (store::RunnerRecord{3, "T3", "Kranjc", "Maja"}));
}

TEST(Runners, RejectsBadInput) {
    EXPECT_THROW(store::parse_runners(""), StoreError);
    EXPECT_THROW(store::parse_runners("1;T1;A;B\n"), StoreError);
    EXPECT_THROW(store::parse_runners("id;rfid;last_name;first_name\n1;T1;A\n"), StoreError);
    EXPECT_THROW(store::parse_runners("id;rfid;last_name;first_name\nx;T1;A;B\n"), StoreError);
    const std::vector<store::RunnerRecord> bad{{1, "T;1", "A", "B"}};
    EXPECT_THROW(store::format_runners(bad), StoreError);
}

TEST(Database, RoundTripAndLayout) {
    store::ResultsTable t{{"ROUND1", "SWIM"}, {{1, {20, 0}}, {2, {19, 1246176300}}}};
    const std::string text = store::format_database(t);
    EXPECT_EQ(text, "id;ROUND1;SWIM\n1;20;0\n2;19;1246176300\n");
    EXPECT_EQ(store::parse_database(text), t);
    EXPECT_EQ(t.column("SWIM"), 1);
    EXPECT_EQ(t.column("RUN"), -1);
}

TEST(Database, RejectsBadInput) {
    EXPECT_THROW(store::parse_database(""), StoreError);
    EXPECT_THROW(store::parse_database("runner;A\n"), StoreError);
    EXPECT_THROW(store::parse_database("id;A\n1;2;3\n"), StoreError);
    EXPECT_THROW(store::parse_database("id;A\n1;two\n"), StoreError);
}

TEST(VmRow, Mapping) {
    const std::vector<std::string> cols{"A", "B"};
    store::ResultsRow row{1, {5, 6}};
    vm::Row r = store::to_vm_row(cols, row);
    EXPECT_EQ(r, (vm::Row{{"A", 5}, {"B", 6}}));
    r["B"] = 9;
    store::from_vm_row(cols, r, row);
    EXPECT_EQ(row.cells, (std::vector<std::int64_t>{5, 9}));
}

TEST(Pgm, RoundTripWithSchema) {
    testkit::TempDir dir("store");
    const codegen::CompiledProgram cp = testkit::triathlon_compiled();
    store::write_pgm(dir / "pgm.txt", cp);
    EXPECT_EQ(codegen::normalize_whitespace(store::read_file(dir / "pgm.txt")),
              codegen::normalize_whitespace(testkit::fixture_text("double_triathlon.pgm.txt")));
    EXPECT_TRUE(std::filesystem::exists(dir / "pgm.txt.schema"));
    EXPECT_EQ(store::read_pgm(dir / "pgm.txt"), cp);
}

TEST(Pgm, GeneratedProgramsRoundTrip) {
    testkit::TempDir dir("store-gen");
    testkit::AstGenerator gen(8);
    for (int i = 0; i < 100; ++i) {
        const auto cp = *codegen::compile_program(gen.program()).program;
        store::write_pgm(dir / "p.txt", cp);
        ASSERT_EQ(store::read_pgm(dir / "p.txt"), cp);
    }
}

TEST(Pgm, DetectsInconsistentSchema) {
    testkit::TempDir dir("store-bad");
    store::write_pgm(dir / "pgm.txt", testkit::triathlon_compiled());
    const std::string schema = store::read_file(dir / "pgm.txt.schema");

    auto expect_rejected = [&](std::string edited) {
        store::write_atomic(dir / "pgm.txt.schema", edited);
        EXPECT_THROW(store::read_pgm(dir / "pgm.txt"), StoreError) << edited;
    };
    std::string no_place = schema;
    no_place.erase(no_place.find("place;4;2\n"), 10);
    expect_rejected(no_place);

    std::string wrong_agent = schema;
    wrong_agent.replace(wrong_agent.find("place;1;1"), 9, "place;1;2");
    expect_rejected(wrong_agent);

    std::string no_var = schema;
    no_var.erase(no_var.find("var;BIKE;0\n"), 11);
    expect_rejected(no_var);

    std::filesystem::remove(dir / "pgm.txt.schema");
    EXPECT_THROW(store::read_pgm(dir / "pgm.txt"), StoreError);
}

TEST(WriteAtomic, ReplacesContent) {
    testkit::TempDir dir("atomic");
    store::write_atomic(dir / "f", "one");
    store::write_atomic(dir / "f", "two");
    EXPECT_EQ(store::read_file(dir / "f"), "two");
    EXPECT_THROW(store::read_file(dir / "missing"), StoreError);
}

}  // namespace
