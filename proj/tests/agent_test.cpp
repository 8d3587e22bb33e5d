// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "easytime/agent.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

namespace {

using namespace easytime;
using agent::Agent;
using agent::Event;
using agent::RfidTag;
using agent::StartNumber;

std::vector<store::RunnerRecord> runners(std::initializer_list<std::int64_t> ids) {
    std::vector<store::RunnerRecord> out;
    for (std::int64_t id : ids) {
        out.push_back({id, "T" + std::to_string(id), "Last" + std::to_string(id), "First"});
    }
    return out;
}

class AgentTest : public ::testing::Test {
protected:
    void SetUp() override { agent::set_verbose(false); }

    agent::AgentConfig config() const {
        agent::AgentConfig c;
        c.pgm = testkit::triathlon_compiled();
        c.data_dir = dir.path() / "data";
        c.work_dir = dir.path();
        return c;
    }

    std::int64_t cell(const Agent& a, std::int64_t id, std::string_view var) const {
        const store::ResultsTable t = a.snapshot();
        for (const store::ResultsRow& r : t.rows) {
            if (r.id == id) {
                return r.cells.at(static_cast<std::size_t>(t.column(var)));
            }
        }
        ADD_FAILURE() << "no runner " << id;
        return 0;
    }

    testkit::TempDir dir{"agent"};
};

TEST(EventLines, ParseAndFormat) {
    EXPECT_EQ(agent::parse_manual_line("7;2;4500"), (Event{StartNumber{7}, 2, 4500}));
    EXPECT_EQ(agent::parse_online_line("E2003411;3;99"), (Event{RfidTag{"E2003411"}, 3, 99}));
    EXPECT_EQ(agent::parse_manual_line("7;2;4500\r"), (Event{StartNumber{7}, 2, 4500}));
    EXPECT_FALSE(agent::parse_manual_line("T1;2;4500"));
    EXPECT_FALSE(agent::parse_manual_line("7;2"));
    EXPECT_FALSE(agent::parse_manual_line("7;2;45;1"));
    EXPECT_FALSE(agent::parse_online_line(";2;4500"));
    EXPECT_FALSE(agent::parse_online_line("T1;x;4500"));
    EXPECT_EQ(agent::format_event_line({StartNumber{7}, 2, 4500}), "7;2;4500");
    EXPECT_EQ(agent::format_event_line({RfidTag{"T1"}, 4, 1}), "T1;4;1");
}

TEST_F(AgentTest, InitialRows) {
    Agent a(config(), runners({1, 2, 3}));
    const store::ResultsTable t = a.snapshot();
    ASSERT_EQ(t.rows.size(), 3U);
    for (const auto& row : t.rows) {
        EXPECT_EQ(row.cells, (std::vector<std::int64_t>{20, 0, 0, 0, 105, 0, 0, 0, 55, 0, 0}));
    }
    EXPECT_EQ(store::read_database(a.database_path()), t);
    EXPECT_FALSE(a.status().resumed);
}

TEST_F(AgentTest, StartupValidation) {
    auto dup = runners({1, 2});
    dup[1].rfid = "T1";
    EXPECT_THROW(Agent(config(), dup), agent::StartupError);
    EXPECT_THROW(Agent(config(), runners({1, 1})), agent::StartupError);
    EXPECT_THROW(Agent(config(), {}), agent::StartupError);
    auto c = config();
    c.poll_interval = std::chrono::milliseconds(0);
    EXPECT_THROW(Agent(c, runners({1})), agent::StartupError);
}

TEST_F(AgentTest, TransitionCrossing) {
    Agent a(config(), runners({7, 8}));
    agent::Outcome o = a.process_event({StartNumber{7}, 2, 4500});
    EXPECT_TRUE(o.applied);
    EXPECT_EQ(o.runner, 7);
    EXPECT_EQ(cell(a, 7, "TRANS1"), 4500);
    EXPECT_EQ(cell(a, 8, "TRANS1"), 0);
    EXPECT_EQ(store::read_database(a.database_path()), a.snapshot());
}

TEST_F(AgentTest, BikeLapsByTag) {
    Agent a(config(), runners({1}));
    std::int64_t t = 50'000;
    for (int lap = 0; lap < 105; ++lap) {
        t += 400;
        ASSERT_TRUE(a.process_event({RfidTag{"T1"}, 3, t}).applied);
    }
    EXPECT_EQ(cell(a, 1, "ROUND2"), 0);
    EXPECT_EQ(cell(a, 1, "BIKE"), t);
    EXPECT_EQ(cell(a, 1, "INTER2"), t);
}

TEST_F(AgentTest, Rejections) {
    Agent a(config(), runners({1}));
    const auto before = a.snapshot();
    EXPECT_EQ(a.process_event({StartNumber{99}, 1, 10}).reason, agent::reason::kUnknownCompetitor);
    EXPECT_EQ(a.process_event({RfidTag{"nope"}, 1, 10}).reason, agent::reason::kUnknownCompetitor);
    EXPECT_EQ(a.process_event({StartNumber{1}, 42, 10}).reason, agent::reason::kUnknownMp);
    EXPECT_EQ(a.process_line("garbage", agent::LineFormat::Manual, "test")->reason, agent::reason::kMalformed);
    EXPECT_FALSE(a.process_line("   ", agent::LineFormat::Manual, "test"));
    EXPECT_EQ(a.snapshot(), before);
    EXPECT_EQ(a.status().rejected, 4U);

    const std::string rejects = store::read_file(a.rejects_log_path());
    EXPECT_NE(rejects.find("test\tmalformed line\tgarbage"), std::string::npos);
    EXPECT_NE(rejects.find("unknown mp\t1;42;10"), std::string::npos);
}

TEST_F(AgentTest, BatchFileIsClaimedArchivedAndApplied) {
    Agent a(config(), runners({1, 2}));
    store::write_atomic(dir / "abc.res", "1;1;100\n2;1;110\n1;1;400\n");
    agent::BatchReport r = a.run_batch(1);
    EXPECT_TRUE(r.found);
    EXPECT_EQ(r.applied, 3U);
    EXPECT_FALSE(std::filesystem::exists(dir / "abc.res"));
    ASSERT_TRUE(std::filesystem::exists(r.archived));
    EXPECT_EQ(r.archived.parent_path(), dir.path() / "data" / "archive");
    EXPECT_EQ(cell(a, 1, "ROUND1"), 18);
    EXPECT_EQ(cell(a, 1, "SWIM"), 400);
    EXPECT_EQ(cell(a, 2, "SWIM"), 110);
}

TEST_F(AgentTest, BatchFileAbsent) {
    Agent a(config(), runners({1}));
    const auto before = a.snapshot();
    EXPECT_FALSE(a.run_batch(1).found);
    EXPECT_EQ(a.snapshot(), before);
    EXPECT_THROW(a.run_batch(2), std::invalid_argument);
}

TEST_F(AgentTest, BatchWithMalformedLine) {
    Agent a(config(), runners({1}));
    store::write_atomic(dir / "abc.res", "1;1;100\nbroken line\n1;2;300");
    agent::BatchReport r = a.run_batch(1);
    EXPECT_EQ(r.applied, 2U);
    EXPECT_EQ(r.rejected, 1U);

    Agent oracle(
        [&] {
            auto c = config();
            c.data_dir = dir.path() / "oracle";
            return c;
        }(),
        runners({1}));
    oracle.process_event({StartNumber{1}, 1, 100});
    oracle.process_event({StartNumber{1}, 2, 300});
    EXPECT_EQ(a.snapshot(), oracle.snapshot());
}

TEST_F(AgentTest, RepeatedClaimsGetDistinctArchives) {
    Agent a(config(), runners({1}));
    store::write_atomic(dir / "abc.res", "1;1;100\n");
    auto first = a.run_batch(1).archived;
    store::write_atomic(dir / "abc.res", "1;1;200\n");
    auto second = a.run_batch(1).archived;
    EXPECT_NE(first, second);
    EXPECT_TRUE(std::filesystem::exists(first));
    EXPECT_TRUE(std::filesystem::exists(second));
}

TEST_F(AgentTest, OutOfOrderTimesAreAppliedAndLogged) {
    Agent a(config(), runners({1}));
    EXPECT_FALSE(a.process_event({RfidTag{"T1"}, 4, 9000}).late);
    agent::Outcome o = a.process_event({RfidTag{"T1"}, 4, 8000});
    EXPECT_TRUE(o.applied);
    EXPECT_TRUE(o.late);
    // arrival order: INTER3 ends up with the later-arriving, earlier time
    EXPECT_EQ(cell(a, 1, "INTER3"), 8000);
    EXPECT_EQ(cell(a, 1, "TRANS2"), 9000);
    EXPECT_EQ(a.status().warnings, 1U);
    EXPECT_NE(store::read_file(a.warnings_log_path()).find("precedes previous 9000"), std::string::npos);
}

TEST_F(AgentTest, RankSkipsUnfinished) {
    Agent a(config(), runners({7, 8, 9}));
    a.process_event({StartNumber{7}, 4, 1});  // mp4 needs ROUND3 at 0 for RUN
    std::vector<agent::Standing> none = a.rank("RUN");
    EXPECT_TRUE(none.empty());

    store::ResultsTable t{{"RUN"}, {{7, {9000}}, {8, {8500}}, {9, {0}}}};
    auto standings = agent::rank_table(t, runners({7, 8, 9}), "RUN");
    ASSERT_EQ(standings.size(), 2U);
    EXPECT_EQ(standings[0].runner.id, 8);
    EXPECT_EQ(standings[0].value, 8500);
    EXPECT_EQ(standings[1].runner.id, 7);
    EXPECT_EQ(standings[1].value, 9000);
    EXPECT_THROW(a.rank("NOPE"), agent::UnknownVariable);
}

TEST_F(AgentTest, ResumesPersistedTable) {
    store::ResultsTable before;
    {
        Agent a(config(), runners({1, 2}));
        a.process_event({StartNumber{1}, 1, 100});
        a.process_event({RfidTag{"T2"}, 3, 200});
        before = a.snapshot();
    }
    Agent b(config(), runners({1, 2}));
    EXPECT_TRUE(b.status().resumed);
    EXPECT_EQ(b.snapshot(), before);

    auto fresh = config();
    fresh.resume = false;
    Agent c(fresh, runners({1, 2}));
    EXPECT_FALSE(c.status().resumed);
    EXPECT_EQ(cell(c, 1, "SWIM"), 0);
}

TEST_F(AgentTest, RefusesToResumeAgainstDifferentRunners) {
    { Agent a(config(), runners({1, 2})); }
    EXPECT_THROW(Agent(config(), runners({1, 3})), agent::StartupError);
    EXPECT_THROW(Agent(config(), runners({1})), agent::StartupError);
}

TEST_F(AgentTest, EventsLogRecordsAppliedOrder) {
    Agent a(config(), runners({1}));
    a.process_event({StartNumber{1}, 1, 5}, "manual:1");
    a.process_event({RfidTag{"T1"}, 3, 6}, "online:2");
    EXPECT_EQ(store::read_file(a.events_log_path()), "manual:1\t1\t1;1;5\nonline:2\t1\tT1;3;6\n");
}

}  // namespace
