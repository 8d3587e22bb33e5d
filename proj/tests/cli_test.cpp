// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <httplib.h>

#include <sstream>
#include <thread>

#include "easytime/codegen.hpp"
#include "easytime/store.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "process.hpp"

namespace {

using namespace easytime;
using testkit::run;

const std::string kCli = EASYTIME_CLI;

class CliTest : public ::testing::Test {
protected:
    std::filesystem::path write(const std::string& name, const std::string& text) {
        store::write_atomic(dir / name, text);
        return dir / name;
    }

    testkit::RunResult easytime(std::vector<std::string> args) {
        args.insert(args.begin(), kCli);
        return run(args, dir.path());
    }

    testkit::TempDir dir{"cli"};
};

TEST_F(CliTest, CompileWritesGoldenCode) {
    auto r = easytime({"compile", testkit::fixture("double_triathlon.et").string(), "-o", "pgm.txt"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(codegen::normalize_whitespace(store::read_file(dir / "pgm.txt")),
              codegen::normalize_whitespace(testkit::fixture_text("double_triathlon.pgm.txt")));
}

TEST_F(CliTest, CompileMinimalProgram) {
    write("min.et", "1 manual \"a.res\";\nvar X := 0;\nmp[1] -> agnt[1] { upd X; }\n");
    auto r = easytime({"compile", "min.et", "--out", "min.txt"});
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(store::read_file(dir / "min.txt"), "(WAIT i FETCH accessfile(\"a.res\") STORE X, 1)\n");
}

TEST_F(CliTest, OutputPathFromEnvironment) {
    write("min.et", "1 manual \"a.res\"; var X := 0; mp[1] -> agnt[1] { upd X; }");
    ::setenv("EASYTIME_OUT", (dir / "from-env.txt").c_str(), 1);
    auto r = easytime({"compile", "min.et"});
    ::unsetenv("EASYTIME_OUT");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "from-env.txt"));
}

TEST_F(CliTest, DuplicateAgentWritesNothing) {
    write("dup.et", "1 manual \"a.res\";\n1 auto 10.0.0.1;\nvar X := 0;\nmp[1] -> agnt[1] { upd X; }\n");
    auto r = easytime({"compile", "dup.et", "-o", "pgm.txt"});
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("dup.et:2:1: DuplicateAgent: 1: Agent 1 is already defined"), std::string::npos) << r.err;
    EXPECT_FALSE(std::filesystem::exists(dir / "pgm.txt"));
}

TEST_F(CliTest, UndefinedNamesFail) {
    write("var.et", "1 manual \"a.res\"; var X := 0; mp[1] -> agnt[1] { upd GHOST; }");
    auto v = easytime({"compile", "var.et", "-o", "v.txt"});
    EXPECT_EQ(v.exit_code, 1);
    EXPECT_NE(v.err.find("UndefinedVar: GHOST"), std::string::npos);

    write("agent.et", "1 manual \"a.res\"; var X := 0; mp[1] -> agnt[9] { upd X; }");
    auto a = easytime({"compile", "agent.et", "-o", "a.txt"});
    EXPECT_EQ(a.exit_code, 1);
    EXPECT_NE(a.err.find("UndefinedAgent: 9"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(dir / "v.txt"));
    EXPECT_FALSE(std::filesystem::exists(dir / "a.txt"));
}

TEST_F(CliTest, SyntaxErrorCarriesPosition) {
    write("bad.et", "1 manual \"a.res\"\nvar X := 0;");
    auto r = easytime({"compile", "bad.et"});
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("bad.et:2:1: expected ';'"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(easytime({}).exit_code, 1);
    EXPECT_EQ(easytime({"frobnicate"}).exit_code, 1);
    EXPECT_EQ(easytime({"compile", "missing.et"}).exit_code, 1);
    EXPECT_EQ(easytime({"--help"}).exit_code, 0);
}

TEST_F(CliTest, AgentNeedsItsRunners) {
    ASSERT_EQ(easytime({"compile", testkit::fixture("double_triathlon.et").string(), "-o", "pgm.txt"}).exit_code, 0);
    auto r = easytime({"agent", "pgm.txt", "nobody.txt", "--port", "0"});
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("nobody.txt"), std::string::npos);
    EXPECT_EQ(easytime({"agent", "missing.txt", testkit::fixture("runners3.txt").string()}).exit_code, 1);
}

TEST_F(CliTest, FullRaceThroughTheBinary) {
    ASSERT_EQ(easytime({"compile", testkit::fixture("double_triathlon.et").string(), "-o", "pgm.txt"}).exit_code, 0);
    const std::string runners = testkit::fixture("runners3.txt").string();
    testkit::Child agent({kCli, "agent", "pgm.txt", runners, "--data-dir", "data", "--host", "127.0.0.1", "--port",
                          "0", "--device-port-base", "0", "--poll-interval", "50"},
                         dir.path(), dir / "agent.err");
    auto ready = agent.read_line(std::chrono::seconds(10));
    ASSERT_TRUE(ready) << store::read_file(dir / "agent.err");
    int http = 0;
    int device = 0;
    ASSERT_EQ(std::sscanf(ready->c_str(), "ready http=%d agent2=%d", &http, &device), 2) << *ready;

    httplib::Client client("127.0.0.1", http);
    auto status = client.Get("/status");
    ASSERT_TRUE(status);
    EXPECT_NE(status->body.find("\"status\":\"ok\""), std::string::npos);

    auto sim = easytime({"simulate", "pgm.txt", runners, "--seed", "5", "--device-port", "2=" + std::to_string(device)});
    ASSERT_EQ(sim.exit_code, 0) << sim.err;
    EXPECT_NE(sim.out.find("events 543"), std::string::npos);
    const std::string order = sim.out.substr(sim.out.find("finish order ") + 13);

    // the batch file goes through the poller; wait until every event landed
    for (int i = 0; i < 250; ++i) {
        auto s = client.Get("/status");
        if (s && s->body.find("\"applied\":543,") != std::string::npos) {
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    auto ranking = client.Get("/ranking?var=RUN");
    ASSERT_TRUE(ranking);

    agent.signal(SIGTERM);
    const int st = agent.wait();
    EXPECT_TRUE(WIFEXITED(st) && WEXITSTATUS(st) == 0);

    auto rank = easytime({"rank", "data", "--var", "RUN"});
    ASSERT_EQ(rank.exit_code, 0) << rank.err;
    std::string ids;
    std::istringstream lines(rank.out);
    for (std::string line; std::getline(lines, line);) {
        // place;id;last;first;value
        const auto first = line.find(';');
        const auto second = line.find(';', first + 1);
        ids += (ids.empty() ? "" : " ") + line.substr(first + 1, second - first - 1);
    }
    EXPECT_EQ(ids + "\n", order);
    EXPECT_EQ(easytime({"rank", "data", "--var", "NOPE"}).exit_code, 1);
}

TEST_F(CliTest, SimulatePrintIsDeterministic) {
    ASSERT_EQ(easytime({"compile", testkit::fixture("double_triathlon.et").string(), "-o", "pgm.txt"}).exit_code, 0);
    const std::string runners = testkit::fixture("runners3.txt").string();
    auto a = easytime({"simulate", "pgm.txt", runners, "--seed", "3", "--print"});
    auto b = easytime({"simulate", "pgm.txt", runners, "--seed", "3", "--print"});
    EXPECT_EQ(a.exit_code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 543);
    EXPECT_EQ(easytime({"simulate", "pgm.txt", runners, "--mode", "sideways"}).exit_code, 1);
}

TEST_F(CliTest, SimulateBatchRefusesUnconsumedFile) {
    ASSERT_EQ(easytime({"compile", testkit::fixture("double_triathlon.et").string(), "-o", "pgm.txt"}).exit_code, 0);
    const std::string runners = testkit::fixture("runners3.txt").string();
    EXPECT_EQ(easytime({"simulate", "pgm.txt", runners, "--mode", "batch"}).exit_code, 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "abc.res"));
    EXPECT_EQ(easytime({"simulate", "pgm.txt", runners, "--mode", "batch"}).exit_code, 1);
}

}  // namespace
