#include "test_support.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("moqc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    CliRun run(const std::string& args) const {
        const std::string err = path("stderr.txt");
        const std::string cmd = std::string(MOQC_CLI_PATH) + " " + args + " 2>" + err;
        CliRun r;
        FILE* pipe = popen(cmd.c_str(), "r");
        if (!pipe) return r;
        char buf[4096];
        std::size_t n = 0;
        while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
        const int status = pclose(pipe);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.err = moqc::test::read_file(err);
        return r;
    }

    fs::path dir_;
};

const std::string kTwoArm = moqc::test::model_path("two_arm.prism");

std::string switch_constants() {
    std::string out;
    for (const char* kind : {"et", "ex", "hw", "ttc", "ol"})
        for (int i = 1; i <= 4; ++i) out += " --const p" + std::to_string(i) + kind + "=0.3";
    return out;
}

} // namespace

TEST_F(Cli, CheckWritesReportSchedulerAndTrace) {
    write("q.json", R"({"objectives":["first","second"],"query":{"type":"convex",
        "loss":{"kind":"sq_dist_to_point","target":[0.7,0.7]},"lower":[0.2,0.2]}})");
    const auto r = run("check --model " + kTwoArm + " --query " + path("q.json") + " --workers 2 --epsilon 1e-7" +
                       " --export-scheduler " + path("s.json") + " --trace " + path("t.json") + " --out " +
                       path("r.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(moqc::test::read_file(path("r.json")));
    EXPECT_EQ(rep.at("version"), MOQC_VERSION);
    EXPECT_EQ(rep.at("model").at("hash").get<std::string>().size(), 16u);
    EXPECT_EQ(rep.at("solver").at("workers"), 2);
    EXPECT_EQ(rep.at("query").at("query").at("epsilon"), 1e-7);
    EXPECT_EQ(rep.at("preprocessing").at("states"), 2);
    EXPECT_EQ(rep.at("result").at("status"), "Optimal");
    EXPECT_NEAR(rep.at("result").at("value").get<double>(), 0.08, 1e-6);
    EXPECT_FALSE(json::parse(moqc::test::read_file(path("t.json"))).empty());

    // The exported mixture evaluates back to the reported point.
    write("e.json", R"({"objectives":["first","second"],"query":{"type":"evaluate","scheduler":"s.json"}})");
    const auto e = run("check --model " + kTwoArm + " --query " + path("e.json"));
    ASSERT_EQ(e.code, 0) << e.err;
    const json ev = json::parse(e.out);
    for (int i = 0; i < 2; ++i)
        EXPECT_NEAR(ev.at("result").at("point")[i].get<double>(), rep.at("result").at("point")[i].get<double>(), 1e-9);
}

TEST_F(Cli, NegativeAnswerExitsTwo) {
    write("q.json", R"({"objectives":["first","second"],"query":{"type":"achievability",
        "thresholds":[0.6,0.6],"directions":[">=",">="]}})");
    const auto r = run("check --model " + kTwoArm + " --query " + path("q.json"));
    EXPECT_EQ(r.code, 2) << r.err;
    EXPECT_EQ(json::parse(r.out).at("result").at("status"), "NotAchievable");
    write("c.json", R"({"objectives":["first","second"],"query":{"type":"convex",
        "loss":{"kind":"sq_dist_to_point","target":[0,0]},"lower":[0.6,0.6]}})");
    EXPECT_EQ(run("check --model " + kTwoArm + " --query " + path("c.json")).code, 2);
}

TEST_F(Cli, ErrorsExitOne) {
    const std::string sw = moqc::test::model_path("switch_four_configs.prism");
    write("q.json", R"({"objectives":["ctrl_cost"],"query":{"type":"optimize","objective":0,"sense":"min"}})");
    auto r = run("check --model " + sw + " --query " + path("q.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("MissingConstant"), std::string::npos);
    for (const char* name : {"p1et", "p4ex", "p2hw", "p3ttc", "p4ol"}) EXPECT_NE(r.err.find(name), std::string::npos);

    EXPECT_EQ(run("check --model " + path("nope.prism") + " --query " + path("q.json")).code, 1);
    EXPECT_EQ(run("check --model " + kTwoArm).code, 1);
    EXPECT_EQ(run("check --model " + kTwoArm + " --query " + path("q.json") + " --workers 0").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    r = run("stats --model " + sw + switch_constants() + " --const MAX_TS=20");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("ConstantRedefinition"), std::string::npos);
    EXPECT_EQ(run("--version").code, 0);
}

TEST_F(Cli, StatsWithOverride) {
    const auto r = run("stats --model " + moqc::test::model_path("switch_four_configs.prism") + switch_constants() +
                       " --override MAX_TS=3");
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(r.out);
    EXPECT_EQ(rep.at("overrides").at("MAX_TS"), 3);
    EXPECT_GT(rep.at("build").at("states").get<int>(), 0);
    EXPECT_EQ(rep.at("build").at("deadlock_states"), 0);
}

TEST_F(Cli, ConvertTaWithCounts) {
    write("counts.csv", "state,action,count\nsc,obs,80\nsc,tau,20\nss3,re_s,20\nss3,ex_s,80\n");
    const auto r = run("convert-ta --ta " + moqc::test::model_path("switch_base_ta.json") + " --counts " + path("counts.csv") +
                       " --out " + path("sw.prism") + " --report " + path("conv.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(moqc::test::read_file(path("conv.json")));
    EXPECT_EQ(rep.at("mdp_states"), 11);
    EXPECT_EQ(rep.at("fresh_states"), 3);
    EXPECT_EQ(rep.at("parameters")[0].at("value"), 0.8);
    EXPECT_EQ(rep.at("states")[0].at("kind"), "choice");
    const auto s = run("stats --model " + path("sw.prism"));
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(json::parse(s.out).at("build").at("states"), 11);

    EXPECT_EQ(run("convert-ta --ta " + moqc::test::model_path("switch_base_ta.json")).code, 1);
    write("bad.json", R"({"clocks":["x"],"automata":[{"name":"A","states":["u","v"],"init":"u","edges":[
        {"from":"u","guard":"x < 1","action":"a","to":"v"},{"from":"u","guard":"x < 2","action":"b","to":"v"}]}]})");
    const auto bad = run("convert-ta --ta " + path("bad.json"));
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("AssumptionViolated"), std::string::npos);
}

TEST_F(Cli, Sensitivity) {
    write("g.prism", "mdp\nconst double p;\nmodule G\n s:[0..2] init 0;\n"
                     " [go] s=0 -> p:(s'=1) + (1-p):(s'=2);\n [stop] s>0 -> true;\nendmodule\n"
                     "rewards \"w\"\n [go] true : p;\nendrewards\n");
    write("q.json", R"({"objectives":["w"],"query":{"type":"optimize","objective":"w"}})");
    const auto r = run("sensitivity --model " + path("g.prism") + " --query " + path("q.json") +
                       " --const p=0.5 --levels 0 --out " + path("s.csv"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(moqc::test::read_file(path("s.csv")), "level,parameter,sign,w,loss,status\n0,p,-,0.5,0.5,Optimal\n0,p,+,0.5,0.5,Optimal\n");
    EXPECT_EQ(run("sensitivity --model " + path("g.prism") + " --query " + path("q.json") + " --const p=0.5 --param q").code, 1);
}
