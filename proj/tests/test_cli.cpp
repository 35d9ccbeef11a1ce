#include "doctest.h"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "rema/agents.hpp"
#include "rema/data.hpp"
#include "rema/exp.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "rema");
    std::ostringstream out;
    std::ostringstream err;
    const int code = rema::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("rema_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("cli end to end on a small scenario") {
    TempDir dir;
    const auto train_ds = dir / "train.ds";
    const auto val_ds = dir / "val.ds";

    auto r = run({"gen", "--episodes", "40", "--seed", "42", "--role", "train", "--out", train_ds});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("40 train episodes (seed 42)") != std::string::npos);
    CHECK(rema::load_dataset(train_ds).episodes.size() == 40);

    SUBCASE("gen is deterministic") {
        REQUIRE(run({"gen", "--episodes", "40", "--seed", "42", "--role", "train", "--out", dir / "again.ds"}).code == 0);
        CHECK(slurp(train_ds) == slurp(dir / "again.ds"));
    }

    REQUIRE(run({"gen", "--episodes", "30", "--seed", "43", "--role", "validation", "--out", val_ds}).code == 0);

    SUBCASE("train base and memory tables") {
        r = run({"train", "--data", train_ds, "--agent", "q", "--epsilon", "0.2", "--out", dir / "q.qt"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("checksum ") != std::string::npos);
        CHECK(rema::load_qtable(dir / "q.qt").n_states() == 400);

        r = run({"train", "--data", train_ds, "--agent", "qmem", "--out", dir / "qmem.qt"});
        REQUIRE(r.code == 0);
        CHECK(rema::load_qtable(dir / "qmem.qt").n_states() == 14400);

        // evaluating a base table as qmem is a configuration error
        r = run({"eval", "--data", val_ds, "--agent", "qmem", "--qtable", dir / "q.qt", "--out", dir / "m.csv"});
        CHECK(r.code == 1);
        CHECK(r.err.find("configuration error") != std::string::npos);
        CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

        r = run({"eval", "--data", val_ds, "--agent", "q", "--qtable", dir / "q.qt", "--epsilon", "0.2", "--out",
                 dir / "q.csv", "--summary", dir / "q_summary.csv", "--trace-episode", "3", "--trace-out",
                 dir / "q_trace.csv"});
        REQUIRE(r.code == 0);
        std::ifstream m(dir / "q.csv");
        CHECK(rema::read_metrics_csv(m).size() == 30);
        CHECK(slurp(dir / "q_summary.csv").rfind("agent,mean_dr,std_dr,", 0) == 0);
        CHECK(slurp(dir / "q_trace.csv").rfind("step,receiver_0,receiver_1\n0,", 0) == 0);

        r = run({"report", "--metrics", "q=" + (dir / "q.csv"), "--trace", "q=" + (dir / "q_trace.csv"), "--out-dir",
                 dir / "report"});
        REQUIRE(r.code == 0);
        for (const char* f : {"detections.svg", "visits.svg", "summary.csv", "report.txt", "trace_q.svg"})
            CHECK(fs::exists(dir.path / "report" / f));
    }

    SUBCASE("alpha 0 leaves the initial table") {
        REQUIRE(run({"train", "--data", train_ds, "--agent", "q", "--alpha", "0", "--init-seed", "9", "--out",
                     dir / "frozen.qt"})
                    .code == 0);
        const auto fresh = rema::init_qtable(rema::ScenarioConfig{}, rema::Variant::base, 9);
        CHECK(rema::load_qtable(dir / "frozen.qt").same_values(fresh));
    }

    SUBCASE("heuristic evaluation") {
        r = run({"eval", "--data", val_ds, "--agent", "heuristic", "--out", dir / "h.csv", "--summary",
                 dir / "h_summary.csv"});
        REQUIRE(r.code == 0);
        const std::string summary = slurp(dir / "h_summary.csv");
        CHECK(summary.find("heuristic,") != std::string::npos);
        CHECK(summary.find(",20,20,20,20,20,20,20,20,20,20,0,0,0,0,0,0,0,0,0,0\n") != std::string::npos);
    }

    SUBCASE("config file with command-line override") {
        std::ofstream(dir / "run.cfg") << "# scenario\nepisodes=5\nseed=7\nrole=validation\np_detect = 0.5\n";
        r = run({"gen", "--config", dir / "run.cfg", "--seed", "8", "--out", dir / "cfg.ds"});
        REQUIRE(r.code == 0);
        const auto ds = rema::load_dataset(dir / "cfg.ds");
        CHECK(ds.episodes.size() == 5);
        CHECK(ds.cfg.seed == 8);
        CHECK(ds.cfg.p_detect == 0.5);
        CHECK(ds.role == rema::Role::validation);

        std::ofstream(dir / "bad.cfg") << "episodes=5\nwarp=9\n";
        r = run({"gen", "--config", dir / "bad.cfg", "--out", dir / "x.ds"});
        CHECK(r.code == 2);
        CHECK(r.err.find("unknown key 'warp'") != std::string::npos);
    }

    SUBCASE("export aggregate") {
        REQUIRE(run({"export-aggregate", "--data", val_ds, "--out", dir / "agg.txt"}).code == 0);
        CHECK(slurp(dir / "agg.txt").rfind("--- 0\n", 0) == 0);
    }
}

TEST_CASE("cli usage and validation errors") {
    TempDir dir;
    auto r = run({"gen", "--episodes", "0", "--out", dir / "x.ds"});
    CHECK(r.code == 2);
    CHECK(r.err.find("usage error") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path / "x.ds"));

    r = run({"gen", "--p-detect", "1.5", "--out", dir / "x.ds"});
    CHECK(r.code == 1);
    CHECK_FALSE(fs::exists(dir.path / "x.ds"));

    r = run({"report", "--out-dir", dir / "rep"});
    CHECK(r.code == 2);

    r = run({"train", "--data", dir / "missing.ds", "--out", dir / "q.qt"});
    CHECK(r.code == 1);
    CHECK(r.err.find("cannot open") != std::string::npos);

    r = run({"frobnicate"});
    CHECK(r.code == 2);

    r = run({"eval", "--data", dir / "x.ds", "--agent", "q", "--out", dir / "m.csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--qtable") != std::string::npos);
}
