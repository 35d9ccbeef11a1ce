#include "doctest.h"
#include "rema/data.hpp"
#include "rema/errors.hpp"

#include <omp.h>

#include <sstream>
#include <string>

using namespace rema;

namespace {

std::string serialize(const Dataset& ds) {
    std::ostringstream out;
    write_dataset(out, ds);
    return out.str();
}

Dataset parse(const std::string& s) {
    std::istringstream in(s);
    return read_dataset(in);
}

ScenarioConfig small_cfg() {
    ScenarioConfig cfg;
    cfg.n_steps = 4;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("generate_dataset sizes and determinism") {
    ScenarioConfig cfg;
    cfg.seed = 42;
    const Dataset ds = generate_dataset(cfg, 10000, Role::train);
    CHECK(ds.episodes.size() == 10000);
    CHECK(ds.role == Role::train);

    const Dataset one_a = generate_dataset(cfg, 1, Role::train);
    const Dataset one_b = generate_dataset(cfg, 1, Role::train);
    CHECK(serialize(one_a) == serialize(one_b));
}

TEST_CASE("parallel generation equals the serial reference") {
    ScenarioConfig cfg;
    cfg.seed = 8;
    const Dataset serial = generate_dataset_serial(cfg, 777, Role::validation);
    for (int threads : {1, 3, 8}) {
        omp_set_num_threads(threads);
        CHECK(generate_dataset(cfg, 777, Role::validation) == serial);
    }
    omp_set_num_threads(1);
}

TEST_CASE("train and validation seeds give different episodes") {
    ScenarioConfig cfg;
    cfg.seed = 42;
    const Dataset train = generate_dataset(cfg, 100, Role::train);
    cfg.seed = 43;
    const Dataset val = generate_dataset(cfg, 100, Role::validation);
    int same_placements = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        const auto a = train.episodes[i].placements();
        const auto b = val.episodes[i].placements();
        if (std::equal(a.begin(), a.end(), b.begin(), b.end())) ++same_placements;
        CHECK_FALSE(train.episodes[i] == val.episodes[i]);
    }
    // 3 placements over 10 bands collide by chance a few times in 100.
    CHECK(same_placements < 10);
}

TEST_CASE("aggregate_matrix examples") {
    SUBCASE("forced detection") {
        Episode ep({1, 0, 5}, 3, std::vector<std::uint8_t>(9, 1));
        for (const auto& row : aggregate_matrix(ep, 10)) {
            for (std::size_t b = 0; b < 10; ++b) CHECK(row[b] == ((b == 0 || b == 1 || b == 5) ? 1 : 0));
        }
    }
    SUBCASE("all zero bits") {
        Episode ep({1, 0, 5}, 3, std::vector<std::uint8_t>(9, 0));
        for (const auto& row : aggregate_matrix(ep, 10))
            for (auto v : row) CHECK(v == 0);
    }
    SUBCASE("co-located signals OR together") {
        Episode ep({2, 2, 5}, 4, {1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1});
        const auto m = aggregate_matrix(ep, 10);
        for (int t = 0; t < 4; ++t) CHECK(m[t][2] == std::max(ep.bit(t, 0), ep.bit(t, 1)));
    }
}

TEST_CASE("aggregate_matrix properties on random episodes") {
    ScenarioConfig cfg;
    cfg.p_detect = 0.3;
    for (std::uint64_t i = 0; i < 300; ++i) {
        const Episode ep = sample_episode_at(cfg, i);
        const auto m = aggregate_matrix(ep, cfg.n_bands);
        long sum_m = 0;
        long sum_bits = 0;
        for (const auto& row : m)
            for (auto v : row) sum_m += v;
        for (auto b : ep.all_bits()) sum_bits += b;
        CHECK(sum_m <= sum_bits);

        for (int b = 0; b < cfg.n_bands; ++b) {
            bool column_zero = true;
            for (const auto& row : m) column_zero &= row[static_cast<std::size_t>(b)] == 0;
            bool expected_zero = true;
            for (int s = 0; s < ep.n_signals(); ++s)
                if (ep.placements()[static_cast<std::size_t>(s)] == b)
                    for (int t = 0; t < ep.n_steps(); ++t) expected_zero &= !ep.bit(t, s);
            CHECK(column_zero == expected_zero);
        }
    }
}

TEST_CASE("dataset file layout") {
    const Dataset ds = generate_dataset(small_cfg(), 2, Role::validation);
    const std::string text = serialize(ds);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "#REMA-DATASET v1");
    std::getline(in, line);
    CHECK(line == "config bands=10 receivers=2 signals=3 steps=4 p_detect=0.8 p_hot=0.5 hot=0,1,2 seed=5 role=validation");
    std::getline(in, line);
    CHECK(line == "episodes 2");
    std::getline(in, line);
    CHECK(line == "--- 0");
    std::getline(in, line);
    CHECK(line.rfind("placements ", 0) == 0);
    for (int t = 0; t < 4; ++t) {
        std::getline(in, line);
        CHECK(line.size() == 3);
        CHECK(line.find_first_not_of("01") == std::string::npos);
    }
}

TEST_CASE("dataset round-trip is the identity") {
    for (std::uint64_t seed : {1ULL, 2ULL, 18446744073709551615ULL}) {
        ScenarioConfig cfg;
        cfg.seed = seed;
        cfg.p_detect = 0.123456789;
        cfg.hot_bands = {4, 7};
        cfg.n_steps = 13;
        cfg.n_signals = 5;
        const Dataset ds = generate_dataset(cfg, seed == 1 ? 1 : 25, seed == 2 ? Role::validation : Role::train);
        const std::string first = serialize(ds);
        const Dataset back = parse(first);
        CHECK(back == ds);
        CHECK(serialize(back) == first);
    }
}

TEST_CASE("dataset parse errors name the line") {
    const std::string good = serialize(generate_dataset(small_cfg(), 2, Role::train));

    auto expect_error_at = [](const std::string& text, std::size_t line) {
        try {
            parse(text);
            FAIL("no parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
            CHECK(std::string(e.what()).rfind("line " + std::to_string(line) + ":", 0) == 0);
        }
    };

    SUBCASE("bad magic") { expect_error_at("#REMA-DATASET v2\n" + good.substr(good.find('\n') + 1), 1); }
    SUBCASE("non-binary character") {
        std::string bad = good;
        const auto pos = bad.find("--- 0");
        const auto row = bad.find('\n', bad.find('\n', pos) + 1) + 1;  // first bit row of episode 0
        bad[row] = '2';
        expect_error_at(bad, 6);
    }
    SUBCASE("missing bit row") {
        std::string bad = good;
        const auto pos = bad.find("--- 1");
        const auto prev_row_start = bad.rfind('\n', pos - 2) + 1;
        bad.erase(prev_row_start, pos - prev_row_start);
        expect_error_at(bad, 9);
    }
    SUBCASE("wrong placement count") {
        std::string bad = good;
        const auto pos = bad.find("placements ");
        bad.insert(bad.find('\n', pos), " 3");
        expect_error_at(bad, 5);
    }
    SUBCASE("header count larger than body") {
        std::string bad = good;
        bad.replace(bad.find("episodes 2"), 10, "episodes 3");
        expect_error_at(bad, 16);
    }
    SUBCASE("bad config field") {
        std::string bad = good;
        bad.replace(bad.find("p_detect=0.8"), 12, "p_detect=1.8");
        expect_error_at(bad, 2);
    }
}

TEST_CASE("full-size episode with 99 bit rows is rejected") {
    ScenarioConfig cfg;
    std::string text = serialize(generate_dataset(cfg, 1, Role::train));
    text.erase(text.rfind('\n', text.size() - 2) + 1);  // drop the last bit row
    CHECK_THROWS_AS(parse(text), ParseError);
}

TEST_CASE("aggregate export view") {
    const Dataset ds = generate_dataset(small_cfg(), 2, Role::train);
    std::ostringstream out;
    write_aggregate(out, ds);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("---", 0) == 0) continue;
        CHECK(line.size() == 10);
        ++rows;
    }
    CHECK(rows == 8);
}
