#include "doctest.h"
#include "rema/agents.hpp"
#include "rema/errors.hpp"

#include <array>
#include <cmath>
#include <set>
#include <sstream>

using namespace rema;

namespace {

AgentState state_of(std::vector<Band> p, std::vector<std::uint8_t> d, std::vector<int> m = {0, 0}) {
    return AgentState{std::move(p), std::move(d), std::move(m)};
}

Feedback fb(std::vector<std::uint8_t> d) { return Feedback{std::move(d)}; }

}  // namespace

TEST_CASE("heuristic schedule") {
    const ScenarioConfig cfg;
    CHECK(heuristic_action(0, cfg).positions == std::vector<Band>{0, 1});
    CHECK(heuristic_action(1, cfg).positions == std::vector<Band>{2, 3});
    CHECK(heuristic_action(4, cfg).positions == std::vector<Band>{8, 9});
    CHECK(heuristic_action(5, cfg).positions == std::vector<Band>{0, 1});
    CHECK(heuristic_action(99, cfg).positions == std::vector<Band>{8, 9});

    std::array<int, 10> visits{};
    for (int t = 0; t < 100; ++t)
        for (Band b : heuristic_action(t, cfg).positions) ++visits[static_cast<std::size_t>(b)];
    for (int v : visits) CHECK(v == 20);
}

TEST_CASE("heuristic covers every band when bands are not a multiple of receivers") {
    ScenarioConfig cfg;
    cfg.n_bands = 7;
    cfg.hot_bands = {0};
    std::set<Band> seen;
    for (int t = 0; t < 4; ++t)
        for (Band b : heuristic_action(t, cfg).positions) seen.insert(b);
    CHECK(seen.size() == 7);
}

TEST_CASE("state encoding examples") {
    const ScenarioConfig cfg;
    CHECK(encode_state(state_of({0, 0}, {0, 0}), cfg, Variant::base) == 0);
    CHECK(encode_state(state_of({9, 9}, {1, 1}), cfg, Variant::base) == 399);
    CHECK(encode_state(state_of({9, 9}, {1, 1}, {5, 5}), cfg, Variant::memory) == 14399);
    // digit order p0, p1, d0, d1
    CHECK(encode_state(state_of({1, 0}, {0, 0}), cfg, Variant::base) == 40);
    CHECK(encode_state(state_of({0, 1}, {0, 0}), cfg, Variant::base) == 4);
    CHECK(encode_state(state_of({0, 0}, {1, 0}), cfg, Variant::base) == 2);
    CHECK(encode_state(state_of({0, 0}, {0, 0}, {0, 1}), cfg, Variant::memory) == 1);
    CHECK(encode_state(state_of({0, 0}, {0, 0}, {1, 0}), cfg, Variant::memory) == 6);
}

TEST_CASE("state encoding is a bijection on the full range") {
    const ScenarioConfig cfg;
    for (Variant v : {Variant::base, Variant::memory}) {
        const StateSpace space(cfg, v, 5);
        CHECK(space.size() == (v == Variant::base ? 400u : 14400u));
        for (std::size_t i = 0; i < space.size(); ++i) {
            const AgentState s = space.decode(i);
            REQUIRE(space.encode(s) == i);
            for (int m : s.streaks) REQUIRE(m <= 5);
        }
        CHECK_THROWS_AS(space.decode(space.size()), std::out_of_range);
    }
}

TEST_CASE("decode(encode(s)) == s for random states") {
    const ScenarioConfig cfg;
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        AgentState s = state_of({static_cast<Band>(rng.uniform_int(10)), static_cast<Band>(rng.uniform_int(10))},
                                {static_cast<std::uint8_t>(rng.uniform_int(2)), static_cast<std::uint8_t>(rng.uniform_int(2))},
                                {static_cast<int>(rng.uniform_int(6)), static_cast<int>(rng.uniform_int(6))});
        CHECK(decode_state(encode_state(s, cfg, Variant::memory), cfg, Variant::memory) == s);
        const AgentState b = decode_state(encode_state(s, cfg, Variant::base), cfg, Variant::base);
        CHECK(b.positions == s.positions);
        CHECK(b.last_detections == s.last_detections);
    }
}

TEST_CASE("action indexing") {
    const ScenarioConfig cfg;
    CHECK(action_count(cfg) == 100);
    CHECK(encode_action(Action{{3, 7}}, cfg) == 37);
    CHECK(decode_action(37, cfg).positions == std::vector<Band>{3, 7});
    for (std::size_t a = 0; a < 100; ++a) CHECK(encode_action(decode_action(a, cfg), cfg) == a);
    CHECK_THROWS_AS(decode_action(100, cfg), std::out_of_range);
}

TEST_CASE("init_qtable") {
    const ScenarioConfig cfg;
    const QTable a = init_qtable(cfg, Variant::base, 123);
    const QTable b = init_qtable(cfg, Variant::base, 123);
    CHECK(a.n_states() == 400);
    CHECK(a.n_actions() == 100);
    CHECK(a.same_values(b));
    CHECK_FALSE(a.same_values(init_qtable(cfg, Variant::base, 124)));

    double sum = 0.0;
    for (double v : a.values()) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        sum += v;
    }
    const double mean = sum / static_cast<double>(a.values().size());
    CHECK(a.values().size() == 40000);
    CHECK(mean >= 0.49);
    CHECK(mean <= 0.51);

    const QTable m = init_qtable(cfg, Variant::memory, 1);
    CHECK(m.n_states() == 14400);
    CHECK(m.n_actions() == 100);
}

TEST_CASE("select_action") {
    const ScenarioConfig cfg;
    QTable t(Variant::base, 4, 100);
    t.at(0, 37) = 1.0;
    Rng rng(8);
    for (int i = 0; i < 200; ++i) CHECK(select_action(t, 0, 0.0, rng) == 37);
    // flat row: lowest index wins
    for (int i = 0; i < 50; ++i) CHECK(select_action(t, 1, 0.0, rng) == 0);

    std::array<long, 100> counts{};
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) ++counts[select_action(t, 0, 1.0, rng)];
    for (long c : counts) {
        const double f = static_cast<double>(c) / kDraws;
        CHECK(f >= 0.008);
        CHECK(f <= 0.012);
    }
}

TEST_CASE("greedy choice is invariant under order-preserving transforms") {
    Rng rng(90);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> row(100);
        for (double& v : row) v = std::floor(rng.uniform01() * 20.0);  // ties are common
        std::vector<double> transformed(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) transformed[i] = std::exp(row[i] / 3.0) * 7.0 - 2.0;
        CHECK(greedy_action(row) == greedy_action(transformed));
    }
}

TEST_CASE("update_streaks rules") {
    const AgentState prev = state_of({2, 6}, {1, 1}, {2, 4});
    CHECK(update_streaks(prev, Action{{2, 7}}, fb({1, 1})) == std::vector<int>{3, 1});
    const AgentState at5 = state_of({2, 6}, {1, 1}, {5, 5});
    CHECK(update_streaks(at5, Action{{2, 6}}, fb({0, 1})) == std::vector<int>{0, 6});
}

TEST_CASE("compute_reward examples") {
    const RewardParams p;
    const AgentState prev = state_of({0, 1}, {0, 0});

    // same position, nothing detected
    CHECK(compute_reward(prev, Action{{3, 3}}, fb({0, 0}), std::vector<int>{0, 0}, p, Variant::base) == -6.0);

    // receiver 0 on its 3rd consecutive detection
    const AgentState dwelling = state_of({4, 1}, {1, 0}, {2, 0});
    const Action act{{4, 6}};
    const Feedback f = fb({1, 0});
    const auto streaks = update_streaks(dwelling, act, f);
    CHECK(streaks == std::vector<int>{3, 0});
    CHECK(compute_reward(dwelling, act, f, streaks, p, Variant::base) == 3.0);

    // swap
    CHECK(compute_reward(state_of({4, 6}, {0, 0}), Action{{6, 4}}, fb({0, 0}), std::vector<int>{0, 0}, p, Variant::base) ==
          -3.0);
}

TEST_CASE("overstay penalty fires only beyond x_cap consecutive detections") {
    const RewardParams p;
    for (int prior = 0; prior <= 5; ++prior) {
        const AgentState prev = state_of({2, 8}, {1, 0}, {prior, 0});
        const Action act{{2, 5}};
        const Feedback f = fb({1, 0});
        const auto after = update_streaks(prev, act, f);
        CHECK(after[0] == prior + 1);
        const double base = compute_reward(prev, act, f, after, p, Variant::base);
        const double mem = compute_reward(prev, act, f, after, p, Variant::memory);
        CAPTURE(prior);
        if (prior + 1 > 5)
            CHECK(mem - base == p.penalty_overstay);
        else
            CHECK(mem == base);
        CHECK(base == p.bonus_detect * std::min(prior + 1, 5));
    }
}

TEST_CASE("compute_reward is additive over its conditions") {
    const RewardParams p;
    Rng rng(55);
    const ScenarioConfig cfg;
    for (int i = 0; i < 2000; ++i) {
        const AgentState prev = decode_state(rng.uniform_int(14400), cfg, Variant::memory);
        const Action act = decode_action(rng.uniform_int(100), cfg);
        const Feedback f = fb({static_cast<std::uint8_t>(rng.uniform_int(2)), static_cast<std::uint8_t>(rng.uniform_int(2))});
        const auto after = update_streaks(prev, act, f);

        double expected = 0.0;
        if (act.positions[0] == act.positions[1]) expected += p.penalty_same;
        if (act.positions[0] != act.positions[1] && act.positions[0] == prev.positions[1] &&
            act.positions[1] == prev.positions[0])
            expected += p.penalty_swap;
        if (!f.detections[0] && !f.detections[1]) expected += p.penalty_no_detect;
        for (int r = 0; r < 2; ++r) {
            if (!f.detections[static_cast<std::size_t>(r)]) continue;
            expected += p.bonus_detect * std::min(after[static_cast<std::size_t>(r)], 5);
            if (after[static_cast<std::size_t>(r)] > 5) expected += p.penalty_overstay;
        }
        CHECK(compute_reward(prev, act, f, after, p, Variant::memory) == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("q_update arithmetic") {
    RewardParams p;
    QTable t(Variant::base, 2, 3);
    t.at(0, 1) = 0.5;
    t.at(1, 0) = 0.7;
    t.at(1, 2) = 0.1;
    CHECK(std::abs(q_update(t, 0, 1, 1.0, 1, p) - 0.613) < 1e-12);
    CHECK(t.at(0, 0) == 0.0);
    CHECK(t.at(1, 0) == 0.7);

    p.alpha = 0.0;
    const double before = t.at(0, 1);
    CHECK(q_update(t, 0, 1, 5.0, 1, p) == before);

    p.alpha = 1.0;
    QTable z(Variant::base, 2, 3);
    CHECK(q_update(z, 0, 2, 2.5, 1, p) == 2.5);
}

TEST_CASE("q_update converges to its fixed point") {
    const RewardParams p;
    QTable t(Variant::base, 2, 2);
    t.at(1, 0) = 0.4;
    t.at(1, 1) = 1.7;
    for (int i = 0; i < 2000; ++i) q_update(t, 0, 0, -0.3, 1, p);
    CHECK(std::abs(t.at(0, 0) - (-0.3 + 0.9 * 1.7)) < 1e-9);
}

TEST_CASE("reward params validation") {
    RewardParams p;
    CHECK_NOTHROW(p.validate());
    SUBCASE("gamma") { p.gamma = 1.0; }
    SUBCASE("epsilon") { p.epsilon = -0.1; }
    SUBCASE("alpha") { p.alpha = 1.5; }
    SUBCASE("x_cap") { p.x_cap = 0; }
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("qtable persistence") {
    const ScenarioConfig cfg;
    const QTable t = init_qtable(cfg, Variant::base, 9);
    std::ostringstream out;
    write_qtable(out, t);
    const std::string text = out.str();
    CHECK(text.rfind("#REMA-QTABLE v1\nvariant base\nstates 400 actions 100\n", 0) == 0);

    std::istringstream in(text);
    const QTable back = read_qtable(in);
    CHECK(back.same_values(t));
    CHECK(qtable_checksum(back) == qtable_checksum(t));

    SUBCASE("awkward values survive") {
        QTable odd(Variant::memory, 1, 4);
        odd.at(0, 0) = 0.1;
        odd.at(0, 1) = -1e-300;
        odd.at(0, 2) = 12345678.901234567;
        odd.at(0, 3) = 1.0 / 3.0;
        std::ostringstream o;
        write_qtable(o, odd);
        std::istringstream i(o.str());
        CHECK(read_qtable(i).same_values(odd));
    }
    SUBCASE("short row") {
        std::string bad = text;
        bad.erase(bad.rfind(' '), bad.size() - bad.rfind(' ') - 1);
        std::istringstream i(bad);
        CHECK_THROWS_AS(read_qtable(i), ParseError);
    }
    SUBCASE("unknown variant") {
        std::string bad = text;
        bad.replace(bad.find("base"), 4, "deep");
        std::istringstream i(bad);
        CHECK_THROWS_AS(read_qtable(i), ParseError);
    }
}
