#include "rema/exp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "rema/errors.hpp"
#include "rema/text.hpp"

namespace rema {

std::string_view to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::heuristic: return "heuristic";
        case AgentKind::q: return "q";
        case AgentKind::qmem: return "qmem";
    }
    return "?";
}

AgentKind parse_agent_kind(std::string_view s) {
    if (s == "heuristic") return AgentKind::heuristic;
    if (s == "q") return AgentKind::q;
    if (s == "qmem") return AgentKind::qmem;
    throw ConfigError("unknown agent '" + std::string(s) + "' (expected heuristic, q or qmem)");
}

Variant variant_of(AgentKind kind) {
    return kind == AgentKind::qmem ? Variant::memory : Variant::base;
}

void check_agent(const Agent& agent, const ScenarioConfig& cfg, const RewardParams& params) {
    if (agent.kind == AgentKind::heuristic) return;
    if (agent.table == nullptr) throw ConfigError("agent '" + std::string(to_string(agent.kind)) + "' needs a Q-table");
    const Variant want = variant_of(agent.kind);
    if (agent.table->variant() != want)
        throw ConfigError("agent '" + std::string(to_string(agent.kind)) + "' needs a " + std::string(to_string(want)) +
                          " table, got " + std::string(to_string(agent.table->variant())));
    const StateSpace space(cfg, want, params.x_cap);
    if (agent.table->n_states() != space.size() || agent.table->n_actions() != action_count(cfg))
        throw ConfigError("Q-table shape " + std::to_string(agent.table->n_states()) + "x" +
                          std::to_string(agent.table->n_actions()) + " does not match scenario (" +
                          std::to_string(space.size()) + "x" + std::to_string(action_count(cfg)) + ")");
}

std::vector<Action> receiver_placements(const ScenarioConfig& cfg) {
    std::vector<Action> out;
    std::vector<Band> current(static_cast<std::size_t>(cfg.n_receivers), 0);
    for (;;) {
        out.push_back(Action{current});
        // next non-decreasing tuple
        int r = cfg.n_receivers - 1;
        while (r >= 0 && current[static_cast<std::size_t>(r)] == cfg.n_bands - 1) --r;
        if (r < 0) return out;
        const Band v = current[static_cast<std::size_t>(r)] + 1;
        for (auto i = static_cast<std::size_t>(r); i < current.size(); ++i) current[i] = v;
    }
}

namespace {

// Exhaustive over the receiver placements; per-band counts of active signals
// are built once per step so each candidate only sums a few entries.
int best_cover(const Episode& episode, int step, const std::vector<Action>& placements,
               std::vector<int>& per_band) {
    const auto bits = episode.bits_at(step);
    const auto signal_bands = episode.placements();
    std::fill(per_band.begin(), per_band.end(), 0);
    int active = 0;
    for (std::size_t s = 0; s < bits.size(); ++s)
        if (bits[s]) {
            ++per_band[static_cast<std::size_t>(signal_bands[s])];
            ++active;
        }
    int best = 0;
    for (const auto& a : placements) {
        if (best == active) break;  // no placement can do better
        int covered = 0;
        for (std::size_t i = 0; i < a.positions.size(); ++i) {
            const Band b = a.positions[i];
            if (std::find(a.positions.begin(), a.positions.begin() + static_cast<std::ptrdiff_t>(i), b) ==
                a.positions.begin() + static_cast<std::ptrdiff_t>(i))
                covered += per_band[static_cast<std::size_t>(b)];
        }
        best = std::max(best, covered);
    }
    return best;
}

template <bool Learn>
EpisodeMetrics rollout(AgentKind kind, const QTable* table, QTable* learn_table, const Episode& episode,
                       const ScenarioConfig& cfg, const RewardParams& params, Rng& rng,
                       const std::vector<Action>& placements, std::vector<Action>* trace) {
    const Variant variant = variant_of(kind);
    std::optional<StateSpace> space;
    if (kind != AgentKind::heuristic) space.emplace(cfg, variant, params.x_cap);

    EpisodeMetrics m;
    m.visits.assign(static_cast<std::size_t>(cfg.n_bands), 0);
    if (trace) trace->clear();

    std::vector<int> per_band(static_cast<std::size_t>(cfg.n_bands));
    AgentState state = initial_state(cfg);
    for (int t = 0; t < episode.n_steps(); ++t) {
        Action action;
        std::size_t s = 0;
        std::size_t a = 0;
        if (kind == AgentKind::heuristic) {
            action = heuristic_action(t, cfg);
        } else {
            s = space->encode(state);
            a = select_action(*table, s, params.epsilon, rng);
            action = decode_action(a, cfg);
        }

        const Feedback fb = observe(episode, t, action);
        m.detections += count_detected_signals(episode, t, action);
        m.detectable += best_cover(episode, t, placements, per_band);
        for (Band p : action.positions) ++m.visits[static_cast<std::size_t>(p)];

        std::vector<int> streaks = update_streaks(state, action, fb);
        AgentState next{action.positions, fb.detections, streaks};
        for (int& v : next.streaks) v = std::min(v, params.x_cap);

        if constexpr (Learn) {
            const double r = compute_reward(state, action, fb, streaks, params, variant);
            q_update(*learn_table, s, a, r, space->encode(next), params);
        }
        if (trace) trace->push_back(std::move(action));
        state = std::move(next);
    }
    return m;
}

}  // namespace

int oracle_detectable(const Episode& episode, int step, const ScenarioConfig& cfg) {
    std::vector<int> per_band(static_cast<std::size_t>(cfg.n_bands));
    return best_cover(episode, step, receiver_placements(cfg), per_band);
}

EpisodeMetrics run_episode(const Agent& agent, const Episode& episode, const ScenarioConfig& cfg,
                           const RewardParams& params, Rng& rng, std::vector<Action>* trace) {
    check_agent(agent, cfg, params);
    return rollout<false>(agent.kind, agent.table, nullptr, episode, cfg, params, rng, receiver_placements(cfg), trace);
}

EpisodeMetrics train_episode(QTable& table, const Episode& episode, const ScenarioConfig& cfg,
                             const RewardParams& params, Rng& rng) {
    const AgentKind kind = table.variant() == Variant::memory ? AgentKind::qmem : AgentKind::q;
    check_agent(Agent::learned(kind, table), cfg, params);
    return rollout<true>(kind, &table, &table, episode, cfg, params, rng, receiver_placements(cfg), nullptr);
}

void train(QTable& table, const Dataset& dataset, const RewardParams& params, Rng& rng, int passes) {
    params.validate();
    if (passes < 0) throw ConfigError("passes must not be negative");
    const AgentKind kind = table.variant() == Variant::memory ? AgentKind::qmem : AgentKind::q;
    check_agent(Agent::learned(kind, table), dataset.cfg, params);
    const auto placements = receiver_placements(dataset.cfg);
    for (int pass = 0; pass < passes; ++pass)
        for (const Episode& ep : dataset.episodes)
            rollout<true>(kind, &table, &table, ep, dataset.cfg, params, rng, placements, nullptr);
}

std::vector<EpisodeMetrics> evaluate(const Agent& agent, const Dataset& dataset, const RewardParams& params,
                                     std::uint64_t eval_seed) {
    params.validate();
    check_agent(agent, dataset.cfg, params);
    const auto placements = receiver_placements(dataset.cfg);
    std::vector<EpisodeMetrics> out(dataset.episodes.size());
    const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        Rng rng = Rng::substream(eval_seed, idx);
        out[idx] = rollout<false>(agent.kind, agent.table, nullptr, dataset.episodes[idx], dataset.cfg, params, rng,
                                  placements, nullptr);
        out[idx].episode_id = idx;
    }
    return out;
}

std::vector<EpisodeMetrics> evaluate_serial(const Agent& agent, const Dataset& dataset, const RewardParams& params,
                                            std::uint64_t eval_seed) {
    params.validate();
    check_agent(agent, dataset.cfg, params);
    const auto placements = receiver_placements(dataset.cfg);
    std::vector<EpisodeMetrics> out;
    out.reserve(dataset.episodes.size());
    for (std::size_t i = 0; i < dataset.episodes.size(); ++i) {
        Rng rng = Rng::substream(eval_seed, i);
        out.push_back(rollout<false>(agent.kind, agent.table, nullptr, dataset.episodes[i], dataset.cfg, params, rng,
                                     placements, nullptr));
        out.back().episode_id = i;
    }
    return out;
}

std::vector<Action> trace_episode(const Agent& agent, const Dataset& dataset, const RewardParams& params,
                                  std::uint64_t eval_seed, std::size_t index) {
    if (index >= dataset.episodes.size())
        throw std::out_of_range("episode " + std::to_string(index) + " not in dataset of " +
                                std::to_string(dataset.episodes.size()));
    Rng rng = Rng::substream(eval_seed, index);
    std::vector<Action> trace;
    run_episode(agent, dataset.episodes[index], dataset.cfg, params, rng, &trace);
    return trace;
}

std::optional<double> detection_rate(long detections, long detectable) {
    if (detectable <= 0) return std::nullopt;
    return static_cast<double>(detections) / static_cast<double>(detectable);
}

std::optional<double> detection_rate(const EpisodeMetrics& m) {
    return detection_rate(m.detections, m.detectable);
}

namespace {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd population_stats(const std::vector<double>& xs) {
    if (xs.empty()) return {std::nan(""), std::nan("")};
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

}  // namespace

RunSummary summarize(const std::vector<EpisodeMetrics>& metrics, std::string agent_label) {
    if (metrics.empty()) throw std::invalid_argument("cannot summarize an empty metrics list");
    RunSummary out;
    out.agent_label = std::move(agent_label);
    out.n_episodes = metrics.size();

    std::vector<double> drs;
    std::vector<double> det;
    std::vector<double> dtb;
    for (const auto& m : metrics) {
        if (auto dr = detection_rate(m))
            drs.push_back(*dr);
        else
            ++out.n_undefined;
        det.push_back(static_cast<double>(m.detections));
        dtb.push_back(static_cast<double>(m.detectable));
    }
    const auto dr_stats = population_stats(drs);
    out.mean_dr = dr_stats.mean;
    out.std_dr = dr_stats.std;
    out.mean_detections = population_stats(det).mean;
    out.mean_detectable = population_stats(dtb).mean;

    const std::size_t n_bands = metrics.front().visits.size();
    std::vector<double> column(metrics.size());
    for (std::size_t b = 0; b < n_bands; ++b) {
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            if (metrics[i].visits.size() != n_bands) throw std::invalid_argument("metrics disagree on band count");
            column[i] = static_cast<double>(metrics[i].visits[b]);
        }
        const auto st = population_stats(column);
        out.mean_visits.push_back(st.mean);
        out.std_visits.push_back(st.std);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& metrics, int n_bands) {
    out << "episode_id,detections,detectable,dr";
    for (int b = 0; b < n_bands; ++b) out << ",visits_" << b;
    out << '\n';
    for (const auto& m : metrics) {
        const auto dr = detection_rate(m);
        out << m.episode_id << ',' << m.detections << ',' << m.detectable << ',' << (dr ? text::shortest(*dr) : "nan");
        for (long v : m.visits) out << ',' << v;
        out << '\n';
    }
}

std::vector<EpisodeMetrics> read_metrics_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "empty metrics file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = text::split(line, ',');
    if (header.size() < 5 || header[0] != "episode_id" || header[1] != "detections" || header[2] != "detectable" ||
        header[3] != "dr")
        throw ParseError(line_no, "expected header 'episode_id,detections,detectable,dr,visits_0,...'");
    const std::size_t n_bands = header.size() - 4;
    for (std::size_t b = 0; b < n_bands; ++b)
        if (header[4 + b] != "visits_" + std::to_string(b)) throw ParseError(line_no, "bad visits column name");

    std::vector<EpisodeMetrics> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = text::split(line, ',');
        if (cells.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " columns, got " +
                                          std::to_string(cells.size()));
        EpisodeMetrics m;
        auto num = [&](std::string_view c) {
            auto v = text::parse_int(c);
            if (!v || *v < 0) throw ParseError(line_no, "bad count '" + std::string(c) + "'");
            return static_cast<long>(*v);
        };
        m.episode_id = static_cast<std::size_t>(num(cells[0]));
        m.detections = num(cells[1]);
        m.detectable = num(cells[2]);
        if (m.detections > m.detectable) throw ParseError(line_no, "detections exceed detectable");
        for (std::size_t b = 0; b < n_bands; ++b) m.visits.push_back(num(cells[4 + b]));
        out.push_back(std::move(m));
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& summaries) {
    const std::size_t n_bands = summaries.empty() ? 0 : summaries.front().mean_visits.size();
    out << "agent,mean_dr,std_dr";
    for (std::size_t b = 0; b < n_bands; ++b) out << ",mean_visits_" << b;
    for (std::size_t b = 0; b < n_bands; ++b) out << ",std_visits_" << b;
    out << '\n';
    for (const auto& s : summaries) {
        out << s.agent_label << ',' << text::shortest(s.mean_dr) << ',' << text::shortest(s.std_dr);
        for (double v : s.mean_visits) out << ',' << text::shortest(v);
        for (double v : s.std_visits) out << ',' << text::shortest(v);
        out << '\n';
    }
}

void write_trace_csv(std::ostream& out, const std::vector<Action>& trace) {
    const std::size_t R = trace.empty() ? 0 : trace.front().positions.size();
    out << "step";
    for (std::size_t r = 0; r < R; ++r) out << ",receiver_" << r;
    out << '\n';
    for (std::size_t t = 0; t < trace.size(); ++t) {
        out << t;
        for (Band p : trace[t].positions) out << ',' << p;
        out << '\n';
    }
}

std::vector<Action> read_trace_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError(1, "empty trace file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = text::split(line, ',');
    if (header.size() < 2 || header[0] != "step") throw ParseError(1, "expected header 'step,receiver_0,...'");
    std::vector<Action> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = text::split(line, ',');
        if (cells.size() != header.size()) throw ParseError(line_no, "wrong column count");
        if (text::parse_int(cells[0]) != static_cast<std::int64_t>(out.size()))
            throw ParseError(line_no, "steps must be consecutive from 0");
        Action a;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            auto v = text::parse_int(cells[c]);
            if (!v || *v < 0) throw ParseError(line_no, "bad position '" + std::string(cells[c]) + "'");
            a.positions.push_back(static_cast<Band>(*v));
        }
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace rema
