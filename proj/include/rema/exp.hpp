#pragma once

// Training and evaluation loops, detection-rate metrics and their
// aggregation across episodes.
//
// Evaluation fans out over episodes with OpenMP; each episode draws its
// exploration from substream i of the evaluation seed, so the parallel
// and serial paths (evaluate / evaluate_serial) return identical results
// for any thread count. Training mutates one table and stays sequential.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rema/agents.hpp"
#include "rema/data.hpp"
#include "rema/env.hpp"

namespace rema {

enum class AgentKind { heuristic, q, qmem };

std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view s);
Variant variant_of(AgentKind kind);

struct Agent {
    AgentKind kind = AgentKind::heuristic;
    const QTable* table = nullptr;  // required for q and qmem

    static Agent heuristic() { return {}; }
    static Agent learned(AgentKind kind, const QTable& table) { return {kind, &table}; }
};

/// Throws ConfigError if the agent's table is missing or does not fit cfg.
void check_agent(const Agent& agent, const ScenarioConfig& cfg, const RewardParams& params);

struct EpisodeMetrics {
    std::size_t episode_id = 0;
    long detections = 0;
    long detectable = 0;
    std::vector<long> visits;

    bool operator==(const EpisodeMetrics&) const = default;
};

struct RunSummary {
    std::string agent_label;
    std::size_t n_episodes = 0;
    std::size_t n_undefined = 0;  // episodes with detectable == 0, excluded from the DR statistics
    double mean_dr = 0.0;
    double std_dr = 0.0;
    double mean_detections = 0.0;
    double mean_detectable = 0.0;
    std::vector<double> mean_visits;
    std::vector<double> std_visits;
};

/// Most signals any placement of the receivers could detect at `step`,
/// found by trying every multiset of n_receivers bands.
int oracle_detectable(const Episode& episode, int step, const ScenarioConfig& cfg);

/// Every multiset of n_receivers bands, as sorted position tuples.
std::vector<Action> receiver_placements(const ScenarioConfig& cfg);

/// Greedy/epsilon-greedy rollout of a frozen agent. `trace` receives one
/// action per step when non-null.
EpisodeMetrics run_episode(const Agent& agent, const Episode& episode, const ScenarioConfig& cfg,
                           const RewardParams& params, Rng& rng, std::vector<Action>* trace = nullptr);

/// Rollout that applies a Q-learning backup after every step.
EpisodeMetrics train_episode(QTable& table, const Episode& episode, const ScenarioConfig& cfg,
                             const RewardParams& params, Rng& rng);

/// Ordered sweeps over the training set. A single sweep leaves the greedy
/// policy noticeably dependent on the random initial table.
inline constexpr int kDefaultPasses = 3;

/// `passes` ordered sweeps over the dataset. The table's variant selects
/// whether streak memory is part of the state.
void train(QTable& table, const Dataset& dataset, const RewardParams& params, Rng& rng,
           int passes = kDefaultPasses);

/// Episode i explores with Rng::substream(eval_seed, i).
std::vector<EpisodeMetrics> evaluate(const Agent& agent, const Dataset& dataset, const RewardParams& params,
                                     std::uint64_t eval_seed);
std::vector<EpisodeMetrics> evaluate_serial(const Agent& agent, const Dataset& dataset,
                                            const RewardParams& params, std::uint64_t eval_seed);

/// Positions chosen at every step of episode `index`, replayed with the same
/// rng substream evaluate() uses.
std::vector<Action> trace_episode(const Agent& agent, const Dataset& dataset, const RewardParams& params,
                                  std::uint64_t eval_seed, std::size_t index);

/// detections / detectable, or nullopt when nothing was detectable.
std::optional<double> detection_rate(const EpisodeMetrics& m);
std::optional<double> detection_rate(long detections, long detectable);

/// Population mean and standard deviation. Throws std::invalid_argument on an empty list.
RunSummary summarize(const std::vector<EpisodeMetrics>& metrics, std::string agent_label);

// CSV files
void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& metrics, int n_bands);
std::vector<EpisodeMetrics> read_metrics_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& summaries);
void write_trace_csv(std::ostream& out, const std::vector<Action>& trace);
std::vector<Action> read_trace_csv(std::istream& in);

}  // namespace rema
