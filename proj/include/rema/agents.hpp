#pragma once

// Receiver-control policies: linear frequency tuning and tabular
// Q-learning over joint receiver actions, with an optional memory of
// per-receiver detection streaks.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rema/env.hpp"
#include "rema/rng.hpp"

namespace rema {

enum class Variant { base, memory };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct RewardParams {
    double penalty_same = -5.0;
    double penalty_swap = -2.0;
    double penalty_no_detect = -1.0;
    double bonus_detect = 1.0;
    int x_cap = 5;
    double penalty_overstay = -3.0;  // memory variant only
    double alpha = 0.1;
    double gamma = 0.9;
    double epsilon = 0.2;

    void validate() const;
};

/// What the agent knows entering a step: where the receivers were and
/// what they saw on the previous step. streaks are clamped to x_cap.
struct AgentState {
    std::vector<Band> positions;
    std::vector<std::uint8_t> last_detections;
    std::vector<int> streaks;

    bool operator==(const AgentState&) const = default;
};

/// Episode start: receiver r on band r mod n_bands, nothing detected yet.
AgentState initial_state(const ScenarioConfig& cfg);

/// Dense mixed-radix indexing of AgentState. Digits, most significant
/// first: p0..p{R-1} (base n_bands), d0..d{R-1} (base 2) and, for the
/// memory variant, m0..m{R-1} (base x_cap + 1).
class StateSpace {
public:
    StateSpace(const ScenarioConfig& cfg, Variant variant, int x_cap);

    std::size_t size() const noexcept { return size_; }
    Variant variant() const noexcept { return variant_; }

    std::size_t encode(const AgentState& state) const;
    /// Throws std::out_of_range for index >= size().
    AgentState decode(std::size_t index) const;

private:
    int n_bands_;
    int n_receivers_;
    Variant variant_;
    int x_cap_;
    std::size_t size_;
};

std::size_t encode_state(const AgentState& state, const ScenarioConfig& cfg, Variant variant, int x_cap = 5);
AgentState decode_state(std::size_t index, const ScenarioConfig& cfg, Variant variant, int x_cap = 5);

/// Joint actions: positions read as base-n_bands digits, receiver 0 most significant.
std::size_t action_count(const ScenarioConfig& cfg);
std::size_t encode_action(const Action& action, const ScenarioConfig& cfg);
Action decode_action(std::size_t index, const ScenarioConfig& cfg);

/// Linear frequency tuning: receivers side by side from band 0, shifted up
/// by n_receivers each step, wrapping back to the start after the top band.
Action heuristic_action(int step, const ScenarioConfig& cfg);

class QTable {
public:
    QTable() = default;
    QTable(Variant variant, std::size_t n_states, std::size_t n_actions, std::uint64_t init_seed = 0);

    Variant variant() const noexcept { return variant_; }
    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::uint64_t init_seed() const noexcept { return init_seed_; }

    std::span<double> row(std::size_t state);
    std::span<const double> row(std::size_t state) const;
    double& at(std::size_t state, std::size_t action) { return values_[state * n_actions_ + action]; }
    double at(std::size_t state, std::size_t action) const { return values_[state * n_actions_ + action]; }

    std::span<const double> values() const noexcept { return values_; }

    /// Values only; init_seed is provenance and not persisted.
    bool same_values(const QTable& other) const;

private:
    Variant variant_ = Variant::base;
    std::size_t n_states_ = 0;
    std::size_t n_actions_ = 0;
    std::uint64_t init_seed_ = 0;
    std::vector<double> values_;
};

/// Entries i.i.d. uniform on [0, 1), drawn row-major from Rng(init_seed).
QTable init_qtable(const ScenarioConfig& cfg, Variant variant, std::uint64_t init_seed, int x_cap = 5);

/// Lowest action index among the row maxima.
std::size_t greedy_action(std::span<const double> row);

/// Epsilon-greedy: one uniform draw decides; exploring draws a second
/// uniform joint action index.
std::size_t select_action(const QTable& table, std::size_t state, double epsilon, Rng& rng);

/// Per receiver: detection on the same band extends the streak, detection
/// after a move restarts it at 1, no detection resets it to 0. Result is
/// not clamped (it may reach x_cap + 1).
std::vector<int> update_streaks(const AgentState& prev, const Action& action, const Feedback& feedback);

double compute_reward(const AgentState& prev, const Action& action, const Feedback& feedback,
                      std::span<const int> streaks_after, const RewardParams& params, Variant variant);

/// One-step Q-learning backup of a single entry; returns its new value.
double q_update(QTable& table, std::size_t state, std::size_t action, double reward, std::size_t next_state,
                const RewardParams& params);

// #REMA-QTABLE v1 persistence
void write_qtable(std::ostream& out, const QTable& table);
QTable read_qtable(std::istream& in);
void save_qtable(const QTable& table, const std::filesystem::path& path);
QTable load_qtable(const std::filesystem::path& path);

/// FNV-1a 64 over the serialized table, as 16 hex digits.
std::string qtable_checksum(const QTable& table);

}  // namespace rema
