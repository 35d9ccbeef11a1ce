#pragma once

// Spectrum-monitoring environment: a set of non-overlapping bands, a few
// tunable receiver channels and continuous interference signals that sit
// on one band for a whole episode and are detectable at each step with a
// fixed probability.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rema/rng.hpp"

namespace rema {

using Band = int;

struct ScenarioConfig {
    int n_bands = 10;
    int n_receivers = 2;
    int n_signals = 3;
    int n_steps = 100;
    double p_detect = 0.8;
    double p_hot = 0.5;
    std::vector<Band> hot_bands{0, 1, 2};
    std::uint64_t seed = 0;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;

    /// Bands not in hot_bands, ascending.
    std::vector<Band> cold_bands() const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// One observation series. bits are stored row-major, one row per step.
class Episode {
public:
    Episode() = default;
    Episode(std::vector<Band> placements, int n_steps, std::vector<std::uint8_t> bits);

    int n_steps() const noexcept { return n_steps_; }
    int n_signals() const noexcept { return static_cast<int>(placements_.size()); }

    std::span<const Band> placements() const noexcept { return placements_; }

    std::span<const std::uint8_t> bits_at(int step) const;
    bool bit(int step, int signal) const { return bits_at(step)[static_cast<std::size_t>(signal)] != 0; }
    std::span<const std::uint8_t> all_bits() const noexcept { return bits_; }

    bool operator==(const Episode&) const = default;

private:
    std::vector<Band> placements_;
    int n_steps_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct Action {
    std::vector<Band> positions;
    bool operator==(const Action&) const = default;
};

struct Feedback {
    std::vector<std::uint8_t> detections;
    bool any() const noexcept;
    bool operator==(const Feedback&) const = default;
};

/// Per signal: a uniform hot band with probability p_hot, else a uniform cold band.
std::vector<Band> sample_placements(Rng& rng, const ScenarioConfig& cfg);

/// Placements followed by the detectability bits, drawn step by step, signal by signal.
Episode sample_episode(Rng& rng, const ScenarioConfig& cfg);

/// Episode `index` of a dataset seeded with cfg.seed.
Episode sample_episode_at(const ScenarioConfig& cfg, std::uint64_t index);

/// Receiver r detects iff some signal on its band has its bit set at `step`.
/// Throws std::out_of_range for a step outside the episode.
Feedback observe(const Episode& episode, int step, const Action& action);

/// Distinct signals detectable at `step` whose band is covered by the action.
int count_detected_signals(const Episode& episode, int step, const Action& action);

}  // namespace rema
