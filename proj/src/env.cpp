#include "rema/env.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "rema/errors.hpp"

namespace rema {

void ScenarioConfig::validate() const {
    if (n_bands < 1) throw ConfigError("bands must be at least 1");
    if (n_receivers < 1) throw ConfigError("receivers must be at least 1");
    if (n_receivers > n_bands) throw ConfigError("receivers must not exceed bands");
    if (n_signals < 1) throw ConfigError("signals must be at least 1");
    if (n_steps < 1) throw ConfigError("steps must be at least 1");
    if (!(p_detect >= 0.0 && p_detect <= 1.0)) throw ConfigError("p_detect must lie in [0, 1]");
    if (!(p_hot >= 0.0 && p_hot <= 1.0)) throw ConfigError("p_hot must lie in [0, 1]");
    for (std::size_t i = 0; i < hot_bands.size(); ++i) {
        const Band b = hot_bands[i];
        if (b < 0 || b >= n_bands) throw ConfigError("hot band " + std::to_string(b) + " out of range");
        for (std::size_t j = 0; j < i; ++j)
            if (hot_bands[j] == b) throw ConfigError("hot band " + std::to_string(b) + " listed twice");
    }
    if (hot_bands.empty() && p_hot > 0.0) throw ConfigError("p_hot > 0 requires at least one hot band");
    if (static_cast<int>(hot_bands.size()) == n_bands && p_hot < 1.0)
        throw ConfigError("p_hot < 1 requires at least one band outside hot");
}

std::vector<Band> ScenarioConfig::cold_bands() const {
    std::vector<Band> cold;
    for (Band b = 0; b < n_bands; ++b)
        if (std::find(hot_bands.begin(), hot_bands.end(), b) == hot_bands.end()) cold.push_back(b);
    return cold;
}

Episode::Episode(std::vector<Band> placements, int n_steps, std::vector<std::uint8_t> bits)
    : placements_(std::move(placements)), n_steps_(n_steps), bits_(std::move(bits)) {
    if (n_steps_ < 0 || bits_.size() != static_cast<std::size_t>(n_steps_) * placements_.size())
        throw std::invalid_argument("episode bits do not match steps x signals");
}

std::span<const std::uint8_t> Episode::bits_at(int step) const {
    if (step < 0 || step >= n_steps_)
        throw std::out_of_range("step " + std::to_string(step) + " outside episode of " +
                                std::to_string(n_steps_) + " steps");
    const std::size_t width = placements_.size();
    return std::span<const std::uint8_t>(bits_).subspan(static_cast<std::size_t>(step) * width, width);
}

bool Feedback::any() const noexcept {
    return std::any_of(detections.begin(), detections.end(), [](std::uint8_t d) { return d != 0; });
}

std::vector<Band> sample_placements(Rng& rng, const ScenarioConfig& cfg) {
    const std::vector<Band> cold = cfg.cold_bands();
    std::vector<Band> placements(static_cast<std::size_t>(cfg.n_signals));
    for (auto& p : placements) {
        const auto& pool = rng.bernoulli(cfg.p_hot) ? cfg.hot_bands : cold;
        p = pool[rng.uniform_int(pool.size())];
    }
    return placements;
}

Episode sample_episode(Rng& rng, const ScenarioConfig& cfg) {
    auto placements = sample_placements(rng, cfg);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(cfg.n_steps) * placements.size());
    for (auto& b : bits) b = rng.bernoulli(cfg.p_detect) ? 1 : 0;
    return Episode(std::move(placements), cfg.n_steps, std::move(bits));
}

Episode sample_episode_at(const ScenarioConfig& cfg, std::uint64_t index) {
    Rng rng = Rng::substream(cfg.seed, index);
    return sample_episode(rng, cfg);
}

Feedback observe(const Episode& episode, int step, const Action& action) {
    const auto bits = episode.bits_at(step);
    const auto placements = episode.placements();
    Feedback fb;
    fb.detections.reserve(action.positions.size());
    for (const Band pos : action.positions) {
        std::uint8_t hit = 0;
        for (std::size_t s = 0; s < placements.size(); ++s)
            if (placements[s] == pos && bits[s]) {
                hit = 1;
                break;
            }
        fb.detections.push_back(hit);
    }
    return fb;
}

int count_detected_signals(const Episode& episode, int step, const Action& action) {
    const auto bits = episode.bits_at(step);
    const auto placements = episode.placements();
    int count = 0;
    for (std::size_t s = 0; s < placements.size(); ++s) {
        if (!bits[s]) continue;
        if (std::find(action.positions.begin(), action.positions.end(), placements[s]) !=
            action.positions.end())
            ++count;
    }
    return count;
}

}  // namespace rema
