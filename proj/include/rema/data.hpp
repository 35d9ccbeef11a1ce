#pragma once

// Episode datasets and their on-disk form.
//
//   #REMA-DATASET v1
//   config bands=10 receivers=2 signals=3 steps=100 p_detect=0.8 p_hot=0.5 hot=0,1,2 seed=42 role=train
//   episodes <count>
//   --- <index>
//   placements <band> <band> <band>
//   <n_steps lines of n_signals characters over {0,1}>
//   ...
//
// Per-signal bits are stored, not the per-band aggregate: detection
// counts per signal cannot be recovered from the aggregate once two
// signals share a band. write_aggregate() produces the aggregate view.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rema/env.hpp"

namespace rema {

enum class Role { train, validation };

std::string_view to_string(Role role);
Role parse_role(std::string_view s);

struct Dataset {
    ScenarioConfig cfg;
    std::vector<Episode> episodes;
    Role role = Role::train;

    bool operator==(const Dataset&) const = default;
};

/// Episode i is drawn from substream i of cfg.seed; parallel over episodes.
Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t n_episodes, Role role);

/// Single-threaded reference for generate_dataset.
Dataset generate_dataset_serial(const ScenarioConfig& cfg, std::size_t n_episodes, Role role);

/// [n_steps][n_bands] occupancy: 1 where at least one detectable signal sits.
std::vector<std::vector<std::uint8_t>> aggregate_matrix(const Episode& episode, int n_bands);

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Per episode: "--- <index>" then n_steps lines of n_bands characters.
void write_aggregate(std::ostream& out, const Dataset& dataset);

}  // namespace rema
