// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pwe/channel.hpp"
#include "pwe/objective.hpp"
#include "pwe/trajectory.hpp"

namespace pwe {

struct CodebookSpec {
    int cell_grid = 8;
    int bias_levels = 8;
    double steer_efficiency = 0.8;
    double absorb_efficiency = 1.0;
    // Explicit entries; kind limited to steer/absorb templates without port
    // bindings plus raw bias vectors.
    struct Entry {
        std::string id;
        std::string kind = "steer";
        std::vector<int> bias;
        double efficiency = 1.0;
    };
    std::vector<Entry> entries;
};

struct UserSpec {
    std::string id;
    Vec3 position;
    std::string antenna_kind = "isotropic";  // or cosine_power
    Vec3 boresight{0, 0, 1};
    double beamwidth_deg = 80.0;
    double tx_power_dbm = 30.0;
    std::optional<std::string> antenna_label;
    std::optional<Trajectory> trajectory;
};

struct OptimizerSpec {
    std::string name = "kpaths";  // kpaths | lexicographic | explorer
    int k = 1;
    // explorer knobs
    int rounds = 50;
    int top_n = 3;
    int spawn_fanout = 3;
    int release_per_round = 4;
    double power_threshold_dbm = -250.0;
    double pheromone_decay = 0.02;
    double reinforcement = 1.0;
};

struct BroadcastSpec {
    double rate_bps = 360e3;
    double command_size_bits = 360;
    int tile_capacity = 1000;

    double schedule_size_bits() const { return command_size_bits * tile_capacity; }
    double refresh_period_s() const { return schedule_size_bits() / rate_bps; }
};

struct SimulationSpec {
    double time_step_s = 0.05;
    std::optional<double> duration_s;  // defaults to the rx trajectory duration
    std::vector<std::string> modes{"on", "off"};
    std::uint64_t seed = 1;
    std::optional<double> doppler_window_db;  // significance window for the spread
};

struct Scenario {
    Floorplan floorplan;
    double tile_side_m = 1.0;
    std::map<std::string, CodebookSpec> codebooks;
    std::vector<UserSpec> users;
    ChannelParams channel;
    VisibilityOptions visibility;
    std::vector<UserObjective> objectives;
    OptimizerSpec optimizer;
    BroadcastSpec broadcast;
    SimulationSpec simulation;

    const UserSpec* find_user(const std::string& id) const;
    std::vector<TilePlacement> placements() const;
    std::map<std::string, std::shared_ptr<const Codebook>> build_codebooks() const;
    std::vector<UserNode> build_users() const;
    PweGraph build() const;
};

// Strict parse: unknown keys rejected, all validation problems reported
// together with key context, defaults filled.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& json_text);

// Canonical serialization (defaults made explicit, keys ordered); parsing the
// output reproduces the same canonical form.
std::string serialize_scenario(const Scenario& s);

}  // namespace pwe
