// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pwe/objective.hpp"

namespace pwe {

struct RoutedPath {
    std::string tx_id;
    std::string rx_id;
    std::vector<LinkIndex> links;  // user link, inter-tile links..., user link
    double cost_db = 0.0;
};

struct PathfindResult {
    Configuration config;
    std::vector<RoutedPath> paths;
};

// Up to k loop-free least-loss paths per user pair (most distant pair first)
// between the pairs' first-contact tile sets, honoring the per-tile
// simultaneous-function cap, eavesdropper-adjacent link avoidance and the
// final-link perpendicularity filter. Selected paths become steer assignments
// merged per tile; the search is deviation-based over a non-re-entrant state
// graph and candidates are re-scored against the tentative configuration
// after every selection.
PathfindResult k_shortest_configure(const PweGraph& graph,
                                    const std::vector<UserObjective>& objectives, int k,
                                    const ChannelParams& params,
                                    const Configuration& base = {});

// Greedy lexicographic variant: pairs ascending by graph distance; distance
// ties during the search prefer tiles already reused by earlier pairs.
PathfindResult lexicographic_greedy(const PweGraph& graph,
                                    const std::vector<std::pair<std::string, std::string>>& pairs,
                                    const ChannelParams& params);

// Doppler mitigation support: full-absorb assignments for coated tiles in LOS
// of the receiver whose bearing is not perpendicular to the trajectory
// (|cos| > guard_cos) and that the receiver antenna can actually hear.
std::map<std::string, MergedFunction> doppler_guard_absorb(
    const PweGraph& graph, const std::string& rx_id, const Vec3& trajectory,
    double guard_cos, const std::set<std::string>& exclude_tiles);

// Steer synthesis shared by the configurators and the scheduler: the function
// for (arrive by in_link, depart by out_link) at a tile, from its codebook.
EmFunction make_tile_steer(const PweGraph& graph, int tile_idx, LinkIndex in_link,
                           LinkIndex out_link);

// Adds a steer for every interior tile of a routed path into the
// configuration, merging with whatever the tiles already hold.
void commit_path_steers(const PweGraph& graph, const std::vector<LinkIndex>& path_links,
                        Configuration& config);

}  // namespace pwe
