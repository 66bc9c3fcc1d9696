// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pwe/channel.hpp"

namespace pwe {

struct ExplorerParams {
    int spawn_fanout = 3;            // children kept per activation, strongest outputs first
    double power_threshold_w = 1e-28;
    int rounds = 50;                 // synchronized one-hop advancement steps
    int top_n = 3;
    double pheromone_decay = 0.02;   // multiplicative decay per round
    double reinforcement = 1.0;      // additive gain scaled by arrival power / tx power
    int release_per_round = 4;       // fresh explorers released from the transmitter each round
    std::uint64_t seed = 1;
};

struct ExplorerResult {
    std::map<std::string, std::vector<PathRecord>> top_paths;  // per receiver id
    Configuration config;                                       // from the best routes
    std::map<std::string, long> arrivals_by_route;              // route trace -> count
};

// Front-propagating stochastic search: explorers leave the transmitter, pick
// an EM function at each free tile from the per-(tile, arrival) weight table
// (uniform at first), spawn along the function's output distribution, die
// below the power threshold, and reinforce the weights of routes that reach
// their intended receiver.
ExplorerResult explorer_search(const PweGraph& graph, const std::string& tx_id,
                               const std::vector<std::string>& rx_ids,
                               const ExplorerParams& eparams, const ChannelParams& params);

}  // namespace pwe
