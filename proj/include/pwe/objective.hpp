// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pwe/channel.hpp"

namespace pwe {

enum class Metric {
    MaxRxPower,
    MinRmsDelaySpread,
    MinDopplerSpread,
    MinEavesdropExposure,
    MinDelay,
};

Metric metric_from_string(const std::string& name);  // throws UnknownMetric
std::string to_string(Metric m);

struct UserObjective {
    std::string tx_id;
    std::string rx_id;
    std::set<Metric> metrics;
    std::map<Metric, double> weights;            // positive
    std::string eavesdropper_id;                 // for MinEavesdropExposure
    int max_functions_per_tile = 2;              // simultaneous-function cap
    std::vector<std::string> forbidden_links;    // "<a>~<b>" names
    bool final_link_perpendicular = false;
    Vec3 trajectory;                             // receiver motion direction (and velocity for
                                                 // the Doppler metric, in m/s)
    double perp_tolerance = 0.1;                 // |cos| bound for the final link
    double perp_eval_offset_m = 0.0;             // evaluate the filter this far along the path
    double doppler_guard_cos = 0.0;              // >0: absorb rx-visible tiles beyond this bearing
};

struct ObjectiveReport {
    std::map<std::string, std::map<std::string, double>> metric_values;  // rx -> metric -> value
    int touches = 0;            // R^t
    int free_tiles = 0;         // S_0^t
    bool touch_limit_ok = true;
    bool free_tile_limit_ok = true;
};

struct ObjectiveLimits {
    std::optional<int> max_touches;     // soft cap on R^t
    std::optional<int> min_free_tiles;  // soft floor on S_0^t
};

// 1 iff the two assignments are structurally equal (deactivated slots compare
// equal to each other), else 0.
int comparator(const MergedFunction* f, const MergedFunction* f_star);
int comparator(const Configuration& cfg, const std::string& tile_id,
               const Configuration& other);

// Evaluates the selected per-user metrics over the new configuration, counts
// reconfiguration touches against the previous one and free tiles, and flags
// soft-limit violations without failing.
ObjectiveReport evaluate(const PweGraph& graph, const Configuration& config_prev,
                         const Configuration& config_now,
                         const std::vector<UserObjective>& objectives,
                         const ChannelParams& params, const ObjectiveLimits& limits = {});

}  // namespace pwe
