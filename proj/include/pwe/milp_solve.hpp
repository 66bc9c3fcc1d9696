// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pwe/milp.hpp"

namespace pwe {

struct ScheduleEntry {
    std::string tile_id;
    std::string function;  // steer descriptor, or "active" for endpoint tiles
};

struct UpdateSchedule {
    std::vector<std::vector<ScheduleEntry>> rounds;   // reconfigurations applied per round
    int touches = 0;
    bool consistent = false;

    // solver internals used by validation and tests
    std::vector<std::vector<int>> activity;                        // [round][tile] 0/1
    std::vector<std::vector<std::vector<int>>> pair_arcs;          // [round][pair] arc list
    std::optional<double> lp_bound;
};

struct SolveLimits {
    int max_tiles = 15;
    int max_rounds = 4;
    int max_pairs = 4;       // per round
    long max_paths = 20000;  // per pair enumeration guard
};

// Depth-first branch and bound over the per-pair arc bundles: each branch
// fixes one pair's path (its a^t,(s,d) binaries), activity implications
// propagate, and partial touch counts bound the search. Exhaustion certifies
// the optimum.
UpdateSchedule solve_exact(const MilpModel& model, const SolveLimits& limits = {});

// LP relaxation (binaries in [0,1]) solved with the in-module simplex, then
// randomized rounding guided by the fractional arc values; each sample is
// repaired into per-pair paths and validated, and the best feasible sample
// wins. Touches are never below the exact optimum.
UpdateSchedule relax_and_round(const MilpModel& model, std::uint64_t seed, int attempts);

struct ConsistencyReport {
    bool consistent = true;
    std::vector<std::string> violations;
};

// Certifies a schedule: per round every pair's arcs must form a loop-free
// simple path ending at its receiver (existence of a consistent order
// assignment over the MTZ variables), and no subset of a round's changes may
// strand or loop a flow that was in service before the round.
ConsistencyReport validate_consistency(
    const PweGraph& graph, const UpdateSchedule& schedule,
    const std::vector<std::vector<std::pair<std::string, std::string>>>& pairs_per_round);

// Expands a schedule into the model-variable vector (tests certify it
// against every row with satisfies_model).
std::vector<double> schedule_to_solution(const MilpModel& model, const UpdateSchedule& s);

}  // namespace pwe
