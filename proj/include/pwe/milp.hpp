// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pwe/graph.hpp"

namespace pwe {

struct MilpVar {
    std::string name;
    double lb = 0.0;
    double ub = 1.0;
    bool integer = true;
    bool binary = true;
};

// sense: 'L' (<=), 'G' (>=), 'E' (=)
struct MilpRow {
    std::string name;
    std::vector<std::pair<int, double>> terms;
    char sense = 'L';
    double rhs = 0.0;
};

// Consistent-update program over tile activities: minimize reconfiguration
// touches across rounds subject to link-activity coupling, per-pair unit
// flow conservation, distance triangle rows with a big-M reverse, and the
// ordering rows that keep per-round paths loop-free.
struct MilpModel {
    std::vector<MilpVar> vars;
    std::vector<MilpRow> rows;
    int objective_var = -1;  // touches, minimized

    // semantic handles
    const PweGraph* graph = nullptr;
    int n_tiles = 0;
    int rounds = 0;
    double big_m = 0.0;
    std::vector<std::pair<int, int>> arcs;                    // directed tile pairs
    std::vector<LinkIndex> arc_link;                          // graph link per arc
    std::vector<std::vector<std::pair<int, int>>> pairs;      // per round, (s,d) tile indices
    std::vector<int> initial_activity;                        // a_u^0 constants

    std::map<std::string, int> index;  // variable name -> column
    int var(const std::string& name) const;

    int a(int u, int t) const;                 // activity
    int change(int u, int t) const;            // |a^t - a^(t-1)| linearization
    int alink(int arc, int t) const;           // aggregated arc activity
    int apair(int arc, int t, int p) const;    // per-pair arc activity
    int order(int u, int t) const;
    int dis(int u, int v, int t) const;
    int aux(int u, int v, int w, int t) const;
};

// Assembles the model. pairs_per_round holds (source tile id, destination
// tile id) per round; initial_activity (by tile id) defaults to all inactive.
MilpModel build_model(const PweGraph& graph,
                      const std::vector<std::vector<std::pair<std::string, std::string>>>&
                          pairs_per_round,
                      int rounds,
                      const std::map<std::string, int>& initial_activity = {});

// CPLEX LP interchange text: objective, rows, bounds, integrality markers.
void write_lp(const MilpModel& model, std::ostream& out);

// True when the assignment satisfies every row and bound (tests use this to
// certify solver output against the full model).
bool satisfies_model(const MilpModel& model, const std::vector<double>& x, double tol = 1e-6);

}  // namespace pwe
