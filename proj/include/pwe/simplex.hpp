// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace pwe {

// Minimal dense LP: minimize c.x subject to rows and box bounds on x.
struct LpRow {
    std::vector<std::pair<int, double>> terms;
    char sense = 'L';  // 'L', 'G', 'E'
    double rhs = 0.0;
};

struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;  // length num_vars
    std::vector<double> lower, upper;
    std::vector<LpRow> rows;
};

struct LpResult {
    enum class Status { Optimal, Infeasible, Unbounded, IterationLimit } status =
        Status::Optimal;
    double objective = 0.0;
    std::vector<double> x;
};

// Two-phase dense-tableau simplex. Pivoting uses Dantzig's rule and falls
// back to Bland's rule after a degeneracy stall, which keeps it cycling-proof.
LpResult solve_lp(const LpProblem& problem);

}  // namespace pwe
