// SPDX-License-Identifier: Apache-2.0
#include "pwe/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pwe {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
    // rows x cols, last column is rhs; cost rows kept separately.
    int m = 0, n = 0;
    std::vector<std::vector<double>> a;
    std::vector<double> rhs;
    std::vector<int> basis;

    void pivot(int row, int col) {
        const double pv = a[row][col];
        for (int j = 0; j < n; ++j) a[row][j] /= pv;
        rhs[row] /= pv;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = a[i][col];
            if (std::abs(f) < kEps) continue;
            for (int j = 0; j < n; ++j) a[i][j] -= f * a[row][j];
            rhs[i] -= f * rhs[row];
        }
        basis[row] = col;
    }
};

// One simplex phase over the given cost vector. Returns false on unbounded.
bool run_phase(Tableau& t, std::vector<double> cost, double* objective,
               long max_iters) {
    // Reduced costs maintained densely.
    std::vector<double> red(t.n);
    double obj = 0.0;
    auto recompute = [&]() {
        red = cost;
        obj = 0.0;
        for (int i = 0; i < t.m; ++i) {
            const double cb = cost[t.basis[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j < t.n; ++j) red[j] -= cb * t.a[i][j];
            obj += cb * t.rhs[i];
        }
    };
    recompute();

    bool bland = false;
    int stall = 0;
    double last_obj = obj;
    for (long iter = 0; iter < max_iters; ++iter) {
        int col = -1;
        if (!bland) {
            double best = -kEps;
            for (int j = 0; j < t.n; ++j)
                if (red[j] < best) {
                    best = red[j];
                    col = j;
                }
        } else {
            for (int j = 0; j < t.n; ++j)
                if (red[j] < -kEps) {
                    col = j;
                    break;
                }
        }
        if (col < 0) {
            *objective = obj;
            return true;  // optimal
        }
        int row = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < t.m; ++i) {
            if (t.a[i][col] > kEps) {
                const double r = t.rhs[i] / t.a[i][col];
                if (r < best_ratio - kEps ||
                    (r < best_ratio + kEps && (row < 0 || t.basis[i] < t.basis[row]))) {
                    best_ratio = r;
                    row = i;
                }
            }
        }
        if (row < 0) return false;  // unbounded
        t.pivot(row, col);
        // Incremental reduced-cost and objective maintenance.
        const double f = red[col];
        for (int j = 0; j < t.n; ++j) red[j] -= f * t.a[row][j];
        obj += f * t.rhs[row];
        if (std::abs(obj - last_obj) < kEps) {
            if (++stall > 64) bland = true;  // degeneracy stall: cycling-proof rule
        } else {
            stall = 0;
            last_obj = obj;
        }
    }
    *objective = obj;
    return true;
}

}  // namespace

LpResult solve_lp(const LpProblem& p) {
    LpResult res;

    // Shift to y = x - lb >= 0; finite upper bounds become explicit rows.
    const int n0 = p.num_vars;
    std::vector<LpRow> rows = p.rows;
    std::vector<double> shift = p.lower;
    for (int j = 0; j < n0; ++j) {
        const double width = p.upper[j] - p.lower[j];
        if (width < -kEps) {
            res.status = LpResult::Status::Infeasible;
            return res;
        }
        LpRow r;
        r.terms = {{j, 1.0}};
        r.sense = 'L';
        r.rhs = p.upper[j];
        rows.push_back(std::move(r));
    }

    const int m = static_cast<int>(rows.size());
    // Columns: structural + one slack/surplus per inequality + artificials.
    int n_slack = 0;
    for (const auto& r : rows)
        if (r.sense != 'E') ++n_slack;

    Tableau t;
    t.m = m;
    t.n = n0 + n_slack;  // artificial columns appended below as needed
    t.a.assign(m, std::vector<double>(n0 + n_slack, 0.0));
    t.rhs.assign(m, 0.0);
    t.basis.assign(m, -1);

    int slack_at = n0;
    std::vector<int> needs_artificial;
    for (int i = 0; i < m; ++i) {
        const auto& r = rows[i];
        double b = r.rhs;
        for (const auto& [v, coef] : r.terms) b -= coef * shift[v];
        double sign = 1.0;
        char sense = r.sense;
        if (b < 0) {  // normalize to nonnegative rhs
            sign = -1.0;
            b = -b;
            sense = (r.sense == 'L') ? 'G' : (r.sense == 'G') ? 'L' : 'E';
        }
        for (const auto& [v, coef] : r.terms) t.a[i][v] += sign * coef;
        t.rhs[i] = b;
        if (sense == 'L') {
            t.a[i][slack_at] = 1.0;
            t.basis[i] = slack_at++;
        } else if (sense == 'G') {
            t.a[i][slack_at] = -1.0;
            ++slack_at;
            needs_artificial.push_back(i);
        } else {
            needs_artificial.push_back(i);
        }
    }

    const int n_art = static_cast<int>(needs_artificial.size());
    if (n_art > 0) {
        const int base = t.n;
        t.n += n_art;
        for (auto& row : t.a) row.resize(t.n, 0.0);
        for (int k = 0; k < n_art; ++k) {
            t.a[needs_artificial[k]][base + k] = 1.0;
            t.basis[needs_artificial[k]] = base + k;
        }
        std::vector<double> phase1(t.n, 0.0);
        for (int k = 0; k < n_art; ++k) phase1[base + k] = 1.0;
        double obj1 = 0.0;
        if (!run_phase(t, phase1, &obj1, 200000)) {
            res.status = LpResult::Status::Unbounded;
            return res;
        }
        if (obj1 > 1e-6) {
            res.status = LpResult::Status::Infeasible;
            return res;
        }
        // Pivot any artificial still in the basis out where possible.
        for (int i = 0; i < t.m; ++i) {
            if (t.basis[i] >= base) {
                for (int j = 0; j < base; ++j) {
                    if (std::abs(t.a[i][j]) > 1e-7) {
                        t.pivot(i, j);
                        break;
                    }
                }
            }
        }
        // Forbid artificials from re-entering.
        for (auto& row : t.a)
            row.resize(base);
        t.n = base;
        for (int i = 0; i < t.m; ++i)
            if (t.basis[i] >= base) t.basis[i] = -2;  // degenerate zero row
    }

    std::vector<double> cost(t.n, 0.0);
    for (int j = 0; j < n0; ++j) cost[j] = p.objective[j];
    // Rows whose artificial stayed basic at zero are redundant; neutralize.
    for (int i = 0; i < t.m; ++i) {
        if (t.basis[i] == -2) {
            std::fill(t.a[i].begin(), t.a[i].end(), 0.0);
            t.rhs[i] = 0.0;
            // park a fresh zero column for it
            for (auto& row : t.a) row.push_back(0.0);
            cost.push_back(0.0);
            t.a[i][t.n] = 1.0;
            t.basis[i] = t.n;
            ++t.n;
        }
    }

    double obj = 0.0;
    if (!run_phase(t, cost, &obj, 200000)) {
        res.status = LpResult::Status::Unbounded;
        return res;
    }

    std::vector<double> y(t.n, 0.0);
    for (int i = 0; i < t.m; ++i)
        if (t.basis[i] >= 0) y[t.basis[i]] = t.rhs[i];
    res.x.assign(n0, 0.0);
    double check = 0.0;
    for (int j = 0; j < n0; ++j) {
        res.x[j] = y[j] + shift[j];
        check += p.objective[j] * shift[j];
    }
    res.objective = obj + check;
    res.status = LpResult::Status::Optimal;
    return res;
}

}  // namespace pwe
