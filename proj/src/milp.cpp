// SPDX-License-Identifier: Apache-2.0
#include "pwe/milp.hpp"

#include <cmath>
#include <ostream>

#include "pwe/errors.hpp"

namespace pwe {

int MilpModel::var(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw Error("model has no variable '" + name + "'");
    return it->second;
}

int MilpModel::a(int u, int t) const {
    return var("a[" + std::to_string(u) + "][" + std::to_string(t) + "]");
}
int MilpModel::change(int u, int t) const {
    return var("c[" + std::to_string(u) + "][" + std::to_string(t) + "]");
}
int MilpModel::alink(int arc, int t) const {
    return var("al[" + std::to_string(arc) + "][" + std::to_string(t) + "]");
}
int MilpModel::apair(int arc, int t, int p) const {
    return var("ap[" + std::to_string(arc) + "][" + std::to_string(t) + "][" +
               std::to_string(p) + "]");
}
int MilpModel::order(int u, int t) const {
    return var("o[" + std::to_string(u) + "][" + std::to_string(t) + "]");
}
int MilpModel::dis(int u, int v, int t) const {
    return var("dis[" + std::to_string(u) + "][" + std::to_string(v) + "][" +
               std::to_string(t) + "]");
}
int MilpModel::aux(int u, int v, int w, int t) const {
    return var("x[" + std::to_string(u) + "][" + std::to_string(v) + "][" +
               std::to_string(w) + "][" + std::to_string(t) + "]");
}

MilpModel build_model(const PweGraph& graph,
                      const std::vector<std::vector<std::pair<std::string, std::string>>>&
                          pairs_per_round,
                      int rounds, const std::map<std::string, int>& initial_activity) {
    if (rounds < 1) throw RoundsNonPositive("rounds must be >= 1");
    if (static_cast<int>(pairs_per_round.size()) != rounds)
        throw Error("pairs_per_round must list exactly one pair set per round");

    MilpModel m;
    m.graph = &graph;
    m.rounds = rounds;
    m.n_tiles = static_cast<int>(graph.tiles().size());
    m.big_m = m.n_tiles + 1.0;  // strictly larger than the number of tiles

    for (const auto& round : pairs_per_round) {
        std::vector<std::pair<int, int>> tile_pairs;
        for (const auto& [s, d] : round) {
            const int si = graph.tile_index(s);
            const int di = graph.tile_index(d);
            if (si < 0) throw UnknownEndpoint("no tile '" + s + "' in graph");
            if (di < 0) throw UnknownEndpoint("no tile '" + d + "' in graph");
            tile_pairs.push_back({si, di});
        }
        m.pairs.push_back(std::move(tile_pairs));
    }

    m.initial_activity.assign(m.n_tiles, 0);
    for (const auto& [tid, act] : initial_activity) {
        const int ti = graph.tile_index(tid);
        if (ti < 0) throw UnknownEndpoint("initial activity names unknown tile '" + tid + "'");
        m.initial_activity[ti] = act ? 1 : 0;
    }

    // Directed arcs: one per link direction between tiles.
    for (const Link& l : graph.links()) {
        if (l.user_link) continue;
        if (l.a.kind != NodeRef::Kind::Tile || l.b.kind != NodeRef::Kind::Tile) continue;
        m.arcs.push_back({l.a.index, l.b.index});
        m.arc_link.push_back(l.id);
        m.arcs.push_back({l.b.index, l.a.index});
        m.arc_link.push_back(l.id);
    }
    const int A = static_cast<int>(m.arcs.size());
    const int n = m.n_tiles;

    auto add_var = [&](const std::string& name, double lb, double ub, bool integer,
                       bool binary) {
        m.index[name] = static_cast<int>(m.vars.size());
        m.vars.push_back({name, lb, ub, integer, binary});
    };

    for (int t = 1; t <= rounds; ++t) {
        for (int u = 0; u < n; ++u) {
            add_var("a[" + std::to_string(u) + "][" + std::to_string(t) + "]", 0, 1, true, true);
            add_var("c[" + std::to_string(u) + "][" + std::to_string(t) + "]", 0, 1, true, true);
            add_var("o[" + std::to_string(u) + "][" + std::to_string(t) + "]", 0,
                    std::max(0, n - 1), true, false);
        }
        for (int arc = 0; arc < A; ++arc) {
            add_var("al[" + std::to_string(arc) + "][" + std::to_string(t) + "]", 0, 1, true,
                    true);
            for (std::size_t p = 0; p < m.pairs[t - 1].size(); ++p)
                add_var("ap[" + std::to_string(arc) + "][" + std::to_string(t) + "][" +
                            std::to_string(p) + "]",
                        0, 1, true, true);
        }
        for (int u = 0; u < n; ++u) {
            for (int v = 0; v < n; ++v) {
                if (u == v) continue;
                add_var("dis[" + std::to_string(u) + "][" + std::to_string(v) + "][" +
                            std::to_string(t) + "]",
                        0, n, true, false);
            }
        }
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                for (int w = 0; w < n; ++w) {
                    if (u == v || v == w || u == w) continue;
                    add_var("x[" + std::to_string(u) + "][" + std::to_string(v) + "][" +
                                std::to_string(w) + "][" + std::to_string(t) + "]",
                            0, 1, true, true);
                }
    }
    add_var("touches", 0, static_cast<double>(n) * rounds, true, false);
    m.objective_var = m.var("touches");

    auto row = [&](std::string name, std::vector<std::pair<int, double>> terms, char sense,
                   double rhs) {
        m.rows.push_back({std::move(name), std::move(terms), sense, rhs});
    };

    // Touch cap: the change count across rounds stays within the objective.
    {
        std::vector<std::pair<int, double>> terms;
        for (int t = 1; t <= rounds; ++t)
            for (int u = 0; u < n; ++u) terms.push_back({m.change(u, t), 1.0});
        terms.push_back({m.objective_var, -1.0});
        row("touch_cap", std::move(terms), 'L', 0.0);
    }
    // Change linearization against the previous round (round 0 is constant).
    for (int t = 1; t <= rounds; ++t) {
        for (int u = 0; u < n; ++u) {
            const std::string su = std::to_string(u), st = std::to_string(t);
            if (t == 1) {
                const double prev = m.initial_activity[u];
                row("chg_up[" + su + "][" + st + "]",
                    {{m.a(u, t), 1.0}, {m.change(u, t), -1.0}}, 'L', prev);
                row("chg_dn[" + su + "][" + st + "]",
                    {{m.a(u, t), -1.0}, {m.change(u, t), -1.0}}, 'L', -prev);
            } else {
                row("chg_up[" + su + "][" + st + "]",
                    {{m.a(u, t), 1.0}, {m.a(u, t - 1), -1.0}, {m.change(u, t), -1.0}}, 'L', 0.0);
                row("chg_dn[" + su + "][" + st + "]",
                    {{m.a(u, t - 1), 1.0}, {m.a(u, t), -1.0}, {m.change(u, t), -1.0}}, 'L', 0.0);
            }
        }
    }

    for (int t = 1; t <= rounds; ++t) {
        const std::string st = std::to_string(t);
        // Link-node coupling, distance lower bound, per-pair coupling.
        for (int arc = 0; arc < A; ++arc) {
            const auto [u, v] = m.arcs[arc];
            const std::string sa = std::to_string(arc);
            row("cpl_u[" + sa + "][" + st + "]", {{m.alink(arc, t), 1.0}, {m.a(u, t), -1.0}},
                'L', 0.0);
            row("cpl_v[" + sa + "][" + st + "]", {{m.alink(arc, t), 1.0}, {m.a(v, t), -1.0}},
                'L', 0.0);
            row("cpl_d[" + sa + "][" + st + "]",
                {{m.alink(arc, t), 1.0}, {m.dis(u, v, t), -1.0}}, 'L', 0.0);
            for (std::size_t p = 0; p < m.pairs[t - 1].size(); ++p)
                row("cpl_p[" + sa + "][" + st + "][" + std::to_string(p) + "]",
                    {{m.apair(arc, t, static_cast<int>(p)), 1.0}, {m.alink(arc, t), -1.0}},
                    'L', 0.0);
        }
        // Triangle rows over ordered distinct triples, plus the big-M reverse.
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                for (int w = 0; w < n; ++w) {
                    if (u == v || v == w || u == w) continue;
                    const std::string key = std::to_string(u) + "," + std::to_string(v) + "," +
                                            std::to_string(w) + "][" + st;
                    row("tri[" + key + "]",
                        {{m.dis(u, v, t), 1.0}, {m.dis(u, w, t), -1.0}, {m.dis(w, v, t), -1.0}},
                        'L', 0.0);
                    row("tri_m[" + key + "]",
                        {{m.dis(u, v, t), -1.0},
                         {m.dis(u, w, t), 1.0},
                         {m.dis(w, v, t), 1.0},
                         {m.aux(u, v, w, t), m.big_m}},
                        'L', m.big_m);
                }
        // Unit out-flow at the source, unit in-flow at the destination, and
        // conservation at every other tile, per pair.
        for (std::size_t p = 0; p < m.pairs[t - 1].size(); ++p) {
            const auto [s, d] = m.pairs[t - 1][p];
            const std::string sp = std::to_string(p);
            std::vector<std::pair<int, double>> src, dst;
            for (int arc = 0; arc < A; ++arc) {
                if (m.arcs[arc].first == s) src.push_back({m.apair(arc, t, (int)p), 1.0});
                if (m.arcs[arc].second == d) dst.push_back({m.apair(arc, t, (int)p), 1.0});
            }
            row("flow_s[" + sp + "][" + st + "]", std::move(src), 'E', 1.0);
            row("flow_d[" + sp + "][" + st + "]", std::move(dst), 'E', 1.0);
            for (int w = 0; w < n; ++w) {
                if (w == s || w == d) continue;
                std::vector<std::pair<int, double>> terms;
                for (int arc = 0; arc < A; ++arc) {
                    if (m.arcs[arc].first == w) terms.push_back({m.apair(arc, t, (int)p), 1.0});
                    if (m.arcs[arc].second == w) terms.push_back({m.apair(arc, t, (int)p), -1.0});
                }
                if (terms.empty()) continue;
                row("flow_c[" + sp + "][" + std::to_string(w) + "][" + st + "]",
                    std::move(terms), 'E', 0.0);
            }
        }
        // Ordering rows: an active arc forbids a full order wrap.
        if (n >= 2) {
            const double inv = 1.0 / (n - 1);
            for (int arc = 0; arc < A; ++arc) {
                const auto [u, v] = m.arcs[arc];
                row("mtz[" + std::to_string(arc) + "][" + st + "]",
                    {{m.alink(arc, t), 1.0}, {m.order(u, t), inv}, {m.order(v, t), -inv}}, 'L',
                    1.0);
            }
        }
    }
    return m;
}

void write_lp(const MilpModel& model, std::ostream& out) {
    out << "Minimize\n obj: " << model.vars[model.objective_var].name << "\n";
    out << "Subject To\n";
    for (const auto& r : model.rows) {
        out << " " << r.name << ":";
        for (const auto& [v, coef] : r.terms) {
            out << (coef >= 0 ? " +" : " -");
            out << std::abs(coef) << " " << model.vars[v].name;
        }
        out << (r.sense == 'L' ? " <= " : r.sense == 'G' ? " >= " : " = ") << r.rhs << "\n";
    }
    out << "Bounds\n";
    for (const auto& v : model.vars) out << " " << v.lb << " <= " << v.name << " <= " << v.ub << "\n";
    std::string bins, gens;
    for (const auto& v : model.vars) {
        if (v.binary) bins += " " + v.name;
        else if (v.integer) gens += " " + v.name;
    }
    if (!bins.empty()) out << "Binaries\n" << bins << "\n";
    if (!gens.empty()) out << "Generals\n" << gens << "\n";
    out << "End\n";
}

bool satisfies_model(const MilpModel& model, const std::vector<double>& x, double tol) {
    if (x.size() != model.vars.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < model.vars[i].lb - tol || x[i] > model.vars[i].ub + tol) return false;
        if (model.vars[i].integer && std::abs(x[i] - std::round(x[i])) > tol) return false;
    }
    for (const auto& r : model.rows) {
        double lhs = 0.0;
        for (const auto& [v, coef] : r.terms) lhs += coef * x[v];
        if (r.sense == 'L' && lhs > r.rhs + tol) return false;
        if (r.sense == 'G' && lhs < r.rhs - tol) return false;
        if (r.sense == 'E' && std::abs(lhs - r.rhs) > tol) return false;
    }
    return true;
}

}  // namespace pwe
