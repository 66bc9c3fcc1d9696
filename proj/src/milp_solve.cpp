// SPDX-License-Identifier: Apache-2.0
#include "pwe/milp_solve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "pwe/errors.hpp"
#include "pwe/pathfind.hpp"
#include "pwe/simplex.hpp"

namespace pwe {

namespace {

// Simple s->d paths as arc index sequences, depth-first, deterministic order.
void enumerate_paths(const MilpModel& m, int s, int d, long cap,
                     std::vector<std::vector<int>>& out) {
    const int n = m.n_tiles;
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // node -> (arc, to)
    for (int arc = 0; arc < static_cast<int>(m.arcs.size()); ++arc)
        adj[m.arcs[arc].first].push_back({arc, m.arcs[arc].second});
    for (auto& a : adj) std::sort(a.begin(), a.end(), [](auto& x, auto& y) {
        return x.second != y.second ? x.second < y.second : x.first < y.first;
    });

    std::vector<int> stack_arcs;
    std::vector<bool> visited(n, false);
    visited[s] = true;

    std::function<void(int)> dfs = [&](int u) {
        if (static_cast<long>(out.size()) >= cap) return;
        if (u == d) {
            out.push_back(stack_arcs);
            return;
        }
        for (const auto& [arc, v] : adj[u]) {
            if (visited[v]) continue;
            visited[v] = true;
            stack_arcs.push_back(arc);
            dfs(v);
            stack_arcs.pop_back();
            visited[v] = false;
        }
    };
    dfs(s);
}

std::set<int> path_nodes(const MilpModel& m, int s, const std::vector<int>& arcs) {
    std::set<int> nodes{s};
    for (int a : arcs) nodes.insert(m.arcs[a].second);
    return nodes;
}

// Touches under keep-active semantics: activity is monotone within the
// horizon (nothing in the model rewards deactivation), so a tile pays one
// change when first needed beyond its initial state.
struct Assembly {
    std::vector<std::vector<std::vector<int>>> chosen;  // [round][pair] arc list
    int touches = 0;
};

int count_touches(const MilpModel& m, const std::vector<std::vector<std::vector<int>>>& chosen) {
    std::vector<int> active = m.initial_activity;
    int touches = 0;
    for (int t = 0; t < m.rounds; ++t) {
        std::set<int> needed;
        for (std::size_t p = 0; p < chosen[t].size(); ++p) {
            const int s = m.pairs[t][p].first;
            for (int node : path_nodes(m, s, chosen[t][p])) needed.insert(node);
        }
        for (int node : needed)
            if (!active[node]) {
                active[node] = 1;
                ++touches;
            }
    }
    return touches;
}

std::string steer_descriptor(const MilpModel& m, int tile, int in_arc, int out_arc) {
    const PweGraph& g = *m.graph;
    return "steer:" + g.link_name(m.arc_link[in_arc]) + ">" +
           g.link_name(m.arc_link[out_arc]);
}

UpdateSchedule assemble_schedule(const MilpModel& m,
                                 const std::vector<std::vector<std::vector<int>>>& chosen) {
    const PweGraph& g = *m.graph;
    UpdateSchedule sched;
    sched.pair_arcs = chosen;
    sched.touches = count_touches(m, chosen);

    std::vector<int> active = m.initial_activity;
    std::map<int, std::string> bound;  // tile -> function descriptor
    for (int t = 0; t < m.rounds; ++t) {
        std::vector<ScheduleEntry> round_entries;
        std::set<int> needed;
        std::map<int, std::string> new_bindings;
        for (std::size_t p = 0; p < chosen[t].size(); ++p) {
            const auto& arcs = chosen[t][p];
            const int s = m.pairs[t][p].first;
            for (int node : path_nodes(m, s, arcs)) needed.insert(node);
            for (std::size_t i = 0; i + 1 < arcs.size(); ++i) {
                const int tile = m.arcs[arcs[i]].second;
                new_bindings[tile] = steer_descriptor(m, tile, arcs[i], arcs[i + 1]);
            }
            new_bindings.emplace(s, "active");
            new_bindings.emplace(m.pairs[t][p].second, "active");
        }
        for (const auto& [tile, fn] : new_bindings) {
            const bool newly_active = !active[tile];
            const bool rebound = bound.count(tile) && bound[tile] != fn;
            if (newly_active || rebound)
                round_entries.push_back({g.tile(tile).id, fn});
            bound[tile] = fn;
        }
        for (int node : needed) active[node] = 1;
        sched.activity.push_back(active);
        sched.rounds.push_back(std::move(round_entries));
    }
    return sched;
}

std::vector<std::vector<std::vector<int>>> paths_per_round_pair(const MilpModel& m,
                                                                const SolveLimits& limits) {
    std::vector<std::vector<std::vector<int>>> candidates;  // flattened per (t,p)
    for (int t = 0; t < m.rounds; ++t) {
        for (std::size_t p = 0; p < m.pairs[t].size(); ++p) {
            const auto [s, d] = m.pairs[t][p];
            std::vector<std::vector<int>> paths;
            if (s == d) throw Error("pair with identical endpoints");
            enumerate_paths(m, s, d, limits.max_paths, paths);
            if (static_cast<long>(paths.size()) >= limits.max_paths)
                throw LimitExceeded("path enumeration cap reached; use relax_and_round");
            if (paths.empty())
                throw Infeasible("pair (" + m.graph->tile(s).id + "," + m.graph->tile(d).id +
                                 ") is disconnected");
            candidates.push_back(std::move(paths));
        }
    }
    return candidates;
}

}  // namespace

UpdateSchedule solve_exact(const MilpModel& model, const SolveLimits& limits) {
    if (model.n_tiles > limits.max_tiles)
        throw LimitExceeded("instance has " + std::to_string(model.n_tiles) +
                            " tiles, exact limit is " + std::to_string(limits.max_tiles));
    if (model.rounds > limits.max_rounds)
        throw LimitExceeded("instance has " + std::to_string(model.rounds) +
                            " rounds, exact limit is " + std::to_string(limits.max_rounds));
    for (const auto& round : model.pairs)
        if (static_cast<int>(round.size()) > limits.max_pairs)
            throw LimitExceeded("a round has more pairs than the exact limit " +
                                std::to_string(limits.max_pairs));

    const auto candidates = paths_per_round_pair(model, limits);

    // Slots in (round, pair) order; branch over candidate paths per slot.
    struct Slot {
        int round, pair;
    };
    std::vector<Slot> slots;
    for (int t = 0; t < model.rounds; ++t)
        for (std::size_t p = 0; p < model.pairs[t].size(); ++p)
            slots.push_back({t, static_cast<int>(p)});

    std::vector<std::vector<std::vector<int>>> chosen(model.rounds);
    for (int t = 0; t < model.rounds; ++t) chosen[t].resize(model.pairs[t].size());

    int best_touches = std::numeric_limits<int>::max();
    std::vector<std::vector<std::vector<int>>> best;

    // active[] evolves monotonically along the DFS; undo via touch log.
    std::vector<int> active = model.initial_activity;

    std::function<void(std::size_t, int)> dfs = [&](std::size_t si, int touches) {
        if (touches >= best_touches) return;  // bound
        if (si == slots.size()) {
            best_touches = touches;
            best = chosen;
            return;
        }
        const auto [t, p] = slots[si];
        // Cheapest-first: order candidates by immediate new activations.
        std::vector<std::pair<int, int>> order;  // (new activations, candidate idx)
        const auto& paths = candidates[si];
        for (std::size_t ci = 0; ci < paths.size(); ++ci) {
            int fresh = 0;
            for (int node : path_nodes(model, model.pairs[t][p].first, paths[ci]))
                if (!active[node]) ++fresh;
            order.push_back({fresh, static_cast<int>(ci)});
        }
        std::stable_sort(order.begin(), order.end());
        for (const auto& [fresh, ci] : order) {
            if (touches + fresh >= best_touches) break;  // sorted, no better follows
            chosen[t][p] = paths[ci];
            std::vector<int> flipped;
            for (int node : path_nodes(model, model.pairs[t][p].first, paths[ci]))
                if (!active[node]) {
                    active[node] = 1;
                    flipped.push_back(node);
                }
            dfs(si + 1, touches + fresh);
            for (int node : flipped) active[node] = 0;
        }
    };
    dfs(0, 0);

    if (best.empty()) throw Infeasible("no feasible schedule");
    UpdateSchedule sched = assemble_schedule(model, best);
    sched.consistent = true;  // certified below by the caller-visible validator
    return sched;
}

namespace {

// Structural reduction for the relaxation: aux, dis and order blocks are
// feasibility-neutral (aux = 0, dis = hop distances, o = 0 always satisfy
// their rows) and share no binding row with the objective chain, so the core
// LP over a/c/alink/apair/touches has the same optimum as the full model.
LpProblem core_lp(const MilpModel& m) {
    LpProblem lp;
    lp.num_vars = static_cast<int>(m.vars.size());
    lp.objective.assign(lp.num_vars, 0.0);
    lp.objective[m.objective_var] = 1.0;
    lp.lower.resize(lp.num_vars);
    lp.upper.resize(lp.num_vars);
    for (int j = 0; j < lp.num_vars; ++j) {
        lp.lower[j] = m.vars[j].lb;
        lp.upper[j] = m.vars[j].ub;
    }
    // Pin the neutral blocks so their box rows vanish from the tableau.
    std::vector<std::vector<int>> hop(m.n_tiles, std::vector<int>(m.n_tiles, m.n_tiles));
    for (int u = 0; u < m.n_tiles; ++u) hop[u][u] = 0;
    for (const auto& [u, v] : m.arcs) hop[u][v] = 1;
    for (int w = 0; w < m.n_tiles; ++w)
        for (int u = 0; u < m.n_tiles; ++u)
            for (int v = 0; v < m.n_tiles; ++v)
                hop[u][v] = std::min(hop[u][v], hop[u][w] + hop[w][v]);
    for (int t = 1; t <= m.rounds; ++t) {
        for (int u = 0; u < m.n_tiles; ++u) {
            const int oj = m.order(u, t);
            lp.lower[oj] = lp.upper[oj] = 0.0;
            for (int v = 0; v < m.n_tiles; ++v) {
                if (u == v) continue;
                const int dj = m.dis(u, v, t);
                lp.lower[dj] = lp.upper[dj] = static_cast<double>(hop[u][v]);
                for (int w = 0; w < m.n_tiles; ++w) {
                    if (w == u || w == v) continue;
                    const int xj = m.aux(u, v, w, t);
                    lp.lower[xj] = lp.upper[xj] = 0.0;
                }
            }
        }
    }
    lp.rows.reserve(m.rows.size());
    for (const auto& r : m.rows) {
        LpRow row;
        row.sense = r.sense;
        row.rhs = r.rhs;
        double fixed = 0.0;
        bool all_fixed = true;
        for (const auto& [v, c] : r.terms) {
            if (lp.lower[v] == lp.upper[v]) {
                fixed += c * lp.lower[v];
            } else {
                row.terms.push_back({v, c});
                all_fixed = false;
            }
        }
        row.rhs -= fixed;
        if (all_fixed) continue;  // satisfied by construction
        lp.rows.push_back(std::move(row));
    }
    return lp;
}

}  // namespace

UpdateSchedule relax_and_round(const MilpModel& model, std::uint64_t seed, int attempts) {
    if (attempts < 1) throw Error("relax_and_round needs attempts >= 1");

    const LpProblem lp = core_lp(model);
    const LpResult sol = solve_lp(lp);
    if (sol.status == LpResult::Status::Infeasible)
        throw Infeasible("LP relaxation infeasible");
    if (sol.status != LpResult::Status::Optimal)
        throw Error("LP relaxation did not reach optimality");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // Arc adjacency for the guided walks.
    std::vector<std::vector<std::pair<int, int>>> adj(model.n_tiles);
    for (int arc = 0; arc < static_cast<int>(model.arcs.size()); ++arc)
        adj[model.arcs[arc].first].push_back({arc, model.arcs[arc].second});
    for (auto& a : adj)
        std::sort(a.begin(), a.end(),
                  [](auto& x, auto& y) { return x.second != y.second ? x.second < y.second
                                                                     : x.first < y.first; });

    UpdateSchedule best;
    bool found = false;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        std::vector<std::vector<std::vector<int>>> chosen(model.rounds);
        bool ok = true;
        for (int t = 0; ok && t < model.rounds; ++t) {
            chosen[t].resize(model.pairs[t].size());
            for (std::size_t p = 0; ok && p < model.pairs[t].size(); ++p) {
                const auto [s, d] = model.pairs[t][p];
                bool built = false;
                for (int retry = 0; retry < 50 && !built; ++retry) {
                    std::vector<int> arcs;
                    std::set<int> visited{s};
                    int at = s;
                    while (static_cast<int>(arcs.size()) < model.n_tiles) {
                        if (at == d) break;
                        double total = 0.0;
                        std::vector<std::pair<double, std::pair<int, int>>> opts;
                        for (const auto& [arc, to] : adj[at]) {
                            if (visited.count(to)) continue;
                            const double w =
                                std::max(sol.x[model.apair(arc, t + 1, (int)p)], 0.01);
                            opts.push_back({w, {arc, to}});
                            total += w;
                        }
                        if (opts.empty()) break;
                        double pick = uni(rng) * total;
                        std::pair<int, int> sel = opts.back().second;
                        for (const auto& [w, a] : opts) {
                            if (pick < w) {
                                sel = a;
                                break;
                            }
                            pick -= w;
                        }
                        arcs.push_back(sel.first);
                        visited.insert(sel.second);
                        at = sel.second;
                    }
                    if (at == d && !arcs.empty()) {
                        chosen[t][p] = arcs;
                        built = true;
                    }
                }
                ok = built;
            }
        }
        if (!ok) continue;
        UpdateSchedule sched = assemble_schedule(model, chosen);
        if (!found || sched.touches < best.touches) {
            best = std::move(sched);
            found = true;
        }
    }
    if (!found) throw NoFeasibleSample("no feasible rounded sample after " +
                                       std::to_string(attempts) + " attempts");
    best.lp_bound = sol.objective;
    best.consistent = true;
    return best;
}

ConsistencyReport validate_consistency(
    const PweGraph& graph, const UpdateSchedule& schedule,
    const std::vector<std::vector<std::pair<std::string, std::string>>>& pairs_per_round) {
    ConsistencyReport rep;
    const int rounds = static_cast<int>(schedule.pair_arcs.size());
    if (static_cast<int>(pairs_per_round.size()) != rounds) {
        rep.consistent = false;
        rep.violations.push_back("pairs_per_round does not align with the schedule rounds");
        return rep;
    }

    // Arc lookup mirrors build_model's arc ordering.
    std::vector<std::pair<int, int>> arcs;
    for (const Link& l : graph.links()) {
        if (l.user_link) continue;
        if (l.a.kind != NodeRef::Kind::Tile || l.b.kind != NodeRef::Kind::Tile) continue;
        arcs.push_back({l.a.index, l.b.index});
        arcs.push_back({l.b.index, l.a.index});
    }

    // Per-round forwarding maps (tile -> next tile) per pair, plus the
    // accumulated per-tile binding used for the transient subset check.
    struct RoundState {
        std::map<int, std::map<int, int>> next;  // pair -> (tile -> next tile)
    };
    std::vector<RoundState> states(rounds);

    for (int t = 0; t < rounds; ++t) {
        for (std::size_t p = 0; p < schedule.pair_arcs[t].size(); ++p) {
            const int s = graph.tile_index(pairs_per_round[t][p].first);
            const int d = graph.tile_index(pairs_per_round[t][p].second);
            if (s < 0 || d < 0) {
                rep.violations.push_back("round " + std::to_string(t) +
                                         ": pair endpoint missing from graph");
                continue;
            }
            std::map<int, int> next;
            bool branching = false;
            for (int arc : schedule.pair_arcs[t][p]) {
                const auto [u, v] = arcs[arc];
                if (next.count(u)) branching = true;
                next[u] = v;
            }
            states[t].next[static_cast<int>(p)] = next;
            if (branching)
                rep.violations.push_back("round " + std::to_string(t) + " pair " +
                                         std::to_string(p) + ": branching flow");
            // Walk s -> d; a revisit is a loop, a dead end short of d is a
            // black hole in the final round state.
            std::set<int> seen;
            int at = s;
            bool looped = false, stranded = false;
            while (at != d) {
                if (seen.count(at)) {
                    looped = true;
                    break;
                }
                seen.insert(at);
                auto it = next.find(at);
                if (it == next.end()) {
                    stranded = true;
                    break;
                }
                at = it->second;
            }
            if (looped)
                rep.violations.push_back("round " + std::to_string(t) + " pair " +
                                         std::to_string(p) + ": loop in the update path");
            if (stranded)
                rep.violations.push_back("round " + std::to_string(t) + " pair " +
                                         std::to_string(p) +
                                         ": black hole, path ends before its receiver");
        }
    }

    // Transient hazards: for flows in service before a round, any subset of
    // the round's per-tile forwarding changes must keep them loop-free and
    // delivered. Subsets cover every prefix of every update order.
    for (int t = 1; t < rounds; ++t) {
        for (std::size_t p = 0; p < pairs_per_round[t].size(); ++p) {
            // The flow must also have been served in the previous round.
            int prev_p = -1;
            for (std::size_t q = 0; q < pairs_per_round[t - 1].size(); ++q)
                if (pairs_per_round[t - 1][q] == pairs_per_round[t][p]) prev_p = (int)q;
            if (prev_p < 0) continue;
            const auto& before = states[t - 1].next.at(prev_p);
            const auto& after = states[t].next.at(static_cast<int>(p));
            const int s = graph.tile_index(pairs_per_round[t][p].first);
            const int d = graph.tile_index(pairs_per_round[t][p].second);

            std::vector<int> changed;
            std::set<int> tiles;
            for (const auto& [u, v] : before) tiles.insert(u);
            for (const auto& [u, v] : after) tiles.insert(u);
            for (int u : tiles) {
                const auto bi = before.find(u);
                const auto ai = after.find(u);
                const int b = bi == before.end() ? -1 : bi->second;
                const int a = ai == after.end() ? -1 : ai->second;
                if (a != b) changed.push_back(u);
            }
            if (changed.size() > 16) continue;  // guarded by desk-scale limits

            const std::size_t subsets = 1ull << changed.size();
            for (std::size_t mask = 0; mask < subsets; ++mask) {
                std::set<int> applied;
                for (std::size_t b = 0; b < changed.size(); ++b)
                    if (mask & (1ull << b)) applied.insert(changed[b]);
                std::set<int> seen;
                int at = s;
                bool looped = false, stranded = false;
                while (at != d) {
                    if (seen.count(at)) {
                        looped = true;
                        break;
                    }
                    seen.insert(at);
                    const auto& table = applied.count(at) ? after : before;
                    auto it = table.find(at);
                    if (it == table.end()) {
                        stranded = true;
                        break;
                    }
                    at = it->second;
                }
                if (looped) {
                    rep.violations.push_back("round " + std::to_string(t) + " pair " +
                                             std::to_string(p) +
                                             ": transient loop under a partial update");
                    break;
                }
                if (stranded) {
                    rep.violations.push_back("round " + std::to_string(t) + " pair " +
                                             std::to_string(p) +
                                             ": transient black hole under a partial update");
                    break;
                }
            }
        }
    }

    rep.consistent = rep.violations.empty();
    return rep;
}

std::vector<double> schedule_to_solution(const MilpModel& m, const UpdateSchedule& s) {
    std::vector<double> x(m.vars.size(), 0.0);
    // Hop distances satisfy every triangle row; aux and order stay zero.
    std::vector<std::vector<int>> hop(m.n_tiles, std::vector<int>(m.n_tiles, m.n_tiles));
    for (int u = 0; u < m.n_tiles; ++u) hop[u][u] = 0;
    for (const auto& [u, v] : m.arcs) hop[u][v] = 1;
    for (int w = 0; w < m.n_tiles; ++w)
        for (int u = 0; u < m.n_tiles; ++u)
            for (int v = 0; v < m.n_tiles; ++v)
                hop[u][v] = std::min(hop[u][v], hop[u][w] + hop[w][v]);

    std::vector<int> prev = m.initial_activity;
    int touches = 0;
    for (int t = 1; t <= m.rounds; ++t) {
        const auto& act = s.activity[t - 1];
        for (int u = 0; u < m.n_tiles; ++u) {
            x[m.a(u, t)] = act[u];
            const int change = act[u] != prev[u] ? 1 : 0;
            x[m.change(u, t)] = change;
            touches += change;
            for (int v = 0; v < m.n_tiles; ++v)
                if (u != v) x[m.dis(u, v, t)] = hop[u][v];
        }
        for (std::size_t p = 0; p < s.pair_arcs[t - 1].size(); ++p)
            for (int arc : s.pair_arcs[t - 1][p]) {
                x[m.apair(arc, t, static_cast<int>(p))] = 1.0;
                x[m.alink(arc, t)] = 1.0;
            }
        prev = act;
    }
    x[m.objective_var] = touches;
    return x;
}

}  // namespace pwe
