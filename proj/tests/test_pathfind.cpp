// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <functional>
#include <random>

#include "pwe/errors.hpp"
#include "pwe/pathfind.hpp"
#include "test_support.hpp"

using namespace pwe;
using namespace pwe::test;

namespace {

// Exhaustive reference: every loop-free path tx -> tiles -> rx, scored with
// the same cost components (these come straight from the public cost pieces:
// link losses, antenna masks, merged steer efficiencies).
struct BrutePath {
    std::vector<LinkIndex> links;
    double cost;
};

double brute_path_cost(const PweGraph& g, const std::vector<LinkIndex>& links, int txi,
                       int rxi, const ChannelParams& params, const Configuration& base,
                       int cap) {
    Configuration scratch = base;
    double cost = 0.0;
    const Link& first = g.link(links.front());
    cost += link_loss_db(first, params);
    const Vec3 d0 = g.direction_from(NodeRef{NodeRef::Kind::User, txi}, first);
    const double m0 = g.user(txi).antenna.efficiency(d0);
    if (m0 <= 0) return 1e30;
    cost -= 10 * std::log10(m0);

    NodeRef at = g.other_end(first, NodeRef{NodeRef::Kind::User, txi});
    for (std::size_t i = 0; i + 1 < links.size(); ++i) {
        const int tile = at.index;
        if (!g.tile(tile).codebook) return 1e30;
        const EmFunction steer = make_tile_steer(g, tile, links[i], links[i + 1]);
        std::vector<EmFunction> parts;
        if (const MergedFunction* ex = scratch.find(g.tile(tile).id)) {
            parts = ex->constituents;
            bool already = false;
            for (const auto& c : parts)
                if (c.id == steer.id) already = true;
            if (!already) {
                if (static_cast<int>(parts.size()) >= cap) return 1e30;
                parts.push_back(steer);
            }
        } else {
            parts.push_back(steer);
        }
        const MergedFunction m = merge(parts);
        const double eff = m.per_constituent_efficiency.at(steer.id);
        if (eff <= 0) return 1e30;
        cost -= 10 * std::log10(eff);
        cost += link_loss_db(g.link(links[i + 1]), params);
        scratch.assignment[g.tile(tile).id] = m;
        at = g.other_end(g.link(links[i + 1]), at);
    }
    if (!(at.kind == NodeRef::Kind::User && at.index == rxi)) return 1e30;
    const Link& last = g.link(links.back());
    int last_tile = -1;
    for (const NodeRef& n : {last.a, last.b})
        if (n.kind == NodeRef::Kind::Tile) last_tile = n.index;
    const Vec3 dl = (g.user(rxi).position - g.tile(last_tile).placement.center).normalized();
    const double ml = g.user(rxi).antenna.efficiency(dl * -1.0);
    if (ml <= 0) return 1e30;
    cost -= 10 * std::log10(ml);
    return cost;
}

void enumerate_brute(const PweGraph& g, int txi, int rxi, const ChannelParams& params,
                     int max_tiles, std::vector<BrutePath>& out) {
    std::vector<LinkIndex> stack;
    std::set<int> visited;
    std::function<void(NodeRef)> dfs = [&](NodeRef at) {
        const auto& links = at.kind == NodeRef::Kind::User ? g.user(at.index).links
                                                           : g.tile(at.index).links;
        for (LinkIndex li : links) {
            const Link& l = g.link(li);
            if (l.dead) continue;
            if (std::find(stack.begin(), stack.end(), li) != stack.end()) continue;
            const NodeRef to = g.other_end(l, at);
            if (to.kind == NodeRef::Kind::User) {
                if (to.index == rxi && !stack.empty()) {
                    stack.push_back(li);
                    const double c =
                        brute_path_cost(g, stack, txi, rxi, params, {}, 99);
                    if (c < 1e29) out.push_back({stack, c});
                    stack.pop_back();
                }
                continue;
            }
            if (visited.count(to.index)) continue;
            if (static_cast<int>(visited.size()) >= max_tiles) continue;
            visited.insert(to.index);
            stack.push_back(li);
            dfs(to);
            stack.pop_back();
            visited.erase(to.index);
        }
    };
    dfs(NodeRef{NodeRef::Kind::User, txi});
}

}  // namespace

TEST_CASE("k=1 equals the reference least-cost search on random rooms") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dim(3.0, 5.0);
    std::uniform_real_distribution<double> posf(0.15, 0.85);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const double w = dim(rng), d = dim(rng);
        Room room(w, d, 3.0, 2.0);
        auto g = build_graph(room.plan, room.placements,
                             {make_user("tx", {w * posf(rng), d * posf(rng), 1.0}),
                              make_user("rx", {w * posf(rng), d * posf(rng), 1.1})},
                             default_codebooks(), 60e9);
        ChannelParams params;
        params.include_los = false;
        UserObjective obj;
        obj.tx_id = "tx";
        obj.rx_id = "rx";
        obj.metrics = {Metric::MaxRxPower};

        std::vector<BrutePath> all;
        enumerate_brute(g, g.user_index("tx"), g.user_index("rx"), params, 2, all);
        if (all.empty()) {
            CHECK_THROWS_AS(k_shortest_configure(g, {obj}, 1, params), NoFeasiblePath);
            continue;
        }
        double best = 1e30;
        for (const auto& p : all) best = std::min(best, p.cost);

        const auto res = k_shortest_configure(g, {obj}, 1, params);
        REQUIRE(res.paths.size() == 1);
        CHECK(res.paths[0].cost_db == doctest::Approx(best).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked >= 40);  // nearly all rooms admit a path
}

TEST_CASE("six-tile toy: k=2 finds the exhaustive top two") {
    // Two parallel single-tile routes plus longer alternatives; routes are
    // tile-disjoint so selection order does not interact.
    Room room(6, 6, 3, 3.0);
    auto g = build_graph(room.plan, room.placements,
                         {make_user("tx", {3.0, 1.0, 1.0}), make_user("rx", {3.0, 5.0, 1.1})},
                         default_codebooks(), 60e9);
    ChannelParams params;
    params.include_los = false;
    UserObjective obj;
    obj.tx_id = "tx";
    obj.rx_id = "rx";

    std::vector<BrutePath> all;
    enumerate_brute(g, g.user_index("tx"), g.user_index("rx"), params, 2, all);
    REQUIRE(all.size() >= 2);
    std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.cost < b.cost; });

    const auto res = k_shortest_configure(g, {obj}, 2, params);
    REQUIRE(res.paths.size() == 2);
    CHECK(res.paths[0].cost_db == doctest::Approx(all[0].cost).epsilon(1e-9));
    // the second path is re-scored against the first selection; on this toy
    // the top-2 are tile-disjoint so the plain ranking still applies
    CHECK(res.paths[1].cost_db == doctest::Approx(all[1].cost).epsilon(1e-9));
}

TEST_CASE("perpendicularity tolerance zero rejects every final link") {
    Room room(4, 4, 3, 2.0);
    // off-grid receiver: no tile bearing is exactly perpendicular
    auto g = build_graph(room.plan, room.placements,
                         {make_user("tx", {1, 1, 1.0}), make_user("rx", {2.9, 2.7, 1.1})},
                         default_codebooks(), 60e9);
    ChannelParams params;
    params.include_los = false;
    UserObjective obj;
    obj.tx_id = "tx";
    obj.rx_id = "rx";
    obj.final_link_perpendicular = true;
    obj.perp_tolerance = 0.0;
    obj.trajectory = {0, 1, 0};
    CHECK_THROWS_AS(k_shortest_configure(g, {obj}, 1, params), NoFeasiblePath);
}

TEST_CASE("per-tile cap holds across pairs") {
    Room room(4, 4, 3, 2.0);
    auto g = build_graph(room.plan, room.placements,
                         {make_user("a", {1, 1, 1.0}), make_user("b", {3, 3, 1.1}),
                          make_user("c", {1, 3, 1.0}), make_user("d", {3, 1, 1.1})},
                         default_codebooks(), 60e9);
    ChannelParams params;
    params.include_los = false;
    UserObjective o1, o2;
    o1.tx_id = "a";
    o1.rx_id = "b";
    o1.max_functions_per_tile = 1;
    o2.tx_id = "c";
    o2.rx_id = "d";
    o2.max_functions_per_tile = 1;
    const auto res = k_shortest_configure(g, {o1, o2}, 2, params);
    for (const auto& [tile, fn] : res.config.assignment)
        CHECK(fn.constituents.size() <= 1);
}

TEST_CASE("steering into an occupied tile is costlier than a fresh one") {
    Room room(4, 4, 4, 4.0);
    auto g = build_graph(room.plan, room.placements,
                         {make_user("tx", {2, 2, 1.0}), make_user("rx", {2, 2.5, 1.1})},
                         default_codebooks(), 60e9);
    ChannelParams params;
    params.include_los = false;
    UserObjective obj;
    obj.tx_id = "tx";
    obj.rx_id = "rx";
    obj.max_functions_per_tile = 4;

    const auto first = k_shortest_configure(g, {obj}, 1, params);
    REQUIRE(first.paths.size() == 1);
    // route the same pair again on top of the tentative config via base
    const auto again = k_shortest_configure(g, {obj}, 1, params, first.config);
    CHECK(again.paths[0].cost_db <= first.paths[0].cost_db + 1e-9);  // reuse is free
}

TEST_CASE("lexicographic greedy equals plain least-cost for one pair") {
    Room room(5, 5, 3, 2.5);
    auto g = build_graph(room.plan, room.placements,
                         {make_user("tx", {1, 1, 1.0}), make_user("rx", {4, 4, 1.1})},
                         default_codebooks(), 60e9);
    ChannelParams params;
    const auto res = lexicographic_greedy(g, {{"tx", "rx"}}, params);
    REQUIRE(res.paths.size() == 1);

    // reference: plain tile-graph Dijkstra equivalent via brute force
    std::vector<BrutePath> all;
    enumerate_brute(g, g.user_index("tx"), g.user_index("rx"), params, 3, all);
    double best = 1e30;
    for (const auto& p : all) {
        // strip steer and mask terms: lexicographic costs are plain link losses
        double c = 0;
        for (LinkIndex li : p.links) c += link_loss_db(g.link(li), params);
        best = std::min(best, c);
    }
    CHECK(res.paths[0].cost_db == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("lexicographic greedy reuses tiles on equal-cost ties") {
    Room room(6, 6, 3, 3.0);
    auto g = build_graph(room.plan, room.placements,
                         {make_user("a", {3, 1, 1.0}), make_user("b", {3, 5, 1.0}),
                          make_user("c", {3, 1, 1.2}), make_user("d", {3, 5, 1.2})},
                         default_codebooks(), 60e9);
    ChannelParams params;
    const auto res = lexicographic_greedy(g, {{"a", "b"}, {"c", "d"}}, params);
    REQUIRE(res.paths.size() == 2);
    // the two symmetric pairs share the corridor: the second run must reuse
    // at least one tile of the first (typically the whole route)
    std::set<int> first_tiles, second_tiles;
    auto collect = [&](const RoutedPath& p, std::set<int>& into) {
        NodeRef at{NodeRef::Kind::User, g.user_index(p.tx_id)};
        for (std::size_t i = 0; i + 1 < p.links.size(); ++i) {
            at = g.other_end(g.link(p.links[i]), at);
            into.insert(at.index);
        }
    };
    collect(res.paths[0], first_tiles);
    collect(res.paths[1], second_tiles);
    bool overlap = false;
    for (int t : second_tiles) overlap |= first_tiles.count(t) > 0;
    CHECK(overlap);
    // configured tile count stays at or below two independent runs
    CHECK(res.config.assignment.size() <= first_tiles.size() + second_tiles.size());
}

TEST_CASE("disjoint pairs behave like independent searches") {
    Room room(8, 8, 3, 2.0);
    room.plan.obstacles.push_back({{3.9, 0, 0}, {4.1, 8, 3}});  // split the room
    auto g = build_graph(room.plan, room.placements,
                         {make_user("a", {1, 2, 1.0}), make_user("b", {1, 6, 1.0}),
                          make_user("c", {7, 2, 1.0}), make_user("d", {7, 6, 1.0})},
                         default_codebooks(), 60e9);
    ChannelParams params;
    const auto both = lexicographic_greedy(g, {{"a", "b"}, {"c", "d"}}, params);
    const auto left = lexicographic_greedy(g, {{"a", "b"}}, params);
    const auto right = lexicographic_greedy(g, {{"c", "d"}}, params);
    REQUIRE(both.paths.size() == 2);
    double combined[2];
    for (const auto& p : both.paths) combined[p.tx_id == "a" ? 0 : 1] = p.cost_db;
    CHECK(combined[0] == doctest::Approx(left.paths[0].cost_db));
    CHECK(combined[1] == doctest::Approx(right.paths[0].cost_db));
}

TEST_CASE("doppler guard absorbs audible off-perpendicular tiles only") {
    Room room(6, 6, 3, 2.0);
    UserNode rx = make_user("rx", {3, 3, 1.2});
    rx.antenna = Antenna::cosine_power({0, 0, 1}, 80.0);  // points up
    auto g = build_graph(room.plan, room.placements, {rx}, default_codebooks(), 60e9);
    const auto guards = doppler_guard_absorb(g, "rx", {0, 1, 0}, 0.4, {});
    CHECK(!guards.empty());
    for (const auto& [tile, fn] : guards) {
        const int ti = g.tile_index(tile);
        const Vec3 bearing = (g.tile(ti).placement.center - Vec3{3, 3, 1.2}).normalized();
        CHECK(std::abs(bearing.y) > 0.4);              // off-perpendicular
        CHECK(bearing.z > 0);                          // the antenna can hear it
        REQUIRE(fn.constituents.size() == 1);
        CHECK(fn.constituents[0].kind == EmKind::Absorb);
    }
}
