// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "pwe/errors.hpp"
#include "pwe/explorer.hpp"
#include "pwe/pathfind.hpp"
#include "test_support.hpp"

using namespace pwe;
using namespace pwe::test;

TEST_CASE("single-tile graph converges on the only route by round two") {
    Floorplan plan;
    plan.ceiling_height = 3.0;
    plan.walls.push_back(make_wall("ceiling", {0, 0, 3}, {0, 1, 0}, {1, 0, 0}));
    auto placements = tile_surface(plan.walls[0], 1.0);
    auto g = build_graph(plan, placements,
                         {make_user("tx", {0.4, 0.5, 1.0}), make_user("rx", {0.6, 0.5, 1.0})},
                         default_codebooks(), 60e9);
    ExplorerParams ep;
    ep.rounds = 2;
    ep.seed = 3;
    ChannelParams params;
    const auto res = explorer_search(g, "tx", {"rx"}, ep, params);
    REQUIRE(res.top_paths.count("rx"));
    CHECK(res.top_paths.at("rx").size() >= 1);
    CHECK(res.config.assignment.size() == 1);
}

TEST_CASE("threshold above the transmit power yields no arrivals") {
    Floorplan plan;
    plan.ceiling_height = 3.0;
    plan.walls.push_back(make_wall("ceiling", {0, 0, 3}, {0, 1, 0}, {1, 0, 0}));
    auto placements = tile_surface(plan.walls[0], 1.0);
    auto g = build_graph(plan, placements,
                         {make_user("tx", {0.4, 0.5, 1.0}), make_user("rx", {0.6, 0.5, 1.0})},
                         default_codebooks(), 60e9);
    ExplorerParams ep;
    ep.rounds = 10;
    ep.power_threshold_w = 2.0;  // above the 1 W transmit power
    CHECK_THROWS_AS(explorer_search(g, "tx", {"rx"}, ep, ChannelParams{}), NoArrivals);
    ExplorerParams bad;
    bad.power_threshold_w = 0.0;
    CHECK_THROWS_AS(explorer_search(g, "tx", {"rx"}, bad, ChannelParams{}), Error);
}

TEST_CASE("two routes ten dB apart: the seeded search recovers the best") {
    // Two coated tiles above the users: the lower one gives short hops, the
    // higher one long hops with far-field spreading, roughly 10 dB apart on
    // the steer-route physics the explorers use.
    Floorplan plan;
    plan.ceiling_height = 4.0;
    plan.walls.push_back(make_wall("near", {0, 0, 2.0}, {0, 1, 0}, {1, 0, 0}));
    plan.walls.push_back(make_wall("far", {1.4, 0, 2.85}, {0, 1, 0}, {1, 0, 0}));
    std::vector<TilePlacement> placements;
    for (const auto& w : plan.walls) {
        auto t = tile_surface(w, 1.0);
        placements.insert(placements.end(), t.begin(), t.end());
    }
    auto g = build_graph(plan, placements,
                         {make_user("tx", {0.4, 0.5, 1.0}), make_user("rx", {0.7, 0.5, 1.0})},
                         default_codebooks(), 60e9);
    REQUIRE(g.tiles().size() == 2);
    ChannelParams params;
    params.include_los = false;
    params.near_field_radius_m = 0.5;  // both routes spread far-field

    // brute force both steer routes; identify each by its first trace link
    double route_power[2];
    LinkIndex route_entry[2];
    for (int ti = 0; ti < 2; ++ti) {
        const LinkIndex in = g.user_link_of(ti, g.user_index("tx"));
        const LinkIndex out = g.user_link_of(ti, g.user_index("rx"));
        REQUIRE(in >= 0);
        REQUIRE(out >= 0);
        Configuration cfg;
        cfg.assignment[g.tiles()[ti].id] = merge({make_tile_steer(g, ti, in, out)});
        const auto pdp = compute_pdp(g, cfg, "tx", "rx", params);
        double p = 0;
        for (const auto& e : pdp.entries)
            if (!e.trace.empty() && e.trace.front() == in) p = e.power_w;
        route_power[ti] = p;
        route_entry[ti] = in;
    }
    const int best_tile = route_power[0] > route_power[1] ? 0 : 1;
    const double gap_db =
        10 * std::log10(route_power[best_tile] / route_power[1 - best_tile]);
    CHECK(gap_db > 8.0);
    CHECK(gap_db < 16.0);

    ExplorerParams ep;
    ep.rounds = 50;
    ep.seed = 7;
    ep.top_n = 1;
    const auto res = explorer_search(g, "tx", {"rx"}, ep, params);
    REQUIRE(res.top_paths.count("rx"));
    const auto& best = res.top_paths.at("rx").front();
    REQUIRE(!best.trace.empty());
    CHECK(best.trace.front() == route_entry[best_tile]);
    CHECK(best.power_w == doctest::Approx(route_power[best_tile]).epsilon(1e-9));
}

TEST_CASE("with reinforcement off the route sampler stays uniform") {
    // Three identical single-tile routes; entry choice is uniform, so route
    // arrival counts should split evenly (chi-square sanity bound).
    Floorplan plan;
    plan.ceiling_height = 3.0;
    plan.walls.push_back(make_wall("ceiling", {0, 0, 3}, {0, 1, 0}, {3, 0, 0}));
    auto placements = tile_surface(plan.walls[0], 1.0);
    auto g = build_graph(plan, placements,
                         {make_user("tx", {1.5, 0.5, 1.0}), make_user("rx", {1.5, 0.5, 0.8})},
                         default_codebooks(), 60e9);
    REQUIRE(g.tiles().size() == 3);
    ExplorerParams ep;
    ep.rounds = 600;
    ep.release_per_round = 3;
    ep.pheromone_decay = 0.0;
    ep.reinforcement = 0.0;  // learning disabled
    ep.seed = 13;
    ep.top_n = 3;
    const auto res = explorer_search(g, "tx", {"rx"}, ep, ChannelParams{});
    REQUIRE(res.arrivals_by_route.size() == 3);
    double total = 0;
    for (const auto& [route, n] : res.arrivals_by_route) total += n;
    const double expected = total / 3.0;
    double chi2 = 0;
    for (const auto& [route, n] : res.arrivals_by_route)
        chi2 += (n - expected) * (n - expected) / expected;
    CHECK(chi2 < 13.8);  // p = 0.001 bound at 2 degrees of freedom
}

TEST_CASE("unknown endpoints are rejected") {
    Floorplan plan;
    plan.ceiling_height = 3.0;
    plan.walls.push_back(make_wall("ceiling", {0, 0, 3}, {0, 1, 0}, {1, 0, 0}));
    auto placements = tile_surface(plan.walls[0], 1.0);
    auto g = build_graph(plan, placements, {make_user("tx", {0.4, 0.5, 1.0})},
                         default_codebooks(), 60e9);
    CHECK_THROWS_AS(explorer_search(g, "ghost", {"tx"}, ExplorerParams{}, ChannelParams{}),
                    UnknownUser);
    CHECK_THROWS_AS(explorer_search(g, "tx", {"ghost"}, ExplorerParams{}, ChannelParams{}),
                    UnknownUser);
}

TEST_CASE("identical seeds reproduce identical results") {
    Room room(4, 4, 3, 2.0);
    auto g = build_graph(room.plan, room.placements,
                         {make_user("tx", {1, 1, 1.0}), make_user("rx", {3, 3, 1.1})},
                         default_codebooks(), 60e9);
    ExplorerParams ep;
    ep.rounds = 30;
    ep.seed = 99;
    const auto a = explorer_search(g, "tx", {"rx"}, ep, ChannelParams{});
    const auto b = explorer_search(g, "tx", {"rx"}, ep, ChannelParams{});
    REQUIRE(a.top_paths.count("rx"));
    REQUIRE(a.top_paths.at("rx").size() == b.top_paths.at("rx").size());
    for (std::size_t i = 0; i < a.top_paths.at("rx").size(); ++i) {
        CHECK(a.top_paths.at("rx")[i].power_w == b.top_paths.at("rx")[i].power_w);
        CHECK(a.top_paths.at("rx")[i].trace == b.top_paths.at("rx")[i].trace);
    }
    CHECK(a.arrivals_by_route == b.arrivals_by_route);
}
