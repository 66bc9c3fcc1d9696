// SPDX-License-Identifier: Apache-2.0
#include "pwe/scenario_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pwe/errors.hpp"
#include "pwe/explorer.hpp"
#include "pwe/pathfind.hpp"

namespace pwe {

Vec3 predict_position(const Trajectory& trajectory, double t) {
    return trajectory.position(t);
}

namespace {

// The scenario's mobile pair: first objective whose rx has a trajectory.
const UserObjective* mobile_objective(const Scenario& s) {
    for (const auto& o : s.objectives) {
        const UserSpec* rx = s.find_user(o.rx_id);
        if (rx && rx->trajectory) return &o;
    }
    return nullptr;
}

// positioned holds the receiver at the deploy target; ahead (when given) is
// the same chain repositioned at the window end, so link ids from both stay
// valid in the caller's evolving snapshot.
Configuration controller_configure(const Scenario& scenario, const PweGraph& positioned,
                                   const PweGraph* ahead, const UserObjective& base_obj,
                                   const Vec3& heading) {
    UserObjective obj = base_obj;
    obj.trajectory = heading;

    Configuration config;
    std::vector<RoutedPath> paths;
    if (scenario.optimizer.name == "lexicographic") {
        auto res = lexicographic_greedy(positioned, {{obj.tx_id, obj.rx_id}}, scenario.channel);
        config = std::move(res.config);
        paths = std::move(res.paths);
    } else if (scenario.optimizer.name == "explorer") {
        ExplorerParams ep;
        ep.rounds = scenario.optimizer.rounds;
        ep.top_n = scenario.optimizer.top_n;
        ep.spawn_fanout = scenario.optimizer.spawn_fanout;
        ep.release_per_round = scenario.optimizer.release_per_round;
        ep.power_threshold_w = dbm_to_watts(scenario.optimizer.power_threshold_dbm);
        ep.pheromone_decay = scenario.optimizer.pheromone_decay;
        ep.reinforcement = scenario.optimizer.reinforcement;
        ep.seed = scenario.simulation.seed;
        auto res = explorer_search(positioned, obj.tx_id, {obj.rx_id}, ep, scenario.channel);
        config = std::move(res.config);
    } else {
        // Perpendicularity can be unsatisfiable in tight geometry; relax the
        // tolerance progressively rather than dropping service.
        const double tolerances[] = {obj.perp_tolerance, 3 * obj.perp_tolerance, 0.6, 1.01};
        for (double tol : tolerances) {
            obj.perp_tolerance = tol;
            try {
                auto res = k_shortest_configure(positioned, {obj}, scenario.optimizer.k,
                                                scenario.channel);
                config = std::move(res.config);
                paths = std::move(res.paths);
                break;
            } catch (const NoFeasiblePath&) {
                if (tol > 1.0) throw;
            }
        }
        // Proactive coverage for the walk toward the next deploy: route a
        // couple of extra paths for the window-end position on top of the
        // tentative configuration.
        if (ahead) {
            // Same perpendicular aim point as the primary (the window middle),
            // but routed from the window-end visibility.
            obj.perp_eval_offset_m = base_obj.perp_eval_offset_m -
                                     scenario.broadcast.refresh_period_s() *
                                         (scenario.find_user(obj.rx_id)->trajectory
                                              ? scenario.find_user(obj.rx_id)->trajectory->speed_mps
                                              : 1.0);
            for (double tol : tolerances) {
                obj.perp_tolerance = tol;
                try {
                    auto res = k_shortest_configure(*ahead, {obj},
                                                    std::min(scenario.optimizer.k, 2),
                                                    scenario.channel, config);
                    config = std::move(res.config);
                    for (auto& p : res.paths) paths.push_back(std::move(p));
                    break;
                } catch (const NoFeasiblePath&) {
                    if (tol > 1.0) break;  // keep the primary config
                }
            }
        }
    }

    // Doppler mitigation guard: absorb the receiver-audible tiles whose
    // bearing is not perpendicular to the motion, as seen from the target
    // position and from the end of the deploy window (visibility drifts as
    // the receiver walks).
    if (base_obj.doppler_guard_cos > 0.0 &&
        base_obj.metrics.count(Metric::MinDopplerSpread)) {
        std::set<std::string> exclude;
        for (const auto& p : paths) {
            const int txi = positioned.user_index(p.tx_id);
            NodeRef at{NodeRef::Kind::User, txi};
            for (std::size_t i = 0; i + 1 < p.links.size(); ++i) {
                at = positioned.other_end(positioned.link(p.links[i]), at);
                if (at.kind == NodeRef::Kind::Tile)
                    exclude.insert(positioned.tile(at.index).id);
            }
        }
        auto guards = doppler_guard_absorb(positioned, obj.rx_id, heading,
                                           base_obj.doppler_guard_cos, exclude);
        if (ahead) {
            for (auto& [tile, fn] : doppler_guard_absorb(*ahead, obj.rx_id, heading,
                                                         base_obj.doppler_guard_cos, exclude))
                guards.emplace(tile, std::move(fn));
        }
        for (auto& [tile, fn] : guards) config.assignment.emplace(tile, std::move(fn));
    }
    return config;
}

}  // namespace

TimeSeries run_scenario_mode(const Scenario& scenario, const PweGraph& graph,
                             const std::string& mode) {
    const UserObjective* obj = mobile_objective(scenario);
    if (!obj) {
        throw ScenarioInvalid(
            {std::string("scenario needs an objective whose receiver has a trajectory")});
    }
    const UserSpec* rx_spec = scenario.find_user(obj->rx_id);
    const Trajectory& traj = *rx_spec->trajectory;
    traj.validate();

    const double t0 = traj.start_time_s;
    const double duration = scenario.simulation.duration_s.value_or(traj.duration_s());
    const double dt = scenario.simulation.time_step_s;
    const double refresh = scenario.broadcast.refresh_period_s();

    ChannelParams params = scenario.channel;
    const int txi = graph.user_index(obj->tx_id);
    if (txi >= 0 && graph.user(txi).tx_power_w > 0)
        params.tx_power_w = graph.user(txi).tx_power_w;

    TimeSeries series;
    series.mode = mode;

    // One evolving snapshot: repositioning chains on the previous graph so
    // link ids stay unique across deploys and samples, and configurations
    // built at deploy time resolve against later snapshots via tombstones.
    PweGraph current = graph;
    Configuration deployed;
    double last_deploy = t0;
    double next_deploy = t0;

    const int steps = static_cast<int>(std::floor(duration / dt + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double t = t0 + i * dt;

        if (mode == "on" && t + 1e-9 >= next_deploy) {
            // Commands broadcast during the previous window target the
            // position at this deploy instant.
            const double deploy_t = std::min(next_deploy, t0 + traj.duration_s());
            const double end_t = std::min(next_deploy + refresh, t0 + traj.duration_s());
            const Vec3 target = predict_position(traj, deploy_t);
            const PweGraph at_target = current.with_user_position(obj->rx_id, target);
            current = at_target.with_user_position(obj->rx_id,
                                                   predict_position(traj, end_t));
            deployed = controller_configure(scenario, at_target, &current, *obj,
                                            traj.direction(deploy_t));
            last_deploy = next_deploy;
            next_deploy += refresh;
        }

        const Vec3 pos = predict_position(traj, std::min(t, t0 + traj.duration_s()));
        current = current.with_user_position(obj->rx_id, pos);
        const PowerDelayProfile pdp =
            compute_pdp(current, deployed, obj->tx_id, obj->rx_id, params);

        TimeSample sample;
        sample.time_s = t;
        sample.distance_m = (t - t0) * traj.speed_mps;
        sample.config_age_s = mode == "on" ? t - last_deploy : t - t0;
        if (pdp.empty()) {
            sample.rx_power_dbm = params.min_power_floor_dbm;
            sample.doppler_spread_hz = 0.0;
        } else {
            sample.rx_power_dbm = watts_to_dbm(pdp.total_power_w());
            const Vec3 velocity = traj.direction(t) * traj.speed_mps;
            sample.doppler_spread_hz = doppler_spread(
                pdp, velocity, params.frequency_hz, scenario.simulation.doppler_window_db);
        }
        series.samples.push_back(sample);
    }
    return series;
}

std::vector<TimeSeries> run_scenario(const Scenario& scenario) {
    const PweGraph graph = scenario.build();
    std::vector<TimeSeries> out;
    for (const auto& mode : scenario.simulation.modes)
        out.push_back(run_scenario_mode(scenario, graph, mode));
    return out;
}

std::vector<std::pair<double, double>> configuration_age_profile(const TimeSeries& series) {
    if (series.samples.empty()) throw EmptySeries("empty time series");
    std::vector<std::pair<double, double>> out;
    out.reserve(series.samples.size());
    for (const auto& s : series.samples) out.push_back({s.distance_m, s.config_age_s});
    return out;
}

std::string timeseries_to_csv(const TimeSeries& series) {
    std::string out = "time_s,distance_m,doppler_spread_hz,rx_power_dbm,config_age_s,mode\n";
    char buf[256];
    for (const auto& s : series.samples) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%s\n", s.time_s,
                      s.distance_m, s.doppler_spread_hz, s.rx_power_dbm, s.config_age_s,
                      series.mode.c_str());
        out += buf;
    }
    return out;
}

}  // namespace pwe
