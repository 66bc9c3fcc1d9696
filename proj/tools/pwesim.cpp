// SPDX-License-Identifier: Apache-2.0
//
// Command line front end: graph export, configuration, update scheduling,
// the factory-style mobility simulation and the PDP query service.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pwe/errors.hpp"
#include "pwe/explorer.hpp"
#include "pwe/milp_solve.hpp"
#include "pwe/pathfind.hpp"
#include "pwe/scenario_sim.hpp"
#include "pwe/service.hpp"

namespace {

namespace fs = std::filesystem;
using pwe::Scenario;

std::atomic<bool> g_stop{false};

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pwe::Error("cannot write '" + path.string() + "'");
    out << content;
}

std::string config_to_csv(const pwe::Configuration& config) {
    std::string out = "tile_id,function\n";
    for (const auto& [tile, fn] : config.assignment) {
        std::string desc;
        for (const auto& c : fn.constituents) {
            if (!desc.empty()) desc += '+';
            desc += c.id;
        }
        out += tile + "," + desc + "\n";
    }
    return out;
}

void write_manifest(const fs::path& dir, const Scenario& scenario,
                    const std::string& command) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["seed"] = scenario.simulation.seed;
    m["version"] = "1.0.0";
    m["parameters"] = nlohmann::ordered_json::parse(pwe::serialize_scenario(scenario));
    write_file(dir / "manifest.json", m.dump(2) + "\n");
}

int run_build_graph(const Scenario& scenario, const fs::path& out_dir) {
    const pwe::PweGraph g = scenario.build();
    std::string nodes = "id,kind,x_m,y_m,z_m,coated,collimating\n";
    for (const auto& t : g.tiles()) {
        nodes += t.id + ",tile," + std::to_string(t.placement.center.x) + "," +
                 std::to_string(t.placement.center.y) + "," +
                 std::to_string(t.placement.center.z) + "," +
                 (t.placement.coated ? "1" : "0") + "," +
                 (t.placement.collimating ? "1" : "0") + "\n";
    }
    for (const auto& u : g.users()) {
        nodes += u.id + ",user," + std::to_string(u.position.x) + "," +
                 std::to_string(u.position.y) + "," + std::to_string(u.position.z) + ",,\n";
    }
    std::string links = "link,endpoint_a,endpoint_b,length_m,delay_ns,nlos_factor,kind\n";
    for (const auto& l : g.links()) {
        if (l.dead) continue;
        auto name = [&](const pwe::NodeRef& n) {
            return n.kind == pwe::NodeRef::Kind::Tile ? g.tile(n.index).id
                                                      : g.user(n.index).id;
        };
        links += g.link_name(l.id) + "," + name(l.a) + "," + name(l.b) + "," +
                 std::to_string(l.length_m) + "," + std::to_string(l.delay_s * 1e9) + "," +
                 std::to_string(l.nlos_factor) + "," + (l.user_link ? "user" : "tile") + "\n";
    }
    write_file(out_dir / "nodes.csv", nodes);
    write_file(out_dir / "links.csv", links);
    write_manifest(out_dir, scenario, "build-graph");
    std::cout << "graph: " << g.tiles().size() << " tiles, " << g.users().size()
              << " users, " << g.links().size() << " links\n";
    return 0;
}

int run_configure(const Scenario& scenario, const fs::path& out_dir,
                  const std::string& optimizer, int k) {
    const pwe::PweGraph g = scenario.build();
    Scenario sc = scenario;
    if (!optimizer.empty()) sc.optimizer.name = optimizer;
    if (k > 0) sc.optimizer.k = k;
    if (sc.objectives.empty()) throw pwe::ScenarioInvalid({"scenario has no objectives"});

    pwe::Configuration config;
    if (sc.optimizer.name == "lexicographic") {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& o : sc.objectives) pairs.push_back({o.tx_id, o.rx_id});
        config = pwe::lexicographic_greedy(g, pairs, sc.channel).config;
    } else if (sc.optimizer.name == "explorer") {
        pwe::ExplorerParams ep;
        ep.rounds = sc.optimizer.rounds;
        ep.top_n = sc.optimizer.top_n;
        ep.spawn_fanout = sc.optimizer.spawn_fanout;
        ep.release_per_round = sc.optimizer.release_per_round;
        ep.power_threshold_w = pwe::dbm_to_watts(sc.optimizer.power_threshold_dbm);
        ep.pheromone_decay = sc.optimizer.pheromone_decay;
        ep.reinforcement = sc.optimizer.reinforcement;
        ep.seed = sc.simulation.seed;
        std::vector<std::string> rxs;
        for (const auto& o : sc.objectives) rxs.push_back(o.rx_id);
        config = pwe::explorer_search(g, sc.objectives.front().tx_id, rxs, ep, sc.channel)
                     .config;
    } else {
        config = pwe::k_shortest_configure(g, sc.objectives, sc.optimizer.k, sc.channel).config;
    }

    const pwe::ObjectiveReport report =
        pwe::evaluate(g, pwe::Configuration{}, config, sc.objectives, sc.channel);
    write_file(out_dir / "configuration.csv", config_to_csv(config));
    nlohmann::ordered_json rep;
    rep["touches"] = report.touches;
    rep["free_tiles"] = report.free_tiles;
    for (const auto& [rx, metrics] : report.metric_values)
        for (const auto& [metric, value] : metrics) rep["metrics"][rx][metric] = value;
    write_file(out_dir / "objective_report.json", rep.dump(2) + "\n");
    write_manifest(out_dir, sc, "configure");
    std::cout << "configured " << config.assignment.size() << " tiles, touches "
              << report.touches << ", free tiles " << report.free_tiles << "\n";
    return 0;
}

int run_schedule(const Scenario& scenario, const fs::path& out_dir, int rounds, bool relax,
                 std::uint64_t seed) {
    const pwe::PweGraph g = scenario.build();
    // Pairs per round: the objectives' first-contact anchors, repeated.
    std::vector<std::vector<std::pair<std::string, std::string>>> pairs_per_round;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& o : scenario.objectives) {
        const auto tx_tiles = pwe::first_contact_tiles(g, o.tx_id);
        const auto rx_tiles = pwe::first_contact_tiles(g, o.rx_id);
        if (tx_tiles.empty() || rx_tiles.empty())
            throw pwe::ScenarioInvalid({"objective endpoints have no first-contact tiles"});
        pairs.push_back({tx_tiles.front(), rx_tiles.front()});
    }
    for (int t = 0; t < rounds; ++t) pairs_per_round.push_back(pairs);

    const pwe::MilpModel model = pwe::build_model(g, pairs_per_round, rounds);
    pwe::UpdateSchedule schedule =
        relax ? pwe::relax_and_round(model, seed, 200) : pwe::solve_exact(model);
    const auto consistency = pwe::validate_consistency(g, schedule, pairs_per_round);
    schedule.consistent = consistency.consistent;

    std::string csv = "round,tile_id,function\n";
    for (std::size_t t = 0; t < schedule.rounds.size(); ++t)
        for (const auto& e : schedule.rounds[t])
            csv += std::to_string(t + 1) + "," + e.tile_id + "," + e.function + "\n";
    write_file(out_dir / "schedule.csv", csv);
    std::ofstream lp(out_dir / "model.lp");
    pwe::write_lp(model, lp);
    write_manifest(out_dir, scenario, "schedule");
    std::cout << "touches " << schedule.touches << ", consistent "
              << (schedule.consistent ? "yes" : "no");
    if (schedule.lp_bound) std::cout << ", lp bound " << *schedule.lp_bound;
    std::cout << "\n";
    for (const auto& v : consistency.violations) std::cerr << "violation: " << v << "\n";
    return schedule.consistent ? 0 : 2;
}

int run_simulate(const Scenario& scenario, const fs::path& out_dir, const std::string& mode) {
    Scenario sc = scenario;
    if (mode == "on" || mode == "off") sc.simulation.modes = {mode};
    else if (mode == "both") sc.simulation.modes = {"on", "off"};
    const auto series = pwe::run_scenario(sc);
    for (const auto& ts : series)
        write_file(out_dir / ("timeseries_" + ts.mode + ".csv"), pwe::timeseries_to_csv(ts));
    write_manifest(out_dir, sc, "simulate");
    for (const auto& ts : series) {
        double mean = 0, peak = 0;
        for (const auto& s : ts.samples) {
            mean += s.doppler_spread_hz;
            peak = std::max(peak, s.doppler_spread_hz);
        }
        if (!ts.samples.empty()) mean /= ts.samples.size();
        std::cout << "mode " << ts.mode << ": " << ts.samples.size()
                  << " samples, mean spread " << mean << " Hz, max spread " << peak
                  << " Hz\n";
    }
    return 0;
}

int run_pdp(const Scenario& scenario, const std::string& tx, const std::string& rx) {
    const pwe::PweGraph g = scenario.build();
    const auto pdp = pwe::compute_pdp(g, pwe::Configuration{}, tx, rx, scenario.channel);
    std::cout << pwe::pdp_to_csv(pdp, g);
    return 0;
}

int run_serve(const Scenario& scenario, const std::string& endpoint) {
    const pwe::PweGraph g = scenario.build();
    if (endpoint == "-") {
        pwe::serve_pdp_stdio(g, pwe::Configuration{}, scenario.channel, std::cin, std::cout);
        return 0;
    }
    std::string host = "127.0.0.1";
    int port = 0;
    const auto colon = endpoint.rfind(':');
    if (colon != std::string::npos) {
        host = endpoint.substr(0, colon);
        port = std::stoi(endpoint.substr(colon + 1));
    } else if (!endpoint.empty()) {
        port = std::stoi(endpoint);
    }
    std::signal(SIGINT, [](int) { g_stop = true; });
    std::signal(SIGTERM, [](int) { g_stop = true; });
    std::atomic<int> bound{0};
    std::thread announcer([&]() {
        while (bound.load() == 0 && !g_stop.load())
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        if (bound.load() > 0)
            std::cout << "serving on " << host << ":" << bound.load() << std::endl;
    });
    pwe::serve_pdp(g, pwe::Configuration{}, scenario.channel, host, port, g_stop, &bound);
    announcer.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Programmable wireless environment toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path, out_dir = "out", optimizer, mode = "both",
                endpoint = "127.0.0.1:7780", tx = "tx", rx = "rx";
    int k = 0, rounds = 1;
    bool relax = false;
    std::int64_t seed = -1;

    app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "override the scenario seed");

    auto* cmd_graph = app.add_subcommand("build-graph", "emit node and link CSVs");
    auto* cmd_conf = app.add_subcommand("configure", "run an optimizer, emit configuration");
    cmd_conf->add_option("--optimizer", optimizer, "kpaths | lexicographic | explorer");
    cmd_conf->add_option("--k", k, "paths per pair for kpaths");
    auto* cmd_sched = app.add_subcommand("schedule", "consistent update schedule");
    cmd_sched->add_option("--rounds", rounds, "update rounds");
    cmd_sched->add_flag("--relax", relax, "LP relaxation with randomized rounding");
    auto* cmd_sim = app.add_subcommand("simulate", "mobility run, one CSV per mode");
    cmd_sim->add_option("--mode", mode, "on | off | both");
    auto* cmd_serve = app.add_subcommand("serve", "PDP query service");
    cmd_serve->add_option("--endpoint", endpoint, "host:port, or - for stdio");
    auto* cmd_pdp = app.add_subcommand("pdp", "one profile to stdout");
    cmd_pdp->add_option("--tx", tx, "transmitter id");
    cmd_pdp->add_option("--rx", rx, "receiver id");

    CLI11_PARSE(app, argc, argv);

    Scenario scenario;
    try {
        scenario = pwe::parse_scenario(scenario_path);
        if (seed >= 0) scenario.simulation.seed = static_cast<std::uint64_t>(seed);
    } catch (const pwe::Error& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (cmd_graph->parsed()) return run_build_graph(scenario, out_dir);
        if (cmd_conf->parsed()) return run_configure(scenario, out_dir, optimizer, k);
        if (cmd_sched->parsed())
            return run_schedule(scenario, out_dir, rounds, relax, scenario.simulation.seed);
        if (cmd_sim->parsed()) return run_simulate(scenario, out_dir, mode);
        if (cmd_serve->parsed()) return run_serve(scenario, endpoint);
        if (cmd_pdp->parsed()) return run_pdp(scenario, tx, rx);
    } catch (const pwe::ScenarioInvalid& e) {
        std::cerr << "invalid scenario: " << e.what() << "\n";
        return 1;
    } catch (const pwe::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const pwe::LimitExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pwe::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
