// SPDX-License-Identifier: Apache-2.0
#include "pwe/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pwe/errors.hpp"

namespace pwe {

using json = nlohmann::ordered_json;

namespace {

// Collects all validation problems with key-path context before failing.
struct Check {
    std::vector<std::string> issues;

    void fail(const std::string& where, const std::string& what) {
        issues.push_back(where + ": " + what);
    }
    void finish() {
        if (!issues.empty()) throw ScenarioInvalid(std::move(issues));
    }

    void known_keys(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
        for (const auto& [key, value] : obj.items())
            if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
    }

    double number(const json& obj, const std::string& where, const std::string& key,
                  double fallback, bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(where, "missing key '" + key + "'");
            return fallback;
        }
        if (!obj[key].is_number()) {
            fail(where + "." + key, "expected a number");
            return fallback;
        }
        return obj[key].get<double>();
    }

    int integer(const json& obj, const std::string& where, const std::string& key,
                int fallback, bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(where, "missing key '" + key + "'");
            return fallback;
        }
        if (!obj[key].is_number_integer()) {
            fail(where + "." + key, "expected an integer");
            return fallback;
        }
        return obj[key].get<int>();
    }

    bool boolean(const json& obj, const std::string& where, const std::string& key,
                 bool fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_boolean()) {
            fail(where + "." + key, "expected a boolean");
            return fallback;
        }
        return obj[key].get<bool>();
    }

    std::string text(const json& obj, const std::string& where, const std::string& key,
                     const std::string& fallback, bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(where, "missing key '" + key + "'");
            return fallback;
        }
        if (!obj[key].is_string()) {
            fail(where + "." + key, "expected a string");
            return fallback;
        }
        return obj[key].get<std::string>();
    }

    Vec3 vec3(const json& obj, const std::string& where, const std::string& key, Vec3 fallback,
              bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(where, "missing key '" + key + "'");
            return fallback;
        }
        const auto& v = obj[key];
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
            !v[2].is_number()) {
            fail(where + "." + key, "expected [x, y, z]");
            return fallback;
        }
        return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }
};

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

const UserSpec* Scenario::find_user(const std::string& id) const {
    for (const auto& u : users)
        if (u.id == id) return &u;
    return nullptr;
}

std::vector<TilePlacement> Scenario::placements() const {
    std::vector<TilePlacement> out;
    for (const auto& wall : floorplan.walls) {
        auto tiles = tile_surface(wall, tile_side_m, true);
        out.insert(out.end(), tiles.begin(), tiles.end());
    }
    return out;
}

std::map<std::string, std::shared_ptr<const Codebook>> Scenario::build_codebooks() const {
    std::map<std::string, std::shared_ptr<const Codebook>> out;
    for (const auto& [id, spec] : codebooks) {
        auto cb = std::make_shared<Codebook>(spec.cell_grid, spec.bias_levels,
                                             spec.steer_efficiency, spec.absorb_efficiency,
                                             channel.frequency_hz);
        for (const auto& e : spec.entries) {
            EmFunction f;
            f.id = e.id;
            f.kind = e.kind == "absorb" ? EmKind::Absorb : EmKind::Steer;
            f.bias = e.bias;
            f.efficiency = e.efficiency;
            cb->insert(f);
        }
        out[id] = std::move(cb);
    }
    return out;
}

std::vector<UserNode> Scenario::build_users() const {
    std::vector<UserNode> out;
    for (const auto& u : users) {
        UserNode n;
        n.id = u.id;
        n.position = u.trajectory ? u.trajectory->waypoints.front() : u.position;
        n.antenna = u.antenna_kind == "cosine_power"
                        ? Antenna::cosine_power(u.boresight, u.beamwidth_deg)
                        : Antenna::isotropic();
        n.tx_power_w = dbm_to_watts(u.tx_power_dbm);
        n.antenna_label = u.antenna_label;
        out.push_back(std::move(n));
    }
    return out;
}

PweGraph Scenario::build() const {
    return build_graph(floorplan, placements(), build_users(), build_codebooks(),
                       channel.frequency_hz, visibility);
}

Scenario parse_scenario_text(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
    }

    Check c;
    Scenario s;
    c.known_keys(doc, "$",
                 {"floorplan", "tiles", "codebooks", "users", "channel", "objectives",
                  "optimizer", "broadcast", "simulation"});

    // floorplan
    if (!doc.contains("floorplan")) {
        c.fail("$", "missing key 'floorplan'");
    } else {
        const auto& fp = doc["floorplan"];
        c.known_keys(fp, "floorplan", {"ceiling_height_m", "walls", "obstacles"});
        s.floorplan.ceiling_height = c.number(fp, "floorplan", "ceiling_height_m", 3.0);
        if (fp.contains("walls") && fp["walls"].is_array()) {
            int i = 0;
            for (const auto& w : fp["walls"]) {
                const std::string where = "floorplan.walls[" + std::to_string(i++) + "]";
                c.known_keys(w, where,
                             {"id", "origin_m", "edge_u_m", "edge_v_m", "coated",
                              "collimating", "specular_efficiency", "codebook"});
                Surface surf;
                surf.id = c.text(w, where, "id", "wall" + std::to_string(i), true);
                surf.origin = c.vec3(w, where, "origin_m", {}, true);
                surf.edge_u = c.vec3(w, where, "edge_u_m", {}, true);
                surf.edge_v = c.vec3(w, where, "edge_v_m", {}, true);
                surf.coated = c.boolean(w, where, "coated", true);
                surf.collimating = c.boolean(w, where, "collimating", true);
                surf.specular_efficiency =
                    c.number(w, where, "specular_efficiency", 1.0);
                surf.codebook_id = c.text(w, where, "codebook", "default");
                s.floorplan.walls.push_back(std::move(surf));
            }
        } else {
            c.fail("floorplan", "missing or non-array 'walls'");
        }
        if (fp.contains("obstacles")) {
            int i = 0;
            for (const auto& o : fp["obstacles"]) {
                const std::string where = "floorplan.obstacles[" + std::to_string(i++) + "]";
                c.known_keys(o, where, {"min_m", "max_m"});
                Box b;
                b.lo = c.vec3(o, where, "min_m", {}, true);
                b.hi = c.vec3(o, where, "max_m", {}, true);
                s.floorplan.obstacles.push_back(b);
            }
        }
    }

    // tiles
    if (doc.contains("tiles")) {
        const auto& t = doc["tiles"];
        c.known_keys(t, "tiles", {"side_length_m"});
        s.tile_side_m = c.number(t, "tiles", "side_length_m", 1.0);
        if (s.tile_side_m <= 0) c.fail("tiles.side_length_m", "must be > 0");
    }

    // codebooks
    if (doc.contains("codebooks")) {
        for (const auto& [id, cb] : doc["codebooks"].items()) {
            const std::string where = "codebooks." + id;
            c.known_keys(cb, where,
                         {"cell_grid", "bias_levels", "steer_efficiency",
                          "absorb_efficiency", "entries"});
            CodebookSpec spec;
            spec.cell_grid = c.integer(cb, where, "cell_grid", 8);
            spec.bias_levels = c.integer(cb, where, "bias_levels", 8);
            spec.steer_efficiency = c.number(cb, where, "steer_efficiency", 0.8);
            spec.absorb_efficiency = c.number(cb, where, "absorb_efficiency", 1.0);
            if (spec.steer_efficiency <= 0 || spec.steer_efficiency > 1)
                c.fail(where + ".steer_efficiency", "must be in (0,1]");
            if (cb.contains("entries")) {
                int i = 0;
                for (const auto& e : cb["entries"]) {
                    const std::string ew = where + ".entries[" + std::to_string(i++) + "]";
                    c.known_keys(e, ew, {"id", "kind", "bias", "efficiency"});
                    CodebookSpec::Entry entry;
                    entry.id = c.text(e, ew, "id", "", true);
                    entry.kind = c.text(e, ew, "kind", "steer");
                    entry.efficiency = c.number(e, ew, "efficiency", 1.0);
                    if (e.contains("bias"))
                        for (const auto& b : e["bias"]) entry.bias.push_back(b.get<int>());
                    spec.entries.push_back(std::move(entry));
                }
            }
            s.codebooks[id] = std::move(spec);
        }
    }
    if (!s.codebooks.count("default")) s.codebooks["default"] = CodebookSpec{};

    // users
    if (!doc.contains("users") || !doc["users"].is_array() || doc["users"].empty()) {
        c.fail("$", "missing or empty 'users'");
    } else {
        int i = 0;
        for (const auto& u : doc["users"]) {
            const std::string where = "users[" + std::to_string(i++) + "]";
            c.known_keys(u, where,
                         {"id", "position_m", "antenna", "tx_power_dbm", "antenna_label",
                          "trajectory"});
            UserSpec spec;
            spec.id = c.text(u, where, "id", "", true);
            spec.position = c.vec3(u, where, "position_m", {}, !u.contains("trajectory"));
            spec.tx_power_dbm = c.number(u, where, "tx_power_dbm", 30.0);
            if (u.contains("antenna_label"))
                spec.antenna_label = c.text(u, where, "antenna_label", "");
            if (u.contains("antenna")) {
                const auto& a = u["antenna"];
                const std::string aw = where + ".antenna";
                c.known_keys(a, aw, {"kind", "boresight", "beamwidth_deg"});
                spec.antenna_kind = c.text(a, aw, "kind", "isotropic");
                spec.boresight = c.vec3(a, aw, "boresight", {0, 0, 1});
                spec.beamwidth_deg = c.number(a, aw, "beamwidth_deg", 80.0);
                if (spec.antenna_kind != "isotropic" && spec.antenna_kind != "cosine_power")
                    c.fail(aw + ".kind", "unknown antenna kind '" + spec.antenna_kind + "'");
                if (spec.beamwidth_deg <= 0 || spec.beamwidth_deg >= 180)
                    c.fail(aw + ".beamwidth_deg", "must be in (0,180)");
            }
            if (u.contains("trajectory")) {
                const auto& tj = u["trajectory"];
                const std::string tw = where + ".trajectory";
                c.known_keys(tj, tw, {"waypoints_m", "speed_mps", "start_time_s"});
                Trajectory traj;
                traj.speed_mps = c.number(tj, tw, "speed_mps", 1.0);
                traj.start_time_s = c.number(tj, tw, "start_time_s", 0.0);
                if (traj.speed_mps <= 0) c.fail(tw + ".speed_mps", "must be > 0");
                if (tj.contains("waypoints_m") && tj["waypoints_m"].is_array()) {
                    for (const auto& w : tj["waypoints_m"]) {
                        if (!w.is_array() || w.size() != 3) {
                            c.fail(tw + ".waypoints_m", "expected [x, y, z] entries");
                            break;
                        }
                        traj.waypoints.push_back(
                            {w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
                    }
                    if (traj.waypoints.size() < 2)
                        c.fail(tw + ".waypoints_m", "needs at least 2 waypoints");
                } else {
                    c.fail(tw, "missing 'waypoints_m'");
                }
                spec.trajectory = std::move(traj);
            }
            s.users.push_back(std::move(spec));
        }
    }

    // channel
    if (doc.contains("channel")) {
        const auto& ch = doc["channel"];
        c.known_keys(ch, "channel",
                     {"frequency_hz", "tx_power_dbm", "min_power_floor_dbm", "max_bounces",
                      "a_near", "a_far", "near_field_radius_m", "include_los",
                      "unintended_fraction", "specular_sharpness", "specular_cutoff_deg",
                      "fresnel_clear_threshold", "fresnel_samples"});
        s.channel.frequency_hz = c.number(ch, "channel", "frequency_hz", 60e9);
        s.channel.tx_power_w = dbm_to_watts(c.number(ch, "channel", "tx_power_dbm", 30.0));
        s.channel.min_power_floor_dbm =
            c.number(ch, "channel", "min_power_floor_dbm", -250.0);
        s.channel.max_bounces = c.integer(ch, "channel", "max_bounces", 50);
        s.channel.a_near = c.number(ch, "channel", "a_near", 1.0);
        s.channel.a_far = c.number(ch, "channel", "a_far", 2.0);
        s.channel.near_field_radius_m = c.number(ch, "channel", "near_field_radius_m", 2.0);
        s.channel.include_los = c.boolean(ch, "channel", "include_los", true);
        s.channel.forwarding.unintended_fraction =
            c.number(ch, "channel", "unintended_fraction", 0.25);
        s.channel.forwarding.specular_sharpness =
            c.number(ch, "channel", "specular_sharpness", 80.0);
        const double cutoff = c.number(ch, "channel", "specular_cutoff_deg", 15.0);
        s.channel.forwarding.specular_cutoff_cos = std::cos(cutoff * M_PI / 180.0);
        s.visibility.clear_threshold =
            c.number(ch, "channel", "fresnel_clear_threshold", 0.6);
        s.visibility.samples = c.integer(ch, "channel", "fresnel_samples", 16);
        if (s.channel.frequency_hz <= 0) c.fail("channel.frequency_hz", "must be > 0");
        if (s.channel.max_bounces < 1) c.fail("channel.max_bounces", "must be >= 1");
        if (!(s.channel.a_near < s.channel.a_far && s.channel.a_far <= 2.0))
            c.fail("channel", "requires a_near < a_far <= 2");
    }

    // objectives
    if (doc.contains("objectives")) {
        int i = 0;
        for (const auto& o : doc["objectives"]) {
            const std::string where = "objectives[" + std::to_string(i++) + "]";
            c.known_keys(o, where,
                         {"tx_id", "rx_id", "metrics", "weights", "eavesdropper_id",
                          "max_functions_per_tile", "forbidden_links",
                          "final_link_perpendicular", "trajectory_vector", "perp_tolerance",
                          "perp_eval_offset_m", "doppler_guard_tolerance"});
            UserObjective obj;
            obj.tx_id = c.text(o, where, "tx_id", "", true);
            obj.rx_id = c.text(o, where, "rx_id", "", true);
            if (o.contains("metrics"))
                for (const auto& m : o["metrics"]) {
                    try {
                        obj.metrics.insert(metric_from_string(m.get<std::string>()));
                    } catch (const UnknownMetric& e) {
                        c.fail(where + ".metrics", e.what());
                    }
                }
            if (obj.metrics.empty()) obj.metrics.insert(Metric::MaxRxPower);
            if (o.contains("weights"))
                for (const auto& [k, v] : o["weights"].items()) {
                    try {
                        const double w = v.get<double>();
                        if (w <= 0) c.fail(where + ".weights", "weights must be positive");
                        obj.weights[metric_from_string(k)] = w;
                    } catch (const UnknownMetric& e) {
                        c.fail(where + ".weights", e.what());
                    }
                }
            obj.eavesdropper_id = c.text(o, where, "eavesdropper_id", "");
            obj.max_functions_per_tile = c.integer(o, where, "max_functions_per_tile", 2);
            if (o.contains("forbidden_links"))
                for (const auto& f : o["forbidden_links"])
                    obj.forbidden_links.push_back(f.get<std::string>());
            obj.final_link_perpendicular =
                c.boolean(o, where, "final_link_perpendicular", false);
            obj.trajectory = c.vec3(o, where, "trajectory_vector", {0, 1, 0});
            obj.perp_tolerance = c.number(o, where, "perp_tolerance", 0.1);
            obj.perp_eval_offset_m = c.number(o, where, "perp_eval_offset_m", 0.0);
            obj.doppler_guard_cos = c.number(o, where, "doppler_guard_tolerance", 0.0);
            s.objectives.push_back(std::move(obj));
        }
    }

    // optimizer
    if (doc.contains("optimizer")) {
        const auto& o = doc["optimizer"];
        c.known_keys(o, "optimizer",
                     {"name", "k", "rounds", "top_n", "spawn_fanout", "release_per_round",
                      "power_threshold_dbm", "pheromone_decay", "reinforcement"});
        s.optimizer.name = c.text(o, "optimizer", "name", "kpaths");
        s.optimizer.k = c.integer(o, "optimizer", "k", 1);
        s.optimizer.rounds = c.integer(o, "optimizer", "rounds", 50);
        s.optimizer.top_n = c.integer(o, "optimizer", "top_n", 3);
        s.optimizer.spawn_fanout = c.integer(o, "optimizer", "spawn_fanout", 3);
        s.optimizer.release_per_round = c.integer(o, "optimizer", "release_per_round", 4);
        s.optimizer.power_threshold_dbm =
            c.number(o, "optimizer", "power_threshold_dbm", -250.0);
        s.optimizer.pheromone_decay = c.number(o, "optimizer", "pheromone_decay", 0.02);
        s.optimizer.reinforcement = c.number(o, "optimizer", "reinforcement", 1.0);
        if (s.optimizer.name != "kpaths" && s.optimizer.name != "lexicographic" &&
            s.optimizer.name != "explorer")
            c.fail("optimizer.name", "unknown optimizer '" + s.optimizer.name + "'");
        if (s.optimizer.k < 1) c.fail("optimizer.k", "must be >= 1");
    }

    // broadcast
    if (doc.contains("broadcast")) {
        const auto& b = doc["broadcast"];
        c.known_keys(b, "broadcast", {"rate_bps", "command_size_bits", "tile_capacity"});
        s.broadcast.rate_bps = c.number(b, "broadcast", "rate_bps", 360e3);
        s.broadcast.command_size_bits = c.number(b, "broadcast", "command_size_bits", 360);
        s.broadcast.tile_capacity = c.integer(b, "broadcast", "tile_capacity", 1000);
        if (s.broadcast.rate_bps <= 0) c.fail("broadcast.rate_bps", "must be > 0");
    }

    // simulation
    if (doc.contains("simulation")) {
        const auto& sim = doc["simulation"];
        c.known_keys(sim, "simulation",
                     {"time_step_s", "duration_s", "modes", "seed", "doppler_window_db"});
        s.simulation.time_step_s = c.number(sim, "simulation", "time_step_s", 0.05);
        if (sim.contains("duration_s"))
            s.simulation.duration_s = c.number(sim, "simulation", "duration_s", 0.0);
        if (sim.contains("doppler_window_db"))
            s.simulation.doppler_window_db =
                c.number(sim, "simulation", "doppler_window_db", 40.0);
        if (sim.contains("modes")) {
            s.simulation.modes.clear();
            for (const auto& m : sim["modes"]) {
                const std::string mode = m.get<std::string>();
                if (mode != "on" && mode != "off")
                    c.fail("simulation.modes", "mode must be 'on' or 'off'");
                s.simulation.modes.push_back(mode);
            }
        }
        s.simulation.seed = static_cast<std::uint64_t>(
            c.integer(sim, "simulation", "seed", 1));
        if (s.simulation.time_step_s <= 0) c.fail("simulation.time_step_s", "must be > 0");
    }

    // cross checks
    {
        std::set<std::string> ids;
        for (const auto& u : s.users)
            if (!ids.insert(u.id).second) c.fail("users", "duplicate user id '" + u.id + "'");
        for (const auto& o : s.objectives) {
            if (!s.find_user(o.tx_id))
                c.fail("objectives", "tx_id '" + o.tx_id + "' is not a user");
            if (!s.find_user(o.rx_id))
                c.fail("objectives", "rx_id '" + o.rx_id + "' is not a user");
        }
        for (const auto& w : s.floorplan.walls)
            if (w.coated && !s.codebooks.count(w.codebook_id))
                c.fail("floorplan.walls", "wall '" + w.id + "' references unknown codebook '" +
                                              w.codebook_id + "'");
        try {
            s.floorplan.validate();
        } catch (const ValidationError& e) {
            for (const auto& issue : e.issues) c.fail("floorplan", issue);
        }
        for (const auto& u : s.users)
            if (u.trajectory) {
                try {
                    u.trajectory->validate();
                } catch (const ValidationError& e) {
                    for (const auto& issue : e.issues)
                        c.fail("users." + u.id + ".trajectory", issue);
                }
            }
    }

    c.finish();
    return s;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    json doc;
    json fp;
    fp["ceiling_height_m"] = s.floorplan.ceiling_height;
    fp["walls"] = json::array();
    for (const auto& w : s.floorplan.walls) {
        json jw;
        jw["id"] = w.id;
        jw["origin_m"] = vec_to_json(w.origin);
        jw["edge_u_m"] = vec_to_json(w.edge_u);
        jw["edge_v_m"] = vec_to_json(w.edge_v);
        jw["coated"] = w.coated;
        jw["collimating"] = w.collimating;
        jw["specular_efficiency"] = w.specular_efficiency;
        jw["codebook"] = w.codebook_id;
        fp["walls"].push_back(jw);
    }
    fp["obstacles"] = json::array();
    for (const auto& o : s.floorplan.obstacles) {
        json jo;
        jo["min_m"] = vec_to_json(o.lo);
        jo["max_m"] = vec_to_json(o.hi);
        fp["obstacles"].push_back(jo);
    }
    doc["floorplan"] = fp;
    doc["tiles"] = {{"side_length_m", s.tile_side_m}};
    json cbs;
    for (const auto& [id, cb] : s.codebooks) {
        json jc;
        jc["cell_grid"] = cb.cell_grid;
        jc["bias_levels"] = cb.bias_levels;
        jc["steer_efficiency"] = cb.steer_efficiency;
        jc["absorb_efficiency"] = cb.absorb_efficiency;
        jc["entries"] = json::array();
        for (const auto& e : cb.entries) {
            json je;
            je["id"] = e.id;
            je["kind"] = e.kind;
            je["bias"] = e.bias;
            je["efficiency"] = e.efficiency;
            jc["entries"].push_back(je);
        }
        cbs[id] = jc;
    }
    doc["codebooks"] = cbs;
    doc["users"] = json::array();
    for (const auto& u : s.users) {
        json ju;
        ju["id"] = u.id;
        ju["position_m"] = vec_to_json(u.trajectory ? u.trajectory->waypoints.front()
                                                    : u.position);
        ju["antenna"] = {{"kind", u.antenna_kind},
                         {"boresight", vec_to_json(u.boresight)},
                         {"beamwidth_deg", u.beamwidth_deg}};
        ju["tx_power_dbm"] = u.tx_power_dbm;
        if (u.antenna_label) ju["antenna_label"] = *u.antenna_label;
        if (u.trajectory) {
            json jt;
            jt["waypoints_m"] = json::array();
            for (const auto& w : u.trajectory->waypoints)
                jt["waypoints_m"].push_back(vec_to_json(w));
            jt["speed_mps"] = u.trajectory->speed_mps;
            jt["start_time_s"] = u.trajectory->start_time_s;
            ju["trajectory"] = jt;
        }
        doc["users"].push_back(ju);
    }
    doc["channel"] = {
        {"frequency_hz", s.channel.frequency_hz},
        {"tx_power_dbm", watts_to_dbm(s.channel.tx_power_w)},
        {"min_power_floor_dbm", s.channel.min_power_floor_dbm},
        {"max_bounces", s.channel.max_bounces},
        {"a_near", s.channel.a_near},
        {"a_far", s.channel.a_far},
        {"near_field_radius_m", s.channel.near_field_radius_m},
        {"include_los", s.channel.include_los},
        {"unintended_fraction", s.channel.forwarding.unintended_fraction},
        {"specular_sharpness", s.channel.forwarding.specular_sharpness},
        {"specular_cutoff_deg",
         std::acos(s.channel.forwarding.specular_cutoff_cos) * 180.0 / M_PI},
        {"fresnel_clear_threshold", s.visibility.clear_threshold},
        {"fresnel_samples", s.visibility.samples},
    };
    doc["objectives"] = json::array();
    for (const auto& o : s.objectives) {
        json jo;
        jo["tx_id"] = o.tx_id;
        jo["rx_id"] = o.rx_id;
        jo["metrics"] = json::array();
        for (Metric m : o.metrics) jo["metrics"].push_back(to_string(m));
        json jw;
        for (const auto& [m, w] : o.weights) jw[to_string(m)] = w;
        jo["weights"] = jw;
        if (!o.eavesdropper_id.empty()) jo["eavesdropper_id"] = o.eavesdropper_id;
        jo["max_functions_per_tile"] = o.max_functions_per_tile;
        jo["forbidden_links"] = o.forbidden_links;
        jo["final_link_perpendicular"] = o.final_link_perpendicular;
        jo["trajectory_vector"] = vec_to_json(o.trajectory);
        jo["perp_tolerance"] = o.perp_tolerance;
        jo["perp_eval_offset_m"] = o.perp_eval_offset_m;
        jo["doppler_guard_tolerance"] = o.doppler_guard_cos;
        doc["objectives"].push_back(jo);
    }
    doc["optimizer"] = {
        {"name", s.optimizer.name},
        {"k", s.optimizer.k},
        {"rounds", s.optimizer.rounds},
        {"top_n", s.optimizer.top_n},
        {"spawn_fanout", s.optimizer.spawn_fanout},
        {"release_per_round", s.optimizer.release_per_round},
        {"power_threshold_dbm", s.optimizer.power_threshold_dbm},
        {"pheromone_decay", s.optimizer.pheromone_decay},
        {"reinforcement", s.optimizer.reinforcement},
    };
    doc["broadcast"] = {
        {"rate_bps", s.broadcast.rate_bps},
        {"command_size_bits", s.broadcast.command_size_bits},
        {"tile_capacity", s.broadcast.tile_capacity},
    };
    json sim;
    sim["time_step_s"] = s.simulation.time_step_s;
    if (s.simulation.duration_s) sim["duration_s"] = *s.simulation.duration_s;
    sim["modes"] = s.simulation.modes;
    sim["seed"] = s.simulation.seed;
    if (s.simulation.doppler_window_db)
        sim["doppler_window_db"] = *s.simulation.doppler_window_db;
    doc["simulation"] = sim;
    return doc.dump(2) + "\n";
}

}  // namespace pwe
