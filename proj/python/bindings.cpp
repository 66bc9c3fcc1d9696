// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pwe/explorer.hpp"
#include "pwe/milp_solve.hpp"
#include "pwe/pathfind.hpp"
#include "pwe/scenario_sim.hpp"
#include "pwe/service.hpp"

namespace py = pybind11;
using namespace pwe;

namespace {

PowerDelayProfile pdp_from_pairs(const std::vector<std::pair<double, double>>& entries) {
    // (power_w, delay_s) pairs for the pure metric helpers.
    PowerDelayProfile pdp;
    for (const auto& [p, d] : entries) {
        PathRecord r;
        r.power_w = p;
        r.delay_s = d;
        pdp.entries.push_back(r);
    }
    return pdp;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Graph-driven programmable wireless environment toolkit";
    m.attr("__version__") = "1.0.0";

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<>())
        .def(py::init([](double x, double y, double z) { return Vec3{x, y, z}; }))
        .def_readwrite("x", &Vec3::x)
        .def_readwrite("y", &Vec3::y)
        .def_readwrite("z", &Vec3::z)
        .def("__repr__", [](const Vec3& v) {
            return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " +
                   std::to_string(v.z) + ")";
        });

    py::class_<PathRecord>(m, "PathRecord")
        .def_readonly("power_w", &PathRecord::power_w)
        .def_readonly("delay_s", &PathRecord::delay_s)
        .def_readonly("arrival", &PathRecord::arrival)
        .def_readonly("phase", &PathRecord::phase_radians)
        .def_property_readonly("power_dbm",
                               [](const PathRecord& r) { return watts_to_dbm(r.power_w); });

    py::class_<PowerDelayProfile>(m, "PowerDelayProfile")
        .def_property_readonly(
            "entries", [](const PowerDelayProfile& p) { return p.entries; })
        .def("total_power_w", &PowerDelayProfile::total_power_w)
        .def("__len__", [](const PowerDelayProfile& p) { return p.size(); });

    py::class_<Configuration>(m, "Configuration")
        .def(py::init<>())
        .def("__len__", [](const Configuration& c) { return c.assignment.size(); })
        .def("tiles", [](const Configuration& c) {
            std::vector<std::string> out;
            for (const auto& [tile, fn] : c.assignment) out.push_back(tile);
            return out;
        });

    py::class_<PweGraph>(m, "PweGraph")
        .def("tile_count", [](const PweGraph& g) { return g.tiles().size(); })
        .def("user_count", [](const PweGraph& g) { return g.users().size(); })
        .def("link_count", [](const PweGraph& g) { return g.links().size(); })
        .def("first_contact_tiles",
             [](const PweGraph& g, const std::string& user) {
                 return first_contact_tiles(g, user);
             })
        .def("with_user_position", &PweGraph::with_user_position);

    py::class_<Scenario>(m, "Scenario")
        .def("build", &Scenario::build)
        .def_property_readonly("users", [](const Scenario& s) {
            std::vector<std::string> out;
            for (const auto& u : s.users) out.push_back(u.id);
            return out;
        });

    py::class_<TimeSample>(m, "TimeSample")
        .def_readonly("time_s", &TimeSample::time_s)
        .def_readonly("distance_m", &TimeSample::distance_m)
        .def_readonly("doppler_spread_hz", &TimeSample::doppler_spread_hz)
        .def_readonly("rx_power_dbm", &TimeSample::rx_power_dbm)
        .def_readonly("config_age_s", &TimeSample::config_age_s);

    py::class_<TimeSeries>(m, "TimeSeries")
        .def_readonly("mode", &TimeSeries::mode)
        .def_readonly("samples", &TimeSeries::samples);

    m.def("load_scenario", &parse_scenario, py::arg("path"));
    m.def("load_scenario_text", &parse_scenario_text, py::arg("json_text"));
    m.def("serialize_scenario", &serialize_scenario);

    m.def(
        "compute_pdp",
        [](const PweGraph& g, const Scenario& s, const std::string& tx, const std::string& rx,
           const Configuration* config) {
            return compute_pdp(g, config ? *config : Configuration{}, tx, rx, s.channel);
        },
        py::arg("graph"), py::arg("scenario"), py::arg("tx"), py::arg("rx"),
        py::arg("config") = nullptr);

    m.def(
        "rms_delay_spread",
        [](const PowerDelayProfile& pdp) { return rms_delay_spread(pdp); });
    m.def("rms_delay_spread_of",
          [](const std::vector<std::pair<double, double>>& entries) {
              return rms_delay_spread(pdp_from_pairs(entries));
          },
          "RMS delay spread from (power_w, delay_s) pairs");
    m.def(
        "doppler_spread",
        [](const PowerDelayProfile& pdp, const Vec3& velocity, double frequency_hz) {
            return doppler_spread(pdp, velocity, frequency_hz);
        },
        py::arg("pdp"), py::arg("rx_velocity"), py::arg("frequency_hz"));

    m.def(
        "merge_bias",
        [](const std::vector<std::pair<std::vector<int>, double>>& functions) {
            std::vector<EmFunction> fns;
            int i = 0;
            for (const auto& [bias, eff] : functions) {
                EmFunction f;
                f.id = "f" + std::to_string(i++);
                f.kind = EmKind::Steer;
                f.bias = bias;
                f.efficiency = eff;
                fns.push_back(std::move(f));
            }
            const MergedFunction m2 = merge(fns);
            std::vector<double> effs;
            for (const auto& f : fns) effs.push_back(m2.per_constituent_efficiency.at(f.id));
            return std::make_pair(m2.merged_bias, effs);
        },
        "Mode-rule merge over (bias, efficiency) pairs; returns (merged bias, kept "
        "efficiencies)");

    m.def(
        "configure_kpaths",
        [](const PweGraph& g, const Scenario& s, int k) {
            return k_shortest_configure(g, s.objectives, k, s.channel).config;
        },
        py::arg("graph"), py::arg("scenario"), py::arg("k") = 1);

    m.def("run_scenario", &run_scenario);
    m.def("run_scenario_mode", &run_scenario_mode);
    m.def("timeseries_to_csv", &timeseries_to_csv);
    m.def("pdp_to_csv", &pdp_to_csv);
    m.def(
        "handle_pdp_request",
        [](const PweGraph& g, const Scenario& s, const std::string& request) {
            return handle_pdp_request(g, Configuration{}, s.channel, request);
        },
        py::arg("graph"), py::arg("scenario"), py::arg("request"));
}
