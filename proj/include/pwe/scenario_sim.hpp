// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pwe/scenario.hpp"

namespace pwe {

struct TimeSample {
    double time_s = 0.0;
    double distance_m = 0.0;
    double doppler_spread_hz = 0.0;
    double rx_power_dbm = 0.0;
    double config_age_s = 0.0;
};

struct TimeSeries {
    std::string mode;  // "on" or "off"
    std::vector<TimeSample> samples;
};

// Controller position prediction along the announced trajectory.
Vec3 predict_position(const Trajectory& trajectory, double t);

// Time-stepped run of one mode. The controller computes each configuration
// for the receiver position predicted at the next deploy instant; deploys
// happen every schedule_size/rate seconds; between deploys the stale
// configuration serves the moving receiver. "off" leaves every tile
// deactivated (natural specular behavior).
TimeSeries run_scenario_mode(const Scenario& scenario, const PweGraph& graph,
                             const std::string& mode);

// Both series per the scenario's modes list.
std::vector<TimeSeries> run_scenario(const Scenario& scenario);

// The config-age sawtooth by traveled distance, for freshness analysis.
std::vector<std::pair<double, double>> configuration_age_profile(const TimeSeries& series);

// CSV: time_s, distance_m, doppler_spread_hz, rx_power_dbm, config_age_s, mode.
std::string timeseries_to_csv(const TimeSeries& series);

}  // namespace pwe
