// SPDX-License-Identifier: Apache-2.0
#include "pwe/trajectory.hpp"

#include "pwe/errors.hpp"

namespace pwe {

void Trajectory::validate() const {
    std::vector<std::string> issues;
    if (waypoints.size() < 2) issues.push_back("trajectory needs at least 2 waypoints");
    if (speed_mps <= 0.0) issues.push_back("speed_mps must be > 0");
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

double Trajectory::length_m() const {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
        len += waypoints[i].distance(waypoints[i + 1]);
    return len;
}

Vec3 Trajectory::position(double t) const {
    validate();
    const double s = (t - start_time_s) * speed_mps;
    if (s < -1e-9 || s > length_m() + 1e-9)
        throw TimeOutOfRange("time " + std::to_string(t) + " outside the trajectory");
    double remaining = std::max(0.0, s);
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        const double leg = waypoints[i].distance(waypoints[i + 1]);
        if (remaining <= leg || i + 2 == waypoints.size()) {
            if (leg <= 0.0) return waypoints[i];
            const double f = std::min(1.0, remaining / leg);
            return waypoints[i] + (waypoints[i + 1] - waypoints[i]) * f;
        }
        remaining -= leg;
    }
    return waypoints.back();
}

Vec3 Trajectory::direction(double t) const {
    validate();
    double remaining = std::max(0.0, (t - start_time_s) * speed_mps);
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        const double leg = waypoints[i].distance(waypoints[i + 1]);
        if (remaining < leg || i + 2 == waypoints.size())
            return (waypoints[i + 1] - waypoints[i]).normalized();
        remaining -= leg;
    }
    return (waypoints.back() - waypoints[waypoints.size() - 2]).normalized();
}

}  // namespace pwe
