// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pwe/geometry.hpp"

namespace pwe {

// Piecewise-linear waypoint track walked at constant speed.
struct Trajectory {
    std::vector<Vec3> waypoints;
    double speed_mps = 1.0;
    double start_time_s = 0.0;

    double length_m() const;
    double duration_s() const { return length_m() / speed_mps; }
    // Arc-length parameterized position; throws TimeOutOfRange outside
    // [start, start + duration].
    Vec3 position(double t) const;
    // Unit tangent of the leg active at time t (the next leg exactly at a
    // corner).
    Vec3 direction(double t) const;
    void validate() const;
};

}  // namespace pwe
