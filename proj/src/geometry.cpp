// SPDX-License-Identifier: Apache-2.0
#include "pwe/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "pwe/errors.hpp"

namespace pwe {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kDivisionTolerance = 1e-9;
}  // namespace

bool Box::intersects_segment(const Vec3& a, const Vec3& b) const {
    // Slab test over the parametric segment a + t (b - a), t in [0,1].
    // A tiny shrink keeps segments that merely touch a face (tiles sit on
    // obstacle faces) from reading as blocked.
    constexpr double eps = 1e-9;
    double t0 = 0.0, t1 = 1.0;
    const double lo_[3] = {lo.x + eps, lo.y + eps, lo.z + eps};
    const double hi_[3] = {hi.x - eps, hi.y - eps, hi.z - eps};
    const double a_[3] = {a.x, a.y, a.z};
    const double d_[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d_[i]) < 1e-15) {
            if (a_[i] < lo_[i] || a_[i] > hi_[i]) return false;
            continue;
        }
        double inv = 1.0 / d_[i];
        double tn = (lo_[i] - a_[i]) * inv;
        double tf = (hi_[i] - a_[i]) * inv;
        if (tn > tf) std::swap(tn, tf);
        t0 = std::max(t0, tn);
        t1 = std::min(t1, tf);
        if (t0 > t1) return false;
    }
    return true;
}

void Floorplan::validate() const {
    std::vector<std::string> issues;
    if (ceiling_height <= 0.0)
        issues.push_back("ceiling_height must be > 0");
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& w : walls) {
        if (w.area() <= 0.0)
            issues.push_back("wall '" + w.id + "' has zero area");
        if (std::abs(w.edge_u.dot(w.edge_v)) > 1e-9)
            issues.push_back("wall '" + w.id + "' edges are not orthogonal");
        for (const Vec3& c : {w.origin, w.origin + w.edge_u, w.origin + w.edge_v,
                              w.origin + w.edge_u + w.edge_v}) {
            lo.x = std::min(lo.x, c.x); lo.y = std::min(lo.y, c.y); lo.z = std::min(lo.z, c.z);
            hi.x = std::max(hi.x, c.x); hi.y = std::max(hi.y, c.y); hi.z = std::max(hi.z, c.z);
        }
    }
    if (!walls.empty()) {
        constexpr double slack = 1e-6;
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            const Box& b = obstacles[i];
            if (b.lo.x > b.hi.x || b.lo.y > b.hi.y || b.lo.z > b.hi.z)
                issues.push_back("obstacle #" + std::to_string(i) + " has inverted corners");
            if (b.lo.x < lo.x - slack || b.lo.y < lo.y - slack || b.lo.z < lo.z - slack ||
                b.hi.x > hi.x + slack || b.hi.y > hi.y + slack || b.hi.z > hi.z + slack)
                issues.push_back("obstacle #" + std::to_string(i) +
                                 " lies outside the wall bounding volume");
        }
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::vector<TilePlacement> tile_surface(const Surface& surface, double side_length,
                                        bool allow_truncation) {
    if (side_length <= 0.0)
        throw SideLengthNonPositive("side_length must be > 0, got " +
                                    std::to_string(side_length));
    const double len_u = surface.edge_u.norm();
    const double len_v = surface.edge_v.norm();
    if (len_u <= 0.0 || len_v <= 0.0 || surface.area() <= 0.0)
        throw ZeroAreaSurface("surface '" + surface.id + "' has zero area");

    auto count_along = [&](double len) -> int {
        double q = len / side_length;
        double r = std::round(q);
        if (std::abs(len - r * side_length) <= kDivisionTolerance && r >= 1.0)
            return static_cast<int>(r);
        if (!allow_truncation)
            throw ZeroAreaSurface("side_length " + std::to_string(side_length) +
                                  " does not divide surface '" + surface.id + "' edge " +
                                  std::to_string(len) + " and truncation is not permitted");
        return static_cast<int>(std::floor(q));
    };

    const int nu = count_along(len_u);
    const int nv = count_along(len_v);
    const Vec3 du = surface.edge_u / len_u;
    const Vec3 dv = surface.edge_v / len_v;
    const Vec3 n = surface.normal();

    std::vector<TilePlacement> out;
    out.reserve(static_cast<std::size_t>(nu) * nv);
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            TilePlacement t;
            t.tile_id = surface.id + "_" + std::to_string(i) + "_" + std::to_string(j);
            t.surface_id = surface.id;
            t.center = surface.origin + du * ((i + 0.5) * side_length) +
                       dv * ((j + 0.5) * side_length);
            t.normal = n;
            t.axis_u = du;
            t.axis_v = dv;
            t.side_length = side_length;
            t.coated = surface.coated;
            t.collimating = surface.collimating;
            t.specular_efficiency = surface.specular_efficiency;
            t.codebook_id = surface.codebook_id;
            out.push_back(std::move(t));
        }
    }
    return out;
}

Visibility visibility(const Vec3& p, const Vec3& q, const Floorplan& plan,
                      double frequency_hz, const VisibilityOptions& opts) {
    const double d = p.distance(q);
    if (d <= 0.0) throw DegeneratePoints("visibility endpoints coincide");
    if (frequency_hz <= 0.0) throw Error("frequency_hz must be > 0");

    for (const auto& box : plan.obstacles)
        if (box.intersects_segment(p, q))
            return {VisibilityKind::Blocked, 0.0, 0.0};

    if (plan.obstacles.empty())
        return {VisibilityKind::LOS, 1.0, 1.0};

    // Clearance fraction of the first Fresnel ellipsoid, sampled at
    // equidistant interior points.
    const double lambda = kSpeedOfLight / frequency_hz;
    double clearance = 1.0;
    const int n = std::max(1, opts.samples);
    for (int i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) / (n + 1);
        const Vec3 s = p + (q - p) * t;
        const double d1 = d * t;
        const double d2 = d * (1.0 - t);
        const double r1 = std::sqrt(lambda * d1 * d2 / d);
        if (r1 <= 0.0) continue;
        for (const auto& box : plan.obstacles) {
            const double c = std::min(1.0, box.distance(s) / r1);
            clearance = std::min(clearance, c);
        }
    }

    if (clearance >= opts.clear_threshold)
        return {VisibilityKind::LOS, clearance, 1.0};

    const double deficit = (opts.clear_threshold - clearance) / opts.clear_threshold;
    const double att = std::pow(10.0, -opts.penalty_db_at_zero * deficit / 10.0);
    return {VisibilityKind::NLOS, clearance, att};
}

}  // namespace pwe
