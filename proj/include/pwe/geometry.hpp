// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace pwe {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0 ? *this / n : Vec3{};
    }
    double distance(const Vec3& o) const { return (*this - o).norm(); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Mirror image of direction v about unit normal n.
inline Vec3 reflect(const Vec3& v, const Vec3& n) { return v - 2.0 * v.dot(n) * n; }

// Axis-aligned rectangular surface: origin plus two orthogonal edge vectors.
// The outward normal (into the room) is unit cross(edge_u, edge_v).
struct Surface {
    std::string id;
    Vec3 origin;
    Vec3 edge_u;
    Vec3 edge_v;
    bool coated = true;        // false: plain material, virtual specular-only tiles
    bool collimating = true;   // tile hardware can collimate while steering
    double specular_efficiency = 1.0;
    std::string codebook_id = "default";

    Vec3 normal() const { return edge_u.cross(edge_v).normalized(); }
    double area() const { return edge_u.cross(edge_v).norm(); }
};

// Axis-aligned box obstacle.
struct Box {
    Vec3 lo;
    Vec3 hi;

    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
               p.z >= lo.z && p.z <= hi.z;
    }
    // Euclidean distance from a point to the box (0 inside).
    double distance(const Vec3& p) const {
        double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
        double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
        double dz = std::max({lo.z - p.z, 0.0, p.z - hi.z});
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    bool intersects_segment(const Vec3& a, const Vec3& b) const;
};

struct Floorplan {
    std::vector<Surface> walls;
    std::vector<Box> obstacles;
    double ceiling_height = 0.0;

    // Throws ValidationError listing every violated invariant.
    void validate() const;
};

struct TilePlacement {
    std::string tile_id;
    std::string surface_id;
    Vec3 center;
    Vec3 normal;         // unit, points into the room
    Vec3 axis_u;         // unit in-plane axes spanning the tile square
    Vec3 axis_v;
    double side_length = 0.0;
    bool coated = true;
    bool collimating = true;
    double specular_efficiency = 1.0;
    std::string codebook_id = "default";
};

enum class VisibilityKind { LOS, NLOS, Blocked };

struct Visibility {
    VisibilityKind kind = VisibilityKind::LOS;
    double clearance_ratio = 1.0;    // first-Fresnel-zone clearance fraction in [0,1]
    double attenuation_factor = 1.0; // multiplicative power factor in (0,1]
};

struct VisibilityOptions {
    double clear_threshold = 0.6;  // Fresnel clearance fraction counted as full LOS
    int samples = 16;              // equidistant samples along the segment
    double penalty_db_at_zero = 6.0;
};

// Tiles a rectangular surface with a square grid of the given side length.
// The side must divide both edges within 1e-9 m unless allow_truncation is
// set, in which case a partial last row/column is dropped.
std::vector<TilePlacement> tile_surface(const Surface& surface, double side_length,
                                        bool allow_truncation = true);

// Classifies the p-q segment as blocked, LOS or near-LOS from first-Fresnel
// clearance against the floorplan obstacles, and derives the attenuation
// factor for the near-LOS case.
Visibility visibility(const Vec3& p, const Vec3& q, const Floorplan& plan,
                      double frequency_hz, const VisibilityOptions& opts = {});

}  // namespace pwe
