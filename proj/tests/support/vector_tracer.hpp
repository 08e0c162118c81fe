#pragma once

// Brute-force 3D vector ray tracer used as an independent oracle for the 2D
// meridional kernel. Shares surface SHAPES with the library (they must agree
// on what is being traced) but none of the ray algebra: intersections,
// reflection and refraction are derived here from 3D vector identities.

#include <vector>

#include "ionmirror/geometry.hpp"

namespace ionmirror::testing {

struct Vec3d {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3d operator+(const Vec3d& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3d operator-(const Vec3d& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3d operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3d& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
    Vec3d normalized() const;
};

struct Ray3D {
    Vec3d position;   // (x, y, z) with the optical axis along z
    Vec3d direction;  // unit
};

/// Trace through the same surface list as the 2D system. Rays must start in
/// the y = 0 plane with direction in that plane for meridional comparison,
/// but the math is full 3D.
Ray3D trace_3d(const geometry::OpticalSystem& system, const Ray3D& ray);

/// Embed a meridional ray into 3D (meridional plane y = 0, r -> x).
Ray3D embed(const geometry::MeridionalRay& ray);

}  // namespace ionmirror::testing
