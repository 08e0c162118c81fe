#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionmirror/numeric.hpp"

// Everything here is a pure function of its inputs: rays can be evaluated in
// parallel freely, and fan-level reductions stay bit-reproducible as long as
// results are accumulated in input order.

namespace ionmirror::geometry {

/// A light ray in the (z, r) meridional plane. r is signed so rays may cross
/// the optical axis; u is the direction angle to the axis in (-pi, pi].
/// Units are millimeters and radians throughout.
struct MeridionalRay {
    double z = 0.0;
    double r = 0.0;
    double u = 0.0;

    MeridionalRay propagated(double s) const {
        return {z + s * std::cos(u), r + s * std::sin(u), u};
    }
    double dir_z() const { return std::cos(u); }
    double dir_r() const { return std::sin(u); }
};

struct TraceError : std::runtime_error {
    explicit TraceError(const std::string& what) : std::runtime_error(what) {}
    int surface_index = -1;  // annotated by trace()
};
struct NoIntersection : TraceError {
    NoIntersection() : TraceError("ray does not reach the surface") {}
};
struct Vignetted : TraceError {
    explicit Vignetted(double radius_mm)
        : TraceError("ray vignetted at |r| = " + std::to_string(radius_mm) + " mm"),
          radius(radius_mm) {}
    double radius;
};
struct TotalInternalReflection : TraceError {
    TotalInternalReflection() : TraceError("total internal reflection") {}
};

/// Rotationally symmetric sag profile z(r) about a surface vertex: a
/// polynomial sum c_j r^j (j = 0..10), an interpolated sample table, or the
/// exact antiderivative of a dz/dr slope field (the synthesis output, where
/// the slope must be reproduced exactly at every radius).
/// Even symmetry in r: value(-r) = value(r), slope(-r) = -slope(r).
class SagProfile {
public:
    SagProfile() = default;

    static SagProfile polynomial(std::vector<double> coefficients);
    static SagProfile sampled(std::vector<double> r, std::vector<double> z);
    static SagProfile integrated_slope(numeric::PchipInterpolant slope_field);

    double value(double r) const;
    double slope(double r) const;

    bool is_polynomial() const { return kind_ == Kind::Polynomial; }
    const std::vector<double>& coefficients() const { return poly_; }

private:
    enum class Kind { Polynomial, Sampled, IntegratedSlope };
    Kind kind_ = Kind::Polynomial;
    std::vector<double> poly_;               // c_0..c_n when polynomial
    numeric::PchipInterpolant interpolant_;  // z(r) samples or the slope field
};

enum class SurfaceKind {
    SphericalMirror,
    FlatInterface,
    AsphericInterface,
    AsphericMirror,  // mirror with a general sag profile (exact parabola baseline)
};

/// One optical surface: position, shape, clear aperture and the refractive
/// indices on either side (mirrors keep n_after = n_before).
struct SurfaceElement {
    SurfaceKind kind = SurfaceKind::FlatInterface;
    double vertex_z = 0.0;
    double curvature_radius = 0.0;  // mirrors only; center sits at vertex_z + curvature_radius
    SagProfile sag;                 // aspheric kinds only
    double aperture_radius = 0.0;
    double n_before = 1.0;
    double n_after = 1.0;

    static SurfaceElement spherical_mirror(double vertex_z, double curvature_radius,
                                           double aperture_radius, double n = 1.0);
    static SurfaceElement flat_interface(double vertex_z, double aperture_radius,
                                         double n_before, double n_after);
    static SurfaceElement aspheric_interface(double vertex_z, double aperture_radius,
                                             double n_before, double n_after, SagProfile sag);
    static SurfaceElement aspheric_mirror(double vertex_z, double aperture_radius,
                                          SagProfile sag, double n = 1.0);

    bool is_mirror() const {
        return kind == SurfaceKind::SphericalMirror || kind == SurfaceKind::AsphericMirror;
    }
    /// Surface axial coordinate at radial height r.
    double surface_z(double r) const;
    /// dz/dr of the surface profile at height r.
    double surface_slope(double r) const;
};

struct Intersection {
    double z = 0.0;
    double r = 0.0;
    double path_length = 0.0;
};

/// First intersection of the ray with the surface at positive path length.
/// Spherical mirrors solve the circle exactly (vertex-side branch); sag
/// surfaces run safeguarded Newton seeded by the flat intersection, with a
/// bisection fallback. Residual |z - surface_z(r)| < 1e-12 mm.
Intersection intersect(const MeridionalRay& ray, const SurfaceElement& surface);

/// Specular reflection about the local surface normal.
MeridionalRay reflect(const MeridionalRay& ray, const SurfaceElement& surface);

/// Snell refraction at the local normal; throws TotalInternalReflection when
/// sin(theta_t) would exceed 1.
MeridionalRay refract(const MeridionalRay& ray, const SurfaceElement& surface);

struct TraceEvent {
    int surface_index = 0;
    double z = 0.0;
    double r = 0.0;
    double path_length = 0.0;
    double u_before = 0.0;
    double u_after = 0.0;
    double snell_residual = 0.0;  // |n_i sin(th_i) - n_t sin(th_t)|, 0 for mirrors
};

struct TraceResult {
    MeridionalRay ray;               // after the last surface
    std::vector<TraceEvent> events;  // one per surface, in traversal order
};

/// Surfaces traversed in a single sequence. After a mirror the list continues
/// in the order the reversed ray meets the following surfaces; all vertex_z
/// stay in one global frame.
struct OpticalSystem {
    std::vector<SurfaceElement> surfaces;
    double wavelength_nm = 493.4;
};

/// Propagate the ray through every surface in order. Per-surface errors are
/// rethrown with surface_index set.
TraceResult trace(const OpticalSystem& system, const MeridionalRay& ray);

/// The same system traversed backwards (surface order and index sides swapped).
OpticalSystem reversed(const OpticalSystem& system);

}  // namespace ionmirror::geometry
