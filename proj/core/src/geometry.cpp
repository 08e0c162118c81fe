#include "ionmirror/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ionmirror::geometry {

namespace {

constexpr double kSagTolMm = 1e-12;
constexpr double kMinPath = 1e-9;  // ignore the surface the ray starts on
constexpr int kNewtonMaxIter = 50;

double wrap_angle(double u) {
    while (u > M_PI) u -= 2.0 * M_PI;
    while (u <= -M_PI) u += 2.0 * M_PI;
    return u;
}

}  // namespace

SagProfile SagProfile::polynomial(std::vector<double> coefficients) {
    SagProfile p;
    if (coefficients.empty()) coefficients.push_back(0.0);
    p.kind_ = Kind::Polynomial;
    p.poly_ = std::move(coefficients);
    return p;
}

SagProfile SagProfile::sampled(std::vector<double> r, std::vector<double> z) {
    SagProfile p;
    p.kind_ = Kind::Sampled;
    p.interpolant_ = numeric::PchipInterpolant(std::move(r), std::move(z),
                                               numeric::PchipInterpolant::Extension::Linear);
    return p;
}

SagProfile SagProfile::integrated_slope(numeric::PchipInterpolant slope_field) {
    SagProfile p;
    p.kind_ = Kind::IntegratedSlope;
    p.interpolant_ = std::move(slope_field);
    return p;
}

double SagProfile::value(double r) const {
    const double x = std::abs(r);
    switch (kind_) {
        case Kind::Sampled:
            return interpolant_.value(x);
        case Kind::IntegratedSlope:
            return interpolant_.integral(x);
        case Kind::Polynomial:
            break;
    }
    if (poly_.empty()) return 0.0;
    double v = 0.0;
    for (std::size_t j = poly_.size(); j-- > 0;) v = v * x + poly_[j];
    return v;
}

double SagProfile::slope(double r) const {
    const double x = std::abs(r);
    double d = 0.0;
    switch (kind_) {
        case Kind::Sampled:
            d = interpolant_.derivative(x);
            break;
        case Kind::IntegratedSlope:
            d = interpolant_.value(x);
            break;
        case Kind::Polynomial:
            for (std::size_t j = poly_.size(); j-- > 1;) {
                d = d * x + static_cast<double>(j) * poly_[j];
            }
            break;
    }
    return r < 0.0 ? -d : d;
}

namespace {
void require_positive_aperture(double aperture_radius) {
    if (aperture_radius <= 0.0) throw std::invalid_argument("aperture radius must be positive");
}
}  // namespace

SurfaceElement SurfaceElement::spherical_mirror(double vertex_z, double curvature_radius,
                                                double aperture_radius, double n) {
    if (curvature_radius == 0.0) throw std::invalid_argument("mirror curvature radius must be nonzero");
    require_positive_aperture(aperture_radius);
    SurfaceElement s;
    s.kind = SurfaceKind::SphericalMirror;
    s.vertex_z = vertex_z;
    s.curvature_radius = curvature_radius;
    s.aperture_radius = aperture_radius;
    s.n_before = s.n_after = n;
    return s;
}

SurfaceElement SurfaceElement::flat_interface(double vertex_z, double aperture_radius,
                                              double n_before, double n_after) {
    require_positive_aperture(aperture_radius);
    SurfaceElement s;
    s.kind = SurfaceKind::FlatInterface;
    s.vertex_z = vertex_z;
    s.aperture_radius = aperture_radius;
    s.n_before = n_before;
    s.n_after = n_after;
    return s;
}

SurfaceElement SurfaceElement::aspheric_interface(double vertex_z, double aperture_radius,
                                                  double n_before, double n_after,
                                                  SagProfile sag) {
    require_positive_aperture(aperture_radius);
    SurfaceElement s;
    s.kind = SurfaceKind::AsphericInterface;
    s.vertex_z = vertex_z;
    s.aperture_radius = aperture_radius;
    s.n_before = n_before;
    s.n_after = n_after;
    s.sag = std::move(sag);
    return s;
}

SurfaceElement SurfaceElement::aspheric_mirror(double vertex_z, double aperture_radius,
                                               SagProfile sag, double n) {
    require_positive_aperture(aperture_radius);
    SurfaceElement s;
    s.kind = SurfaceKind::AsphericMirror;
    s.vertex_z = vertex_z;
    s.aperture_radius = aperture_radius;
    s.n_before = s.n_after = n;
    s.sag = std::move(sag);
    return s;
}

double SurfaceElement::surface_z(double r) const {
    switch (kind) {
        case SurfaceKind::SphericalMirror: {
            const double R = curvature_radius;
            const double zc = vertex_z + R;
            const double root = std::sqrt(R * R - r * r);
            return R > 0.0 ? zc - root : zc + root;
        }
        case SurfaceKind::FlatInterface:
            return vertex_z;
        default:
            return vertex_z + sag.value(r);
    }
}

double SurfaceElement::surface_slope(double r) const {
    switch (kind) {
        case SurfaceKind::SphericalMirror: {
            const double R = curvature_radius;
            const double root = std::sqrt(R * R - r * r);
            return R > 0.0 ? r / root : -r / root;
        }
        case SurfaceKind::FlatInterface:
            return 0.0;
        default:
            return sag.slope(r);
    }
}

namespace {

Intersection check_aperture(Intersection hit, const SurfaceElement& surface) {
    if (std::abs(hit.r) > surface.aperture_radius) throw Vignetted(hit.r);
    return hit;
}

Intersection intersect_sphere(const MeridionalRay& ray, const SurfaceElement& s) {
    const double R = s.curvature_radius;
    const double zc = s.vertex_z + R;
    const double dz = ray.dir_z(), dr = ray.dir_r();
    const double pz = ray.z - zc, pr = ray.r;
    // |p + s d|^2 = R^2 with |d| = 1
    const double b = pz * dz + pr * dr;
    const double c = pz * pz + pr * pr - R * R;
    const double disc = b * b - c;
    if (disc < 0.0) throw NoIntersection{};
    const double sq = std::sqrt(disc);
    double best = -1.0;
    for (double sol : {-b - sq, -b + sq}) {
        if (sol <= kMinPath) continue;
        const double zh = ray.z + sol * dz;
        // keep the vertex-side branch of the circle
        if ((zh - zc) * R < 0.0 && (best < 0.0 || sol < best)) best = sol;
    }
    if (best < 0.0) throw NoIntersection{};
    return {ray.z + best * dz, ray.r + best * dr, best};
}

Intersection intersect_flat(const MeridionalRay& ray, const SurfaceElement& s) {
    const double dz = ray.dir_z();
    if (std::abs(dz) < 1e-15) throw NoIntersection{};
    const double t = (s.vertex_z - ray.z) / dz;
    if (t <= kMinPath) throw NoIntersection{};
    return {s.vertex_z, ray.r + t * ray.dir_r(), t};
}

Intersection intersect_sag(const MeridionalRay& ray, const SurfaceElement& s) {
    const double dz = ray.dir_z(), dr = ray.dir_r();
    if (std::abs(dz) < 1e-15) throw NoIntersection{};

    auto residual = [&](double t) {
        const double z = ray.z + t * dz;
        const double r = ray.r + t * dr;
        return z - s.vertex_z - s.sag.value(r);
    };

    // Newton on path length, seeded by the flat intersection.
    double t = (s.vertex_z - ray.z) / dz;
    if (t <= kMinPath) throw NoIntersection{};
    bool converged = false;
    for (int i = 0; i < kNewtonMaxIter; ++i) {
        const double f = residual(t);
        if (std::abs(f) < kSagTolMm) {
            converged = true;
            break;
        }
        const double r = ray.r + t * dr;
        const double df = dz - s.sag.slope(r) * dr;
        if (df == 0.0) break;
        t -= f / df;
        if (t <= 0.0) break;
    }
    if (!converged) {
        // bisection fallback: bracket around the flat seed
        double lo = (s.vertex_z - ray.z) / dz, hi = lo;
        double flo = residual(lo);
        double step = std::max(1e-3, 0.05 * std::abs(lo));
        bool bracketed = false;
        for (int i = 0; i < 60 && !bracketed; ++i) {
            lo -= step;
            hi += step;
            step *= 1.5;
            if (lo < kMinPath) lo = kMinPath;
            flo = residual(lo);
            if (flo * residual(hi) <= 0.0) bracketed = true;
        }
        if (!bracketed) throw NoIntersection{};
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = residual(mid);
            if (std::abs(fm) < kSagTolMm) break;
            if (flo * fm <= 0.0) {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        t = 0.5 * (lo + hi);
    }
    if (t <= kMinPath) throw NoIntersection{};
    return {ray.z + t * dz, ray.r + t * dr, t};
}

// Unit surface normal at height r; orientation unimportant to the callers.
void surface_normal(const SurfaceElement& s, double z, double r, double& nz, double& nr) {
    if (s.kind == SurfaceKind::SphericalMirror) {
        const double R = s.curvature_radius;
        const double zc = s.vertex_z + R;
        nz = (zc - z) / std::abs(R);
        nr = -r / std::abs(R);
    } else {
        const double m = s.surface_slope(r);
        const double inv = 1.0 / std::hypot(1.0, m);
        nz = inv;
        nr = -m * inv;
    }
}

}  // namespace

Intersection intersect(const MeridionalRay& ray, const SurfaceElement& surface) {
    switch (surface.kind) {
        case SurfaceKind::SphericalMirror:
            return check_aperture(intersect_sphere(ray, surface), surface);
        case SurfaceKind::FlatInterface:
            return check_aperture(intersect_flat(ray, surface), surface);
        default:
            return check_aperture(intersect_sag(ray, surface), surface);
    }
}

MeridionalRay reflect(const MeridionalRay& ray, const SurfaceElement& surface) {
    const Intersection hit = intersect(ray, surface);
    double nz, nr;
    surface_normal(surface, hit.z, hit.r, nz, nr);
    const double dz = ray.dir_z(), dr = ray.dir_r();
    const double dn = dz * nz + dr * nr;
    const double oz = dz - 2.0 * dn * nz;
    const double orr = dr - 2.0 * dn * nr;
    return {hit.z, hit.r, wrap_angle(std::atan2(orr, oz))};
}

MeridionalRay refract(const MeridionalRay& ray, const SurfaceElement& surface) {
    const Intersection hit = intersect(ray, surface);
    double nz, nr;
    surface_normal(surface, hit.z, hit.r, nz, nr);
    double dz = ray.dir_z(), dr = ray.dir_r();
    // point the normal against the incident ray
    if (dz * nz + dr * nr > 0.0) {
        nz = -nz;
        nr = -nr;
    }
    const double ci = -(dz * nz + dr * nr);
    const double eta = surface.n_before / surface.n_after;
    const double k = 1.0 - eta * eta * (1.0 - ci * ci);
    if (k < 0.0) throw TotalInternalReflection{};
    const double f = eta * ci - std::sqrt(k);
    const double tz = eta * dz + f * nz;
    const double tr = eta * dr + f * nr;
    return {hit.z, hit.r, wrap_angle(std::atan2(tr, tz))};
}

TraceResult trace(const OpticalSystem& system, const MeridionalRay& ray) {
    TraceResult result;
    result.ray = ray;
    result.events.reserve(system.surfaces.size());
    for (std::size_t i = 0; i < system.surfaces.size(); ++i) {
        const SurfaceElement& s = system.surfaces[i];
        try {
            const Intersection hit = intersect(result.ray, s);
            const MeridionalRay out =
                s.is_mirror() ? reflect(result.ray, s) : refract(result.ray, s);
            TraceEvent ev;
            ev.surface_index = static_cast<int>(i);
            ev.z = hit.z;
            ev.r = hit.r;
            ev.path_length = hit.path_length;
            ev.u_before = result.ray.u;
            ev.u_after = out.u;
            if (!s.is_mirror()) {
                double nz, nr;
                surface_normal(s, hit.z, hit.r, nz, nr);
                const double normal_angle = std::atan2(nr, nz);
                const double si = std::sin(result.ray.u - normal_angle);
                const double st = std::sin(out.u - normal_angle);
                ev.snell_residual = std::abs(std::abs(s.n_before * si) - std::abs(s.n_after * st));
            }
            result.events.push_back(ev);
            result.ray = out;
        } catch (TraceError& e) {
            e.surface_index = static_cast<int>(i);
            throw;
        }
    }
    return result;
}

OpticalSystem reversed(const OpticalSystem& system) {
    OpticalSystem out;
    out.wavelength_nm = system.wavelength_nm;
    out.surfaces.assign(system.surfaces.rbegin(), system.surfaces.rend());
    for (SurfaceElement& s : out.surfaces) std::swap(s.n_before, s.n_after);
    return out;
}

}  // namespace ionmirror::geometry
