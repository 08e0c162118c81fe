#include "ionmirror/trap.hpp"

#include <algorithm>
#include <cmath>

namespace ionmirror::trap {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps0 = 8.8541878128e-12;      // F/m
constexpr double kElementaryCharge = 1.602176634e-19;  // C
constexpr double kAmu = 1.66053906660e-27;      // kg
constexpr double kMathieuStabilityLimit = 0.908;
constexpr double kOrbitRadiusLimitM = 0.5e-3;

struct LineCharge {
    double x = 0.0, y = 0.0;  // m
    double sign = 1.0;
};

// Sources plus (optionally) their images across the plane x = -d.
std::vector<LineCharge> charge_set(const TrapSystem& trap, bool with_images) {
    std::vector<LineCharge> set;
    set.reserve(with_images ? 8 : 4);
    for (const Rod& rod : trap.rods) {
        set.push_back({rod.x_mm * 1e-3, rod.y_mm * 1e-3, static_cast<double>(rod.sign)});
    }
    if (with_images && trap.plane_distance_mm) {
        const double d = *trap.plane_distance_mm * 1e-3;
        for (const Rod& rod : trap.rods) {
            set.push_back({-2.0 * d - rod.x_mm * 1e-3, rod.y_mm * 1e-3,
                           -static_cast<double>(rod.sign)});
        }
    }
    return set;
}

// Transverse field (V/m) of unit-amplitude line charges at (x, y) in meters.
void line_field(const std::vector<LineCharge>& set, double lambda, double x, double y,
                double& ex, double& ey) {
    ex = ey = 0.0;
    for (const LineCharge& c : set) {
        const double dx = x - c.x, dy = y - c.y;
        const double r2 = dx * dx + dy * dy;
        const double k = c.sign * lambda / (2.0 * kPi * kEps0 * r2);
        ex += k * dx;
        ey += k * dy;
    }
}

// Jacobian d(ex,ey)/d(x,y) of the line-charge field, for the pseudopotential gradient.
void line_field_jacobian(const std::vector<LineCharge>& set, double lambda, double x, double y,
                         double& jxx, double& jxy, double& jyy) {
    jxx = jxy = jyy = 0.0;
    for (const LineCharge& c : set) {
        const double dx = x - c.x, dy = y - c.y;
        const double r2 = dx * dx + dy * dy;
        const double k = c.sign * lambda / (2.0 * kPi * kEps0 * r2 * r2);
        jxx += k * (r2 - 2.0 * dx * dx);
        jxy += k * (-2.0 * dx * dy);
        jyy += k * (r2 - 2.0 * dy * dy);
    }
}

void check_point(const TrapSystem& trap, double x_mm, double y_mm, bool with_plane) {
    for (const Rod& rod : trap.rods) {
        const double dx = x_mm - rod.x_mm, dy = y_mm - rod.y_mm;
        if (std::hypot(dx, dy) <= trap.rod_radius_mm) throw InsideElectrode{};
    }
    if (with_plane && trap.plane_distance_mm && x_mm <= -*trap.plane_distance_mm) {
        throw PointBeyondPlane{};
    }
}

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

TrapSystem TrapSystem::reference_default() {
    TrapSystem t;
    const double a = 0.7 / std::sqrt(2.0);  // opposite rods 1.4 mm apart, square at 45 deg
    t.rods = {Rod{a, a, +1}, Rod{-a, -a, +1}, Rod{a, -a, -1}, Rod{-a, a, -1}};
    t.calibrate();
    return t;
}

double TrapSystem::ion_mass_kg() const { return ion.mass_u * kAmu; }
double TrapSystem::ion_charge_c() const { return ion.charge_e * kElementaryCharge; }

double TrapSystem::mathieu_a() const {
    const double wa = 2.0 * kPi * axial_frequency_hz;
    return -2.0 * wa * wa / (rf_omega() * rf_omega());
}

double TrapSystem::mathieu_q() const {
    // quadrupole curvature per unit line charge: largest Hessian eigenvalue at the axis
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
    for (const Rod& rod : rods) {
        const double px = rod.x_mm * 1e-3, py = rod.y_mm * 1e-3;
        const double p2 = px * px + py * py;
        const double k = -rod.sign / (2.0 * kPi * kEps0);
        hxx += k * (1.0 / p2 - 2.0 * px * px / (p2 * p2));
        hxy += k * (-2.0 * px * py / (p2 * p2));
        hyy += k * (1.0 / p2 - 2.0 * py * py / (p2 * p2));
    }
    const double mean = 0.5 * (hxx + hyy);
    const double h_unit =
        std::sqrt(0.25 * (hxx - hyy) * (hxx - hyy) + hxy * hxy) + std::abs(mean);
    return 2.0 * ion_charge_c() * line_charge_amplitude * h_unit /
           (ion_mass_kg() * rf_omega() * rf_omega());
}

double TrapSystem::secular_frequency_formula() const {
    const double a = mathieu_a();
    const double q = mathieu_q();
    return 0.5 * rf_frequency_hz * std::sqrt(a + 0.5 * q * q);
}

void TrapSystem::calibrate() {
    const double target = 2.0 * kPi * secular_target_hz;
    const double a = mathieu_a();
    const double ratio = 2.0 * target / rf_omega();
    const double q_needed = std::sqrt(2.0 * (ratio * ratio - a));
    if (q_needed >= kMathieuStabilityLimit) throw NoStableMinimum{};
    line_charge_amplitude = 1.0;
    const double q_unit = mathieu_q();  // q per unit lambda
    line_charge_amplitude = q_needed / q_unit;
}

Vec3 field(const TrapSystem& trap, const Vec3& point_mm, double t_s) {
    check_point(trap, point_mm.x, point_mm.y, false);
    const double lambda_t = trap.line_charge_amplitude * std::cos(trap.rf_omega() * t_s);
    double ex, ey;
    line_field(charge_set(trap, false), lambda_t, point_mm.x * 1e-3, point_mm.y * 1e-3, ex, ey);

    // ideal DC term: axial harmonic at w_a, trace-free transverse anti-confinement
    const double wa = 2.0 * kPi * trap.axial_frequency_hz;
    const double coef = trap.ion_mass_kg() * wa * wa / trap.ion_charge_c();
    const double ex_dc = 0.5 * coef * (point_mm.x * 1e-3);
    const double ey_dc = 0.5 * coef * (point_mm.y * 1e-3);
    const double ez_dc = -coef * (point_mm.z * 1e-3);

    return {(ex + ex_dc) * 1e-3, (ey + ey_dc) * 1e-3, ez_dc * 1e-3};  // V/m -> V/mm
}

Vec3 image_field(const TrapSystem& trap, const Vec3& point_mm, double t_s) {
    if (!trap.plane_distance_mm) return field(trap, point_mm, t_s);
    check_point(trap, point_mm.x, point_mm.y, true);
    Vec3 base = field(trap, point_mm, t_s);
    const double lambda_t = trap.line_charge_amplitude * std::cos(trap.rf_omega() * t_s);
    const double d = *trap.plane_distance_mm * 1e-3;
    std::vector<LineCharge> images;
    for (const Rod& rod : trap.rods) {
        images.push_back({-2.0 * d - rod.x_mm * 1e-3, rod.y_mm * 1e-3,
                          -static_cast<double>(rod.sign)});
    }
    double ex, ey;
    line_field(images, lambda_t, point_mm.x * 1e-3, point_mm.y * 1e-3, ex, ey);
    base.x += ex * 1e-3;
    base.y += ey * 1e-3;
    return base;
}

double rf_potential(const TrapSystem& trap, const Vec3& point_mm, double t_s) {
    const double lambda_t = trap.line_charge_amplitude * std::cos(trap.rf_omega() * t_s);
    double phi = 0.0;
    for (const LineCharge& c : charge_set(trap, true)) {
        const double dx = point_mm.x * 1e-3 - c.x, dy = point_mm.y * 1e-3 - c.y;
        phi += -c.sign * lambda_t / (2.0 * kPi * kEps0) * std::log(std::hypot(dx, dy));
    }
    return phi;
}

double potential_scale(const TrapSystem& trap) {
    return trap.line_charge_amplitude / (2.0 * kPi * kEps0);
}

namespace {

// Time-averaged (secular) force in SI at transverse position (x, y) meters.
// Q^2 |E_rf|^2 / (4 m w^2) pseudopotential + DC transverse term + self-image.
void secular_force(const TrapSystem& trap, double x, double y, double& fx, double& fy,
                   bool with_line_images, bool with_self_image) {
    const double q_c = trap.ion_charge_c();
    const double m = trap.ion_mass_kg();
    const double w = trap.rf_omega();
    const auto set = charge_set(trap, with_line_images);
    const double lambda = trap.line_charge_amplitude;

    double ex, ey, jxx, jxy, jyy;
    line_field(set, lambda, x, y, ex, ey);
    line_field_jacobian(set, lambda, x, y, jxx, jxy, jyy);
    const double scale = q_c * q_c / (4.0 * m * w * w);
    // -grad of scale * |E|^2 (line-charge Jacobian is symmetric)
    fx = -scale * 2.0 * (ex * jxx + ey * jxy);
    fy = -scale * 2.0 * (ex * jxy + ey * jyy);

    const double wa = 2.0 * kPi * trap.axial_frequency_hz;
    fx += 0.5 * m * wa * wa * x;
    fy += 0.5 * m * wa * wa * y;

    if (with_self_image && trap.plane_distance_mm) {
        const double h = x + *trap.plane_distance_mm * 1e-3;  // distance to the plane
        fx += -q_c * q_c / (16.0 * kPi * kEps0 * h * h);      // induced-charge attraction
    }
}

Vec3 find_pseudo_minimum(const TrapSystem& trap, bool with_line_images, bool with_self_image) {
    const double m = trap.ion_mass_kg();
    const double w_sec = 2.0 * kPi * trap.secular_target_hz;
    const double spring = m * w_sec * w_sec;
    if (trap.mathieu_q() >= kMathieuStabilityLimit) throw NoStableMinimum{};

    double x = 0.0, y = 0.0;
    double fx = 0.0, fy = 0.0;
    bool settled = false;
    for (int i = 0; i < 400; ++i) {
        secular_force(trap, x, y, fx, fy, with_line_images, with_self_image);
        x += fx / spring;
        y += fy / spring;
        if (std::abs(x) > 0.3e-3 || std::abs(y) > 0.3e-3) throw NoStableMinimum{};
        if (std::hypot(fx, fy) / spring < 1e-14) {
            settled = true;
            break;
        }
    }
    if (!settled) throw NoStableMinimum{};
    return {x * 1e6, y * 1e6, 0.0};
}

}  // namespace

Vec3 equilibrium_shift(const TrapSystem& trap) {
    return find_pseudo_minimum(trap, true, true);
}

ShiftContributions equilibrium_shift_split(const TrapSystem& trap) {
    return {find_pseudo_minimum(trap, true, false), find_pseudo_minimum(trap, false, true)};
}

namespace {

// Instantaneous force (SI) for the dynamics: RF + images + DC + self-image + drag.
void dynamic_force(const TrapSystem& trap, const std::vector<LineCharge>& set, double x,
                   double y, double z, double vx, double vy, double vz, double t,
                   double& fx, double& fy, double& fz) {
    const double q_c = trap.ion_charge_c();
    const double m = trap.ion_mass_kg();
    const double lambda_t = trap.line_charge_amplitude * std::cos(trap.rf_omega() * t);

    double ex, ey;
    line_field(set, lambda_t, x, y, ex, ey);
    fx = q_c * ex;
    fy = q_c * ey;
    fz = 0.0;

    const double wa = 2.0 * kPi * trap.axial_frequency_hz;
    fx += 0.5 * m * wa * wa * x;
    fy += 0.5 * m * wa * wa * y;
    fz += -m * wa * wa * z;

    if (trap.plane_distance_mm) {
        const double h = x + *trap.plane_distance_mm * 1e-3;
        fx += -q_c * q_c / (16.0 * kPi * kEps0 * h * h);
    }

    fx += -m * trap.damping_per_s * vx;
    fy += -m * trap.damping_per_s * vy;
    fz += -m * trap.damping_per_s * vz;
}

struct RawOrbit {
    std::vector<double> t, x, y, z;  // SI, decimated
};

RawOrbit run_orbit(const TrapSystem& trap, const OrbitParams& p) {
    if (p.duration_cycles < 200) throw std::invalid_argument("duration must be >= 200 RF cycles");
    if (p.steps_per_cycle < 200) throw StepTooLarge{};

    const double m = trap.ion_mass_kg();
    const double period = 1.0 / trap.rf_frequency_hz;
    const double dt = period / p.steps_per_cycle;
    const long steps = static_cast<long>(p.duration_cycles) * p.steps_per_cycle;
    const auto set = charge_set(trap, true);

    double x = p.start_um.x * 1e-6, y = p.start_um.y * 1e-6, z = p.start_um.z * 1e-6;
    double vx = 0.0, vy = 0.0, vz = 0.0;
    double fx, fy, fz;
    dynamic_force(trap, set, x, y, z, vx, vy, vz, 0.0, fx, fy, fz);

    RawOrbit orbit;
    const std::size_t keep = static_cast<std::size_t>(steps / p.trajectory_stride) + 1;
    orbit.t.reserve(keep);
    orbit.x.reserve(keep);
    orbit.y.reserve(keep);
    orbit.z.reserve(keep);

    for (long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (i % p.trajectory_stride == 0) {
            orbit.t.push_back(t);
            orbit.x.push_back(x);
            orbit.y.push_back(y);
            orbit.z.push_back(z);
        }
        x += vx * dt + 0.5 * fx / m * dt * dt;
        y += vy * dt + 0.5 * fy / m * dt * dt;
        z += vz * dt + 0.5 * fz / m * dt * dt;
        // predictor velocity for the drag term
        const double pvx = vx + fx / m * dt, pvy = vy + fy / m * dt, pvz = vz + fz / m * dt;
        double gx, gy, gz;
        dynamic_force(trap, set, x, y, z, pvx, pvy, pvz, t + dt, gx, gy, gz);
        vx += 0.5 * (fx + gx) / m * dt;
        vy += 0.5 * (fy + gy) / m * dt;
        vz += 0.5 * (fz + gz) / m * dt;
        fx = gx;
        fy = gy;
        fz = gz;
        if (x * x + y * y > kOrbitRadiusLimitM * kOrbitRadiusLimitM) throw UnstableOrbit{};
    }
    return orbit;
}

}  // namespace

OrbitResult integrate_orbit(const TrapSystem& trap, const OrbitParams& params) {
    const RawOrbit perturbed = run_orbit(trap, params);
    TrapSystem reference_trap = trap;
    reference_trap.plane_distance_mm.reset();
    const RawOrbit reference = run_orbit(reference_trap, params);

    // settled window: the last quarter, rounded to whole RF cycles
    const std::size_t n = perturbed.t.size();
    const double period = 1.0 / trap.rf_frequency_hz;
    const double t_end = perturbed.t.back();
    const double window = std::floor((0.25 * t_end) / period) * period;
    const double t_start = t_end - window;

    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (perturbed.t[i] < t_start) continue;
        const double dx = perturbed.x[i] - reference.x[i];
        const double dy = perturbed.y[i] - reference.y[i];
        const double dz = perturbed.z[i] - reference.z[i];
        acc += dx * dx + dy * dy + dz * dz;
        ++count;
    }

    OrbitResult result;
    result.rms_displacement_um = count ? std::sqrt(acc / count) * 1e6 : 0.0;
    result.equilibrium_shift_um =
        trap.plane_distance_mm ? equilibrium_shift(trap).norm() : 0.0;
    result.t_us.resize(n);
    result.x_um.resize(n);
    result.y_um.resize(n);
    result.z_um.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.t_us[i] = perturbed.t[i] * 1e6;
        result.x_um[i] = perturbed.x[i] * 1e6;
        result.y_um[i] = perturbed.y[i] * 1e6;
        result.z_um[i] = perturbed.z[i] * 1e6;
    }
    return result;
}

std::vector<SweepPoint> displacement_sweep(const TrapSystem& trap,
                                           const std::vector<double>& distances_mm,
                                           const OrbitParams& params) {
    std::vector<SweepPoint> points;
    points.reserve(distances_mm.size());
    for (double d : distances_mm) {
        if (d <= 0.0) throw std::invalid_argument("plane distances must be positive");
        TrapSystem t = trap;
        t.plane_distance_mm = d;
        const OrbitResult orbit = integrate_orbit(t, params);
        points.push_back({d, orbit.rms_displacement_um, orbit.equilibrium_shift_um});
    }
    return points;
}

double measure_secular_frequency(const TrapSystem& trap, int cycles) {
    TrapSystem probe = trap;
    probe.plane_distance_mm.reset();
    probe.damping_per_s = 0.0;
    OrbitParams params;
    params.duration_cycles = cycles;
    params.trajectory_stride = 4;
    params.start_um = {10.0, 0.0, 0.0};
    const RawOrbit orbit = run_orbit(probe, params);

    // zero crossings of x(t) with linear interpolation
    double first = 0.0, last = 0.0;
    int crossings = 0;
    for (std::size_t i = 1; i < orbit.x.size(); ++i) {
        if ((orbit.x[i - 1] < 0.0) != (orbit.x[i] < 0.0)) {
            const double frac = orbit.x[i - 1] / (orbit.x[i - 1] - orbit.x[i]);
            const double tc = orbit.t[i - 1] + frac * (orbit.t[i] - orbit.t[i - 1]);
            if (crossings == 0) first = tc;
            last = tc;
            ++crossings;
        }
    }
    if (crossings < 2) throw NoStableMinimum{};
    return (crossings - 1) / (2.0 * (last - first));
}

}  // namespace ionmirror::trap
