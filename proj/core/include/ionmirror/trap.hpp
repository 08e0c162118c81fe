#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ionmirror::trap {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const;
};

struct IonSpecies {
    double mass_u = 138.0;  ///< Ba-138
    double charge_e = 1.0;
};

/// One RF rod: transverse center position (mm) and drive phase sign.
struct Rod {
    double x_mm = 0.0;
    double y_mm = 0.0;
    int sign = +1;  ///< +1 / -1: the two diagonal pairs are driven in antiphase
};

struct InsideElectrode : std::runtime_error {
    InsideElectrode() : std::runtime_error("field point inside an electrode") {}
};
struct PointBeyondPlane : std::runtime_error {
    PointBeyondPlane() : std::runtime_error("field point on or behind the grounded plane") {}
};
struct NoStableMinimum : std::runtime_error {
    NoStableMinimum() : std::runtime_error("pseudopotential has no stable minimum") {}
};
struct UnstableOrbit : std::runtime_error {
    UnstableOrbit() : std::runtime_error("orbit radius exceeded 0.5 mm") {}
};
struct StepTooLarge : std::runtime_error {
    StepTooLarge() : std::runtime_error("timestep exceeds RF period / 200") {}
};

/// Linear RF quadrupole with an optional grounded plane at x = -plane_distance
/// (the mirror axis is x; the plane is parallel to the rods and the trap
/// axis z). Transverse RF confinement comes from four 2D line charges at the
/// rod centers; the line-charge amplitude is calibrated so the secular
/// frequency hits secular_target_hz. Axial confinement is an ideal harmonic
/// term at axial_frequency_hz standing in for the endcap needles.
struct TrapSystem {
    std::array<Rod, 4> rods;
    double rod_radius_mm = 0.25;
    double rf_frequency_hz = 22.0e6;
    double secular_target_hz = 1.0e6;
    double axial_frequency_hz = 100.0e3;
    double endcap_spacing_mm = 2.0;   ///< descriptive; axial term is calibrated, not modeled
    double endcap_voltage_v = 100.0;  ///< descriptive
    IonSpecies ion;
    std::optional<double> plane_distance_mm;  ///< grounded plane at x = -d when set
    double damping_per_s = 2.0e4;             ///< linear drag standing in for laser cooling

    double line_charge_amplitude = 0.0;  ///< C/m, set by calibrate()

    /// Rods on a square rotated 45 deg to the mirror axis (the imaging path
    /// passes between rods), opposite-rod centers 1.4 mm apart.
    static TrapSystem reference_default();

    /// Solve the line-charge amplitude from the Mathieu parameters of the
    /// target secular frequency. Throws NoStableMinimum when q >= 0.908.
    void calibrate();

    double mathieu_a() const;
    double mathieu_q() const;
    /// First-order secular frequency (omega_rf/2) sqrt(a + q^2/2), in Hz.
    double secular_frequency_formula() const;

    double ion_mass_kg() const;
    double ion_charge_c() const;
    double rf_omega() const { return 2.0 * 3.14159265358979323846 * rf_frequency_hz; }
};

/// Electric field of the drive at a point (mm) and time (s), in V/mm.
/// Includes the RF line charges and the ideal axial/anti-transverse DC term;
/// no plane images.
Vec3 field(const TrapSystem& trap, const Vec3& point_mm, double t_s);

/// field() plus the mirror images of the line charges across the grounded
/// plane. The ion self-image force is not part of the field map; it acts on
/// the ion in the dynamics.
Vec3 image_field(const TrapSystem& trap, const Vec3& point_mm, double t_s);

/// Potential of the charge system (line charges + images when a plane is
/// present), in volts. Vanishes on the plane by construction of the images.
double rf_potential(const TrapSystem& trap, const Vec3& point_mm, double t_s);

/// Characteristic potential scale lambda / (2 pi eps0), volts.
double potential_scale(const TrapSystem& trap);

/// Pseudopotential-minimum displacement from the unperturbed trap center, in
/// micrometers. Damped fixed-point iteration on the secular force, including
/// the RF image distortion and the ion self-image attraction. This is the
/// static oracle the orbit integration is checked against.
Vec3 equilibrium_shift(const TrapSystem& trap);

/// The two plane effects separated: the shift from the distorted RF field
/// alone and from the induced-charge attraction alone (micrometers). Their
/// relative size is a diagnostic; the full shift includes both.
struct ShiftContributions {
    Vec3 rf_image_shift_um;
    Vec3 self_image_shift_um;
};
ShiftContributions equilibrium_shift_split(const TrapSystem& trap);

struct OrbitParams {
    int duration_cycles = 6000;   ///< RF cycles
    int steps_per_cycle = 400;
    int trajectory_stride = 40;   ///< store every n-th step
    Vec3 start_um{0.0, 0.0, 0.0};
};

struct OrbitResult {
    std::vector<double> t_us;
    std::vector<double> x_um, y_um, z_um;
    double rms_displacement_um = 0.0;  ///< vs the unperturbed orbit, settled window
    double equilibrium_shift_um = 0.0; ///< |equilibrium_shift| for the same trap
};

/// Velocity-Verlet integration of the full time-dependent motion (RF drive,
/// plane images, self-image attraction, linear damping). The rms displacement
/// is measured against the no-plane reference orbit over the last quarter of
/// the run, an integer number of RF cycles after the damping transient.
OrbitResult integrate_orbit(const TrapSystem& trap, const OrbitParams& params = {});

struct SweepPoint {
    double distance_mm = 0.0;
    double rms_displacement_um = 0.0;
    double equilibrium_shift_um = 0.0;
};

std::vector<SweepPoint> displacement_sweep(const TrapSystem& trap,
                                           const std::vector<double>& distances_mm,
                                           const OrbitParams& params = {});

/// Transverse secular frequency extracted from an undamped small oscillation
/// (zero-crossing count), in Hz. Calibration cross-check.
double measure_secular_frequency(const TrapSystem& trap, int cycles = 3000);

}  // namespace ionmirror::trap
