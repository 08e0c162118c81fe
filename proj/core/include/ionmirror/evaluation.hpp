#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionmirror/corrector.hpp"
#include "ionmirror/geometry.hpp"
#include "ionmirror/layout.hpp"

namespace ionmirror::evaluation {

/// Ideal aberration-free thin lens: a ray at height y with slope t leaves
/// with slope t - y/f. Isolates the corrector performance from any real
/// objective prescription.
struct ImagingStage {
    double objective_focal_length = 25.0;      ///< mm
    double objective_principal_plane_z = 40.0; ///< mm
    double image_plane_z = 65.0;               ///< mm

    void validate() const {
        if (objective_focal_length <= 0.0) {
            throw std::invalid_argument("objective focal length must be positive");
        }
        if (image_plane_z <= objective_principal_plane_z) {
            throw std::invalid_argument("image plane must lie beyond the principal plane");
        }
    }
    double nominal_focus_z() const {
        return objective_principal_plane_z + objective_focal_length;
    }
};

struct SpotMetrics {
    double centroid_r = 0.0;   ///< mm at the image plane
    double rms_radius = 0.0;   ///< mm about the centroid
    int n_rays_traced = 0;
    int n_rays_vignetted = 0;
};

struct AllRaysVignetted : std::runtime_error {
    AllRaysVignetted() : std::runtime_error("every ray in the fan was vignetted") {}
};
struct InvalidAperture : std::runtime_error {
    explicit InvalidAperture(const std::string& what) : std::runtime_error(what) {}
};

/// Corrector configurations under comparison (figure-of-merit sweeps).
enum class Variant { NoCorrector, Quartic, Numeric, FitEven, FitOdd, FitFull, Parabola };

std::string to_string(Variant v);
std::optional<Variant> variant_from_string(const std::string& name);

/// System for a variant. Curve-backed variants need their exit sag.
geometry::OpticalSystem variant_system(const layout::LayoutParams& layout, Variant v,
                                       const geometry::SagProfile* exit_sag);

/// Trace a symmetric fan (uniform in mirror height, fan_size rays spanning
/// [-aperture, +aperture]) from the displaced source through the system and
/// the ideal objective to the image plane. Offsets in micrometers. Vignetted
/// rays are excluded from the statistics and counted.
SpotMetrics spot_size(const geometry::OpticalSystem& system, const ImagingStage& stage,
                      double source_axial_offset_um, double source_radial_offset_um,
                      int fan_size, const layout::LayoutParams& layout);

/// Image-plane position minimizing the on-axis rms spot (golden-section,
/// 1 um tolerance, bracket +-8 mm around the back focal plane).
double best_focus(const geometry::OpticalSystem& system, const ImagingStage& stage,
                  int fan_size, const layout::LayoutParams& layout);

struct SweepRow {
    Variant variant = Variant::Quartic;
    double offset_um = 0.0;
    double rms_um = 0.0;
    int vignetted = 0;
    bool vignetting_warning = false;  ///< more than 10% of the fan lost
};

/// One spot evaluation per (variant, axial offset), each variant imaged at
/// its own zero-offset best focus. Cells are independent; rows are emitted
/// in deterministic (variant, offset) input order.
std::vector<SweepRow> defocus_sweep(
    const layout::LayoutParams& layout,
    const std::vector<std::pair<Variant, const geometry::SagProfile*>>& variants,
    const std::vector<double>& axial_offsets_um, const ImagingStage& stage, int fan_size);

/// Fraction of the full 4*pi solid angle inside a cone of the given NA:
/// (1 - sqrt(1 - NA^2)) / 2.
double collection_efficiency_circular(double numerical_aperture);

/// Fraction subtended by a square aperture of the given half-width at the
/// given on-axis distance (closed-form arctangent).
double collection_efficiency_square(double half_width_mm, double distance_mm);

/// Airy-based reference spot radius 0.61 lambda / NA, in micrometers.
double diffraction_limit_um(double wavelength_nm, double numerical_aperture);

}  // namespace ionmirror::evaluation
