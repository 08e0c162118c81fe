#include "ionmirror/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace ionmirror::evaluation {

using geometry::MeridionalRay;
using geometry::OpticalSystem;
using geometry::SagProfile;
using layout::LayoutParams;

std::string to_string(Variant v) {
    switch (v) {
        case Variant::NoCorrector: return "none";
        case Variant::Quartic: return "quartic";
        case Variant::Numeric: return "numeric";
        case Variant::FitEven: return "even";
        case Variant::FitOdd: return "odd";
        case Variant::FitFull: return "full";
        case Variant::Parabola: return "parabola";
    }
    return "unknown";
}

std::optional<Variant> variant_from_string(const std::string& name) {
    for (Variant v : {Variant::NoCorrector, Variant::Quartic, Variant::Numeric,
                      Variant::FitEven, Variant::FitOdd, Variant::FitFull, Variant::Parabola}) {
        if (to_string(v) == name) return v;
    }
    return std::nullopt;
}

OpticalSystem variant_system(const LayoutParams& layout, Variant v, const SagProfile* exit_sag) {
    switch (v) {
        case Variant::NoCorrector:
            return layout::build_system(layout, nullptr);
        case Variant::Parabola:
            return layout::build_system(layout, nullptr, layout::MirrorShape::Parabolic);
        case Variant::Quartic: {
            const SagProfile quartic = SagProfile::polynomial(
                {0.0, 0.0, 0.0, 0.0,
                 corrector::quartic_coefficient(layout.mirror_radius, layout.corrector_index())});
            return layout::build_system(layout, &quartic);
        }
        default:
            if (exit_sag == nullptr) {
                throw std::invalid_argument("variant " + to_string(v) +
                                            " needs a corrector sag profile");
            }
            return layout::build_system(layout, exit_sag);
    }
}

namespace {

double image_plane_radius(const MeridionalRay& ray, const ImagingStage& stage) {
    const double t = std::tan(ray.u);
    const double y = ray.r + t * (stage.objective_principal_plane_z - ray.z);
    const double t_out = t - y / stage.objective_focal_length;
    return y + t_out * (stage.image_plane_z - stage.objective_principal_plane_z);
}

std::vector<double> symmetric_fan(double aperture, int fan_size) {
    std::vector<double> h;
    h.reserve(static_cast<std::size_t>(fan_size));
    for (int i = 0; i < fan_size; ++i) {
        const double v = -aperture + 2.0 * aperture * i / (fan_size - 1);
        if (std::abs(v) < 1e-9 * aperture) continue;  // skip the vertex ray
        h.push_back(v);
    }
    return h;
}

}  // namespace

SpotMetrics spot_size(const OpticalSystem& system, const ImagingStage& stage,
                      double source_axial_offset_um, double source_radial_offset_um,
                      int fan_size, const LayoutParams& layout) {
    stage.validate();
    if (fan_size < 32) throw std::invalid_argument("fan_size must be >= 32");
    if (std::abs(source_axial_offset_um) > 200.0 || std::abs(source_radial_offset_um) > 200.0) {
        throw std::invalid_argument("source offsets are supported within +-200 um");
    }

    const double sz = source_axial_offset_um * 1e-3;
    const double sr = source_radial_offset_um * 1e-3;

    std::vector<double> radii;
    radii.reserve(static_cast<std::size_t>(fan_size));
    SpotMetrics metrics;
    for (double h : symmetric_fan(layout.aperture_radius, fan_size)) {
        ++metrics.n_rays_traced;
        try {
            const MeridionalRay out =
                geometry::trace(system, layout::aim_at_mirror(layout, h, sz, sr)).ray;
            radii.push_back(image_plane_radius(out, stage));
        } catch (const geometry::Vignetted&) {
            ++metrics.n_rays_vignetted;
        }
    }
    if (radii.empty()) throw AllRaysVignetted{};

    double mean = 0.0;
    for (double r : radii) mean += r;
    mean /= static_cast<double>(radii.size());
    double var = 0.0;
    for (double r : radii) var += (r - mean) * (r - mean);
    var /= static_cast<double>(radii.size());

    metrics.centroid_r = mean;
    metrics.rms_radius = std::sqrt(var);
    return metrics;
}

double best_focus(const OpticalSystem& system, const ImagingStage& stage, int fan_size,
                  const LayoutParams& layout) {
    const double nominal = stage.nominal_focus_z();
    auto rms_at = [&](double plane_z) {
        ImagingStage probe = stage;
        probe.image_plane_z = plane_z;
        return spot_size(system, probe, 0.0, 0.0, fan_size, layout).rms_radius;
    };
    return numeric::golden_section_minimize(rms_at, nominal - 8.0, nominal + 8.0, 1e-3);
}

std::vector<SweepRow> defocus_sweep(
    const LayoutParams& layout,
    const std::vector<std::pair<Variant, const SagProfile*>>& variants,
    const std::vector<double>& axial_offsets_um, const ImagingStage& stage, int fan_size) {
    if (axial_offsets_um.empty()) throw std::invalid_argument("offset list must be nonempty");

    std::vector<SweepRow> rows;
    rows.reserve(variants.size() * axial_offsets_um.size());
    for (const auto& [variant, sag] : variants) {
        const OpticalSystem system = variant_system(layout, variant, sag);
        ImagingStage focused = stage;
        focused.image_plane_z = best_focus(system, stage, fan_size, layout);
        for (double offset : axial_offsets_um) {
            const SpotMetrics m = spot_size(system, focused, offset, 0.0, fan_size, layout);
            SweepRow row;
            row.variant = variant;
            row.offset_um = offset;
            row.rms_um = m.rms_radius * 1e3;
            row.vignetted = m.n_rays_vignetted;
            row.vignetting_warning = m.n_rays_vignetted * 10 > m.n_rays_traced;
            rows.push_back(row);
        }
    }
    return rows;
}

double collection_efficiency_circular(double numerical_aperture) {
    if (numerical_aperture <= 0.0 || numerical_aperture >= 1.0) {
        throw InvalidAperture("numerical aperture must lie in (0, 1)");
    }
    return 0.5 * (1.0 - std::sqrt(1.0 - numerical_aperture * numerical_aperture));
}

double collection_efficiency_square(double half_width_mm, double distance_mm) {
    if (half_width_mm <= 0.0 || distance_mm <= 0.0) {
        throw InvalidAperture("square aperture needs positive half-width and distance");
    }
    const double h2 = half_width_mm * half_width_mm;
    const double d = distance_mm;
    const double omega = 4.0 * std::atan(h2 / (d * std::sqrt(2.0 * h2 + d * d)));
    return omega / (4.0 * M_PI);
}

double diffraction_limit_um(double wavelength_nm, double numerical_aperture) {
    if (numerical_aperture <= 0.0 || numerical_aperture >= 1.0) {
        throw InvalidAperture("numerical aperture must lie in (0, 1)");
    }
    return 0.61 * (wavelength_nm * 1e-3) / numerical_aperture;
}

}  // namespace ionmirror::evaluation
