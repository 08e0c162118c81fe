#pragma once

#include <cmath>

#include "ionmirror/geometry.hpp"
#include "ionmirror/materials.hpp"

namespace ionmirror::layout {

/// Geometry of the mirror / viewport / corrector train. The coordinate frame
/// puts the nominal source (the ion) at z = 0, the mirror focus; the mirror
/// vertex sits at z = -R/2 and its center of curvature at z = +R/2. All axial
/// positions below are measured from the focus along the optical axis.
struct LayoutParams {
    double mirror_radius = 20.0;        ///< mirror radius of curvature R (mm)
    double aperture_radius = 9.0;       ///< design fan half-aperture and corrector plate radius (mm)
    double mirror_half_width = 10.0;    ///< physical mirror clear radius; the vignetting edge (mm)
    double viewport_entry = 17.0;       ///< z of the viewport entrance face (mm)
    double viewport_thickness = 3.1;    ///< fused silica thickness (mm)
    double corrector_entry = 22.0;      ///< z of the corrector flat entry face (mm)
    double corrector_thickness = 3.0;   ///< center thickness of the BK7 plate (mm)
    double wavelength_nm = materials::kDefaultWavelengthNm;

    double mirror_vertex_z() const { return -0.5 * mirror_radius; }
    double corrector_exit_vertex_z() const { return corrector_entry + corrector_thickness; }
    double viewport_exit_z() const { return viewport_entry + viewport_thickness; }
    double corrector_index() const { return materials::index(materials::Material::BK7, wavelength_nm); }
    double viewport_index() const {
        return materials::index(materials::Material::FusedSilica, wavelength_nm);
    }
    /// Mirror surface z at height r (spherical).
    double mirror_surface_z(double r) const {
        return 0.5 * mirror_radius - std::sqrt(mirror_radius * mirror_radius - r * r);
    }
};

/// Which reflector the system uses.
enum class MirrorShape { Spherical, Parabolic };

/// Mirror + viewport system; optionally append the corrector plate with the
/// given exit-face sag. A null sag means "no corrector" (mirror + viewport
/// only). Surfaces are listed in traversal order for a source at the focus.
geometry::OpticalSystem build_system(const LayoutParams& p,
                                     const geometry::SagProfile* corrector_exit_sag,
                                     MirrorShape mirror_shape = MirrorShape::Spherical);

/// Ray from the (possibly displaced) source aimed at the mirror point at
/// height h. Offsets are in mm.
geometry::MeridionalRay aim_at_mirror(const LayoutParams& p, double h,
                                      double source_axial_offset = 0.0,
                                      double source_radial_offset = 0.0);

}  // namespace ionmirror::layout
