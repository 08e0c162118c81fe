#include "ionmirror/layout.hpp"

#include <cmath>

namespace ionmirror::layout {

using geometry::OpticalSystem;
using geometry::SagProfile;
using geometry::SurfaceElement;

OpticalSystem build_system(const LayoutParams& p, const SagProfile* corrector_exit_sag,
                           MirrorShape mirror_shape) {
    OpticalSystem sys;
    sys.wavelength_nm = p.wavelength_nm;

    const double n_vp = p.viewport_index();
    const double n_cor = p.corrector_index();
    const double vz = p.mirror_vertex_z();

    if (mirror_shape == MirrorShape::Parabolic) {
        // same paraxial focus as the sphere: sag r^2 / (2R)
        sys.surfaces.push_back(SurfaceElement::aspheric_mirror(
            vz, p.mirror_half_width,
            SagProfile::polynomial({0.0, 0.0, 1.0 / (2.0 * p.mirror_radius)})));
    } else {
        sys.surfaces.push_back(SurfaceElement::spherical_mirror(vz, p.mirror_radius,
                                                                p.mirror_half_width));
    }

    // viewport apertures are generous; the beam never reaches them
    const double vp_aperture = 19.0;
    sys.surfaces.push_back(
        SurfaceElement::flat_interface(p.viewport_entry, vp_aperture, 1.0, n_vp));
    sys.surfaces.push_back(
        SurfaceElement::flat_interface(p.viewport_exit_z(), vp_aperture, n_vp, 1.0));

    if (corrector_exit_sag != nullptr) {
        sys.surfaces.push_back(SurfaceElement::flat_interface(
            p.corrector_entry, p.aperture_radius, 1.0, n_cor));
        sys.surfaces.push_back(SurfaceElement::aspheric_interface(
            p.corrector_exit_vertex_z(), p.aperture_radius, n_cor, 1.0, *corrector_exit_sag));
    }
    return sys;
}

geometry::MeridionalRay aim_at_mirror(const LayoutParams& p, double h,
                                      double source_axial_offset,
                                      double source_radial_offset) {
    const double zm = p.mirror_surface_z(h);
    const double sz = source_axial_offset;
    const double sr = source_radial_offset;
    return {sz, sr, std::atan2(h - sr, zm - sz)};
}

}  // namespace ionmirror::layout
