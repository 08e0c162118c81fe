#include "ionmirror/corrector.hpp"

#include <algorithm>
#include <cmath>

namespace ionmirror::corrector {

using geometry::MeridionalRay;
using geometry::OpticalSystem;
using geometry::SagProfile;
using layout::LayoutParams;
using numeric::PchipInterpolant;

double schmidt_sag(double r, double mirror_radius, double n, double k) {
    const double r2 = r * r;
    return (r2 * r2 - k * r2) / (4.0 * (n - 1.0) * std::pow(mirror_radius, 3));
}

double quartic_coefficient(double mirror_radius, double n) {
    return 1.0 / (4.0 * (n - 1.0) * std::pow(mirror_radius, 3));
}

namespace {

/// Exit-face slope that refracts an internal ray of angle u_g (index n) into
/// an outgoing ray of angle u_out in vacuum. Derived from Snell's law with the
/// surface normal tilted by -atan(m): n sin(u_g + phi) = sin(u_out + phi).
double required_exit_slope(double u_g, double n, double u_out) {
    return (std::sin(u_out) - n * std::sin(u_g)) /
           (n * std::cos(u_g) - std::cos(u_out));
}

/// Fan heights, uniform in mirror height over (0, aperture].
std::vector<double> fan_heights(const LayoutParams& layout, int fan_rays) {
    std::vector<double> h(static_cast<std::size_t>(fan_rays));
    for (int i = 0; i < fan_rays; ++i) {
        h[static_cast<std::size_t>(i)] =
            layout.aperture_radius * static_cast<double>(i + 1) / fan_rays;
    }
    return h;
}

/// System up to (and including) the corrector entry face.
OpticalSystem pre_exit_system(const LayoutParams& layout) {
    OpticalSystem sys = layout::build_system(layout, nullptr);
    sys.surfaces.push_back(geometry::SurfaceElement::flat_interface(
        layout.corrector_entry, layout.aperture_radius, 1.0, layout.corrector_index()));
    return sys;
}

}  // namespace

CorrectorCurve derive_corrector(const LayoutParams& layout, const SynthesisParams& params) {
    if (params.n_grid < 2) throw std::invalid_argument("n_grid must be >= 2");
    if (params.fan_rays < 1) throw std::invalid_argument("fan_rays must be >= 1");

    const double n_cor = layout.corrector_index();
    const double exit_vertex = layout.corrector_exit_vertex_z();
    const OpticalSystem front = pre_exit_system(layout);
    const std::vector<double> heights = fan_heights(layout, params.fan_rays);

    CorrectorCurve curve;
    curve.source = CurveSource::IterativeNumeric;
    curve.r.resize(static_cast<std::size_t>(params.n_grid));
    for (int j = 0; j < params.n_grid; ++j) {
        curve.r[static_cast<std::size_t>(j)] =
            layout.aperture_radius * static_cast<double>(j) / (params.n_grid - 1);
    }
    curve.z.assign(curve.r.size(), 0.0);

    SagProfile surface = SagProfile::polynomial({0.0});
    for (int iter = 1; iter <= params.max_iterations; ++iter) {
        const geometry::SurfaceElement exit_face = geometry::SurfaceElement::aspheric_interface(
            exit_vertex, layout.aperture_radius, n_cor, 1.0, surface);

        // slope samples at the radii where the fan actually lands
        std::vector<double> arrival{0.0}, slope{0.0};
        arrival.reserve(heights.size() + 1);
        slope.reserve(heights.size() + 1);
        for (double h : heights) {
            const MeridionalRay inside =
                geometry::trace(front, layout::aim_at_mirror(layout, h)).ray;
            const geometry::Intersection hit = geometry::intersect(inside, exit_face);
            const double u_out = params.output_slope_per_mm * hit.r;
            arrival.push_back(hit.r);
            slope.push_back(required_exit_slope(inside.u, n_cor, u_out));
        }

        // arrival radii must stay single-valued; past the caustic fold of the
        // mirror two rays would demand different slopes at one radius
        for (std::size_t j = 1; j < arrival.size(); ++j) {
            if (arrival[j] <= arrival[j - 1]) {
                throw std::invalid_argument(
                    "fan arrivals fold over at r = " + std::to_string(arrival[j]) +
                    " mm; the aperture reaches past the caustic of this layout");
            }
        }

        // beyond the outermost ray the plate continues as a straight cone;
        // the new surface is the exact antiderivative of this slope field
        PchipInterpolant field(std::move(arrival), std::move(slope),
                               PchipInterpolant::Extension::Hold);
        SagProfile next_surface = SagProfile::integrated_slope(std::move(field));

        double change = 0.0;
        for (std::size_t j = 0; j < curve.r.size(); ++j) {
            const double z_new = next_surface.value(curve.r[j]);
            change = std::max(change, std::abs(z_new - curve.z[j]));
            curve.z[j] = z_new;
        }
        surface = std::move(next_surface);
        curve.iterations_used = iter;
        curve.sag_change_per_iteration.push_back(change);
        if (change < params.tolerance) {
            curve.converged = true;
            curve.exact_profile = std::move(surface);
            return curve;
        }
    }
    throw NonConvergence(curve.iterations_used, curve.sag_change_per_iteration);
}

CorrectorCurve analytic_quartic_curve(const LayoutParams& layout, int n_grid) {
    const double c4 = quartic_coefficient(layout.mirror_radius, layout.corrector_index());
    CorrectorCurve curve;
    curve.source = CurveSource::AnalyticSchmidt;
    curve.converged = true;
    curve.exact_profile = SagProfile::polynomial({0.0, 0.0, 0.0, 0.0, c4});
    curve.r.resize(static_cast<std::size_t>(n_grid));
    curve.z.resize(static_cast<std::size_t>(n_grid));
    for (int j = 0; j < n_grid; ++j) {
        const double r = layout.aperture_radius * static_cast<double>(j) / (n_grid - 1);
        curve.r[static_cast<std::size_t>(j)] = r;
        curve.z[static_cast<std::size_t>(j)] = c4 * r * r * r * r;
    }
    return curve;
}

double collimation_residual(const SagProfile& exit_sag, const LayoutParams& layout,
                            int fan_rays) {
    const OpticalSystem sys = layout::build_system(layout, &exit_sag);
    double worst = 0.0;
    for (double h : fan_heights(layout, fan_rays)) {
        const MeridionalRay out = geometry::trace(sys, layout::aim_at_mirror(layout, h)).ray;
        worst = std::max(worst, std::abs(out.u));
    }
    return worst;
}

double collimation_residual(const CorrectorCurve& curve, const LayoutParams& layout,
                            int fan_rays) {
    const SagProfile sag = curve.sag_profile();
    return collimation_residual(sag, layout, fan_rays);
}

double collimation_residual_uncorrected(const LayoutParams& layout, int fan_rays) {
    const OpticalSystem sys = layout::build_system(layout, nullptr);
    double worst = 0.0;
    for (double h : fan_heights(layout, fan_rays)) {
        const MeridionalRay out = geometry::trace(sys, layout::aim_at_mirror(layout, h)).ray;
        worst = std::max(worst, std::abs(out.u));
    }
    return worst;
}

std::string to_string(FitBasis basis) {
    switch (basis) {
        case FitBasis::EvenOnly: return "even";
        case FitBasis::OddOnly: return "odd";
        case FitBasis::Full: return "full";
    }
    return "unknown";
}

FitResult fit_polynomial(const CorrectorCurve& curve, FitBasis basis, int max_order) {
    std::vector<int> powers{0};  // constant permitted in every basis, removed afterwards
    for (int p = 1; p <= max_order; ++p) {
        const bool even = (p % 2 == 0);
        if (basis == FitBasis::Full || (basis == FitBasis::EvenOnly && even) ||
            (basis == FitBasis::OddOnly && !even)) {
            powers.push_back(p);
        }
    }
    const std::size_t n = curve.r.size();
    if (n < powers.size()) throw InsufficientSamples{};

    // scale radii to [0, 1] so the Vandermonde columns stay balanced
    const double scale = curve.r.back();
    if (scale <= 0.0) throw RankDeficient{};
    std::vector<double> design(n * powers.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double x = curve.r[i] / scale;
        for (std::size_t j = 0; j < powers.size(); ++j) {
            design[i * powers.size() + j] = std::pow(x, powers[j]);
        }
    }
    const std::vector<double> scaled =
        numeric::least_squares_qr(std::move(design), n, powers.size(), curve.z);

    FitResult fit;
    fit.basis = basis;
    fit.coefficients.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    for (std::size_t j = 0; j < powers.size(); ++j) {
        const int p = powers[j];
        const double c = scaled[j] / std::pow(scale, p);
        if (p == 0) {
            fit.constant_term = c;
        } else {
            fit.coefficients[static_cast<std::size_t>(p)] = c;
        }
    }
    fit.r = curve.r;
    fit.deviation.resize(n);
    const SagProfile profile = fit.sag_profile();
    for (std::size_t i = 0; i < n; ++i) {
        fit.deviation[i] = profile.value(curve.r[i]) - curve.z[i];
        fit.max_abs_deviation = std::max(fit.max_abs_deviation, std::abs(fit.deviation[i]));
    }
    return fit;
}

}  // namespace ionmirror::corrector
