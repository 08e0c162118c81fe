#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionmirror/geometry.hpp"
#include "ionmirror/layout.hpp"

namespace ionmirror::corrector {

/// Schmidt corrector thickness z(r) = (r^4 - k r^2) / (4 (n-1) R^3), the
/// lowest-order analytic shape. The printed normalization factor reduces to 1
/// in millimeter units (pinned by back-substituting the published quartic
/// coefficient for BK7 at 493 nm).
double schmidt_sag(double r, double mirror_radius, double n, double k);

/// Coefficient of r^4 for the k = 0 plate: 1 / (4 (n-1) R^3).
double quartic_coefficient(double mirror_radius, double n);

enum class CurveSource { AnalyticSchmidt, IterativeNumeric, PolynomialFit };

/// Sampled corrector sag profile on a uniform radial grid spanning the full
/// plate aperture [0, aperture_radius]. z(0) = 0 by construction.
struct CorrectorCurve {
    std::vector<double> r;  ///< mm, strictly increasing, uniform
    std::vector<double> z;  ///< mm
    CurveSource source = CurveSource::IterativeNumeric;
    int iterations_used = 0;
    bool converged = false;
    std::vector<double> sag_change_per_iteration;  ///< max |dz| after each pass (mm)
    /// Exact surface the synthesis converged on (the integrated slope field);
    /// absent for curves reloaded from their sample table.
    std::optional<geometry::SagProfile> exact_profile;

    geometry::SagProfile sag_profile() const {
        return exact_profile ? *exact_profile : geometry::SagProfile::sampled(r, z);
    }
};

struct SynthesisParams {
    int n_grid = 1025;             ///< curve samples over [0, aperture_radius]
    int fan_rays = 256;            ///< rays uniform in mirror height
    double tolerance = 1.2335e-4;  ///< lambda/4 at 493.4 nm, in mm
    int max_iterations = 50;
    /// Target output slope per mm of exit radius: 0 collimates; a nonzero
    /// value makes the exit slope proportional to the distance from the axis.
    double output_slope_per_mm = 0.0;
};

struct NonConvergence : std::runtime_error {
    NonConvergence(int iterations, std::vector<double> history)
        : std::runtime_error("corrector derivation did not converge after " +
                             std::to_string(iterations) + " iterations; last max sag change " +
                             std::to_string(history.empty() ? 0.0 : history.back()) + " mm"),
          iterations(iterations),
          last_change_mm(history.empty() ? 0.0 : history.back()),
          sag_change_per_iteration(std::move(history)) {}
    int iterations;
    double last_change_mm;
    std::vector<double> sag_change_per_iteration;
};

/// Derive the exit-face sag that collimates the full fan. Passes are
/// inherently sequential; within a pass the fan is evaluated in input order
/// so the result is bit-reproducible. Each pass traces
/// the fan off the mirror, through the viewport and the flat entry face, to
/// the current exit surface; converts the internal ray angle at each arrival
/// radius into the surface slope that refracts it parallel to the axis;
/// resamples the slope field onto the uniform grid (monotone cubic, held
/// constant beyond the outermost ray) and integrates it from the vertex.
/// Converged when the max sag change between passes drops below tolerance.
CorrectorCurve derive_corrector(const layout::LayoutParams& layout,
                                const SynthesisParams& params = {});

/// Analytic Schmidt plate sampled on the same grid convention.
CorrectorCurve analytic_quartic_curve(const layout::LayoutParams& layout, int n_grid = 1025);

/// Worst-case |output angle| over the fan after mirror, viewport and the
/// given corrector exit face.
double collimation_residual(const geometry::SagProfile& exit_sag,
                            const layout::LayoutParams& layout, int fan_rays = 256);
double collimation_residual(const CorrectorCurve& curve, const layout::LayoutParams& layout,
                            int fan_rays = 256);
/// Residual of the bare mirror + viewport (no corrector).
double collimation_residual_uncorrected(const layout::LayoutParams& layout, int fan_rays = 256);

enum class FitBasis { EvenOnly, OddOnly, Full };

std::string to_string(FitBasis basis);

struct InsufficientSamples : std::runtime_error {
    InsufficientSamples() : std::runtime_error("curve has fewer samples than fit coefficients") {}
};
using RankDeficient = numeric::RankDeficient;

/// Least-squares polynomial fit of a corrector curve. The constant term is
/// included in the regression and then removed so fit(0) = 0; coefficients[j]
/// multiplies r^j with coefficients[0] always 0.
struct FitResult {
    FitBasis basis = FitBasis::Full;
    std::vector<double> coefficients;   ///< order-indexed, mm * mm^-j
    double constant_term = 0.0;         ///< the removed regression constant (mm)
    std::vector<double> r;              ///< same grid as the source curve
    std::vector<double> deviation;      ///< fit(r) - curve(r), after constant removal (mm)
    double max_abs_deviation = 0.0;     ///< mm

    geometry::SagProfile sag_profile() const {
        return geometry::SagProfile::polynomial(coefficients);
    }
};

FitResult fit_polynomial(const CorrectorCurve& curve, FitBasis basis, int max_order = 10);

}  // namespace ionmirror::corrector
