#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ionmirror/corrector.hpp"
#include "ionmirror/layout.hpp"

using namespace ionmirror;
using corrector::CorrectorCurve;
using corrector::FitBasis;

namespace {

const layout::LayoutParams kLayout{};

CorrectorCurve& converged_curve() {
    static CorrectorCurve curve = corrector::derive_corrector(kLayout);
    return curve;
}

double sum_squared_error(const CorrectorCurve& curve, const std::vector<double>& coeffs,
                         double constant) {
    double sse = 0.0;
    for (std::size_t i = 0; i < curve.r.size(); ++i) {
        double fit = constant;
        for (std::size_t j = 1; j < coeffs.size(); ++j) {
            fit += coeffs[j] * std::pow(curve.r[i], static_cast<double>(j));
        }
        const double d = fit - curve.z[i];
        sse += d * d;
    }
    return sse;
}

}  // namespace

TEST_CASE("schmidt_sag: vertex reference and published values") {
    CHECK(corrector::schmidt_sag(0.0, 20.0, 1.5219, 0.0) == 0.0);
    CHECK(corrector::schmidt_sag(0.0, 35.0, 1.46, 2.0) == 0.0);
    // r = 10 mm, k = 0: the published quartic gives 0.598785 mm
    CHECK(corrector::schmidt_sag(10.0, 20.0, 1.5219, 0.0) ==
          doctest::Approx(0.598785).epsilon(0.005));
    // r = 5, k = 2: direct closed-form arithmetic
    const double direct = (625.0 - 2.0 * 25.0) / (4.0 * 0.5219 * 8000.0);
    CHECK(corrector::schmidt_sag(5.0, 20.0, 1.5219, 2.0) ==
          doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("analytic quartic curve samples the closed-form plate") {
    const auto curve = corrector::analytic_quartic_curve(kLayout, 101);
    CHECK(curve.source == corrector::CurveSource::AnalyticSchmidt);
    CHECK(curve.converged);
    const double n = kLayout.corrector_index();
    for (std::size_t i = 0; i < curve.r.size(); i += 10) {
        CHECK(curve.z[i] ==
              doctest::Approx(corrector::schmidt_sag(curve.r[i], kLayout.mirror_radius, n, 0.0))
                  .epsilon(1e-14));
    }
    // the traceable profile is the exact polynomial, not a resampling
    const auto sag = curve.sag_profile();
    CHECK(sag.is_polynomial());
    CHECK(sag.value(7.77) ==
          doctest::Approx(corrector::schmidt_sag(7.77, kLayout.mirror_radius, n, 0.0))
              .epsilon(1e-14));
}

TEST_CASE("derive: zero-aperture fan gives a flat plate") {
    layout::LayoutParams tiny = kLayout;
    tiny.aperture_radius = 1e-6;
    corrector::SynthesisParams params;
    params.n_grid = 64;
    params.fan_rays = 8;
    const CorrectorCurve curve = corrector::derive_corrector(tiny, params);
    CHECK(curve.converged);
    for (double z : curve.z) CHECK(std::abs(z) < 1e-12);
}

TEST_CASE("derive: default layout converges quickly within lambda/4") {
    const CorrectorCurve& curve = converged_curve();
    CHECK(curve.converged);
    CHECK(curve.iterations_used <= 20);
    CHECK(curve.sag_change_per_iteration.back() < 1.2335e-4);
    CHECK(curve.z.front() == 0.0);
    // strictly increasing uniform grid
    const double dr = curve.r[1] - curve.r[0];
    for (std::size_t i = 1; i < curve.r.size(); ++i) {
        CHECK(curve.r[i] > curve.r[i - 1]);
        CHECK(curve.r[i] - curve.r[i - 1] == doctest::Approx(dr).epsilon(1e-9));
    }
}

TEST_CASE("derive: numeric curve departs from the quartic by tens of um at the edge") {
    const CorrectorCurve& curve = converged_curve();
    const double c4 = corrector::quartic_coefficient(kLayout.mirror_radius,
                                                     kLayout.corrector_index());
    // compare where rays actually land (inside the beam, ~6.5 mm)
    double max_gap = 0.0;
    for (std::size_t i = 0; i < curve.r.size(); ++i) {
        if (curve.r[i] > 6.4) break;
        const double quartic = c4 * std::pow(curve.r[i], 4.0);
        max_gap = std::max(max_gap, std::abs(curve.z[i] - quartic));
    }
    CHECK(max_gap > 0.02);   // tens of micrometers
    CHECK(max_gap < 0.30);
}

TEST_CASE("derive: non-convergence reports the iteration history") {
    corrector::SynthesisParams params;
    params.tolerance = 1e-13;
    params.max_iterations = 3;
    try {
        corrector::derive_corrector(kLayout, params);
        FAIL("expected NonConvergence");
    } catch (const corrector::NonConvergence& e) {
        CHECK(e.iterations == 3);
        CHECK(e.sag_change_per_iteration.size() == 3);
        CHECK(e.last_change_mm > 0.0);
    }
}

TEST_CASE("collimation residual: converged < 1e-5, quartic worse, bare mirror worst") {
    const CorrectorCurve& curve = converged_curve();
    const double converged = corrector::collimation_residual(curve, kLayout);
    CHECK(converged < 1e-5);

    const auto quartic = geometry::SagProfile::polynomial(
        {0.0, 0.0, 0.0, 0.0,
         corrector::quartic_coefficient(kLayout.mirror_radius, kLayout.corrector_index())});
    const double quartic_residual = corrector::collimation_residual(quartic, kLayout);
    CHECK(quartic_residual > converged);

    const double raw = corrector::collimation_residual_uncorrected(kLayout);
    CHECK(raw > quartic_residual);
    // the marginal ray of the 0.9-NA mirror carries ~0.08 rad of aberration slope
    CHECK(raw == doctest::Approx(0.0808).epsilon(0.02));
}

TEST_CASE("property: extra passes beyond convergence stay inside the fixed point") {
    const CorrectorCurve& curve = converged_curve();
    corrector::SynthesisParams tighter;
    tighter.tolerance = curve.sag_change_per_iteration.back() / 50.0;
    const CorrectorCurve more = corrector::derive_corrector(kLayout, tighter);
    CHECK(more.iterations_used > curve.iterations_used);
    // every pass applied after the lambda/4-converged one moves the curve (and
    // hence the integrated slopes, change/dr) by less than the tolerance again
    for (std::size_t i = static_cast<std::size_t>(curve.iterations_used);
         i < more.sag_change_per_iteration.size(); ++i) {
        CHECK(more.sag_change_per_iteration[i] < 1.2335e-4);
    }
    // and the refined curve stays within lambda/4 of the converged one
    double diff = 0.0;
    for (std::size_t i = 0; i < curve.z.size(); ++i) {
        diff = std::max(diff, std::abs(curve.z[i] - more.z[i]));
    }
    CHECK(diff < 1.2335e-4);
}

TEST_CASE("property: grid doubling changes the curve by less than lambda/10") {
    const CorrectorCurve& base = converged_curve();  // 1025 samples
    corrector::SynthesisParams fine;
    fine.n_grid = 2049;
    const CorrectorCurve dense = corrector::derive_corrector(kLayout, fine);
    double worst = 0.0;
    for (std::size_t i = 0; i < base.r.size(); ++i) {
        worst = std::max(worst, std::abs(base.z[i] - dense.z[2 * i]));
    }
    CHECK(worst < 4.934e-5);  // lambda/10 in mm
}

TEST_CASE("property: trace symmetry in signed r") {
    const auto sag = converged_curve().sag_profile();
    const auto sys = layout::build_system(kLayout, &sag);
    for (double h : {1.0, 4.4, 8.3}) {
        const auto up = geometry::trace(sys, layout::aim_at_mirror(kLayout, h)).ray;
        const auto dn = geometry::trace(sys, layout::aim_at_mirror(kLayout, -h)).ray;
        CHECK(up.r == doctest::Approx(-dn.r).epsilon(1e-12));
        CHECK(up.u == doctest::Approx(-dn.u).epsilon(1e-12));
    }
}

TEST_CASE("fit: recovers an exact quartic in the even basis") {
    CorrectorCurve quartic;
    quartic.source = corrector::CurveSource::AnalyticSchmidt;
    for (int i = 0; i <= 200; ++i) {
        const double r = 9.0 * i / 200.0;
        quartic.r.push_back(r);
        quartic.z.push_back(5.98785e-5 * r * r * r * r);
    }
    const auto fit = corrector::fit_polynomial(quartic, FitBasis::EvenOnly);
    CHECK(fit.coefficients[4] == doctest::Approx(5.98785e-5).epsilon(1e-10));
    for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
        if (j == 4) continue;
        CHECK(std::abs(fit.coefficients[j]) < 1e-12);
    }
    CHECK(std::abs(fit.constant_term) < 1e-12);
    CHECK(fit.max_abs_deviation < 1e-10);
}

TEST_CASE("fit: basis structure (even has no odd terms and vice versa)") {
    const CorrectorCurve& curve = converged_curve();
    const auto even = corrector::fit_polynomial(curve, FitBasis::EvenOnly);
    const auto odd = corrector::fit_polynomial(curve, FitBasis::OddOnly);
    for (std::size_t j = 1; j < even.coefficients.size(); ++j) {
        if (j % 2 == 1) CHECK(even.coefficients[j] == 0.0);
        if (j % 2 == 0) CHECK(odd.coefficients[j] == 0.0);
    }
    CHECK(even.r.size() == curve.r.size());
    CHECK(even.deviation.size() == curve.r.size());
}

TEST_CASE("fit: deviation scale and ordering on the converged curve") {
    const CorrectorCurve& curve = converged_curve();
    const auto even = corrector::fit_polynomial(curve, FitBasis::EvenOnly);
    const auto odd = corrector::fit_polynomial(curve, FitBasis::OddOnly);
    const auto full = corrector::fit_polynomial(curve, FitBasis::Full);
    CHECK(full.max_abs_deviation > 5e-3);   // [5, 40] um window
    CHECK(full.max_abs_deviation < 40e-3);
    CHECK(odd.max_abs_deviation >= even.max_abs_deviation);
    CHECK(odd.max_abs_deviation >= full.max_abs_deviation);
}

TEST_CASE("property: perturbing any fitted coefficient never lowers the SSE") {
    const CorrectorCurve& curve = converged_curve();
    for (FitBasis basis : {FitBasis::EvenOnly, FitBasis::OddOnly, FitBasis::Full}) {
        const auto fit = corrector::fit_polynomial(curve, basis);
        const double sse0 = sum_squared_error(curve, fit.coefficients, fit.constant_term);
        for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
            if (fit.coefficients[j] == 0.0) continue;
            for (double factor : {0.99, 1.01}) {
                auto perturbed = fit.coefficients;
                perturbed[j] *= factor;
                CHECK(sum_squared_error(curve, perturbed, fit.constant_term) >= sse0);
            }
        }
        for (double factor : {0.99, 1.01}) {
            CHECK(sum_squared_error(curve, fit.coefficients, fit.constant_term * factor) >=
                  sse0);
        }
    }
}

TEST_CASE("fit: insufficient samples is an error") {
    CorrectorCurve coarse;
    for (int i = 0; i < 8; ++i) {
        coarse.r.push_back(i);
        coarse.z.push_back(i * i * 1e-4);
    }
    CHECK_THROWS_AS(corrector::fit_polynomial(coarse, FitBasis::Full),
                    corrector::InsufficientSamples);
}

TEST_CASE("derive: apertures past the caustic fold are diagnosed") {
    layout::LayoutParams wide = kLayout;
    wide.mirror_half_width = 13.0;
    wide.aperture_radius = 11.9;  // arrivals at the exit plane fold over
    corrector::SynthesisParams params;
    params.n_grid = 129;
    params.fan_rays = 64;
    try {
        corrector::derive_corrector(wide, params);
        FAIL("expected a caustic diagnostic");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("caustic") != std::string::npos);
    }
}

TEST_CASE("alternative slope condition: proportional output slopes") {
    corrector::SynthesisParams params;
    params.output_slope_per_mm = 2e-3;
    params.n_grid = 257;
    params.fan_rays = 64;
    const CorrectorCurve curve = corrector::derive_corrector(kLayout, params);
    CHECK(curve.converged);
    // traced output slopes now follow u = k * r instead of 0
    const auto sag = curve.sag_profile();
    const auto sys = layout::build_system(kLayout, &sag);
    for (double h : {2.0, 5.0, 8.0}) {
        const auto out = geometry::trace(sys, layout::aim_at_mirror(kLayout, h)).ray;
        CHECK(out.u == doctest::Approx(params.output_slope_per_mm * out.r).epsilon(0.02));
    }
}
