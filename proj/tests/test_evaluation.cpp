#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ionmirror/evaluation.hpp"

using namespace ionmirror;
using evaluation::ImagingStage;
using evaluation::Variant;
using geometry::SagProfile;

namespace {

const layout::LayoutParams kLayout{};

const corrector::CorrectorCurve& numeric_curve() {
    static corrector::CorrectorCurve curve = corrector::derive_corrector(kLayout);
    return curve;
}

SagProfile fit_profile(corrector::FitBasis basis) {
    return corrector::fit_polynomial(numeric_curve(), basis).sag_profile();
}

double best_rms(Variant v, const SagProfile* sag, int fan = 128) {
    const auto sys = evaluation::variant_system(kLayout, v, sag);
    ImagingStage stage;
    stage.image_plane_z = evaluation::best_focus(sys, stage, fan, kLayout);
    return evaluation::spot_size(sys, stage, 0.0, 0.0, fan, kLayout).rms_radius;
}

}  // namespace

TEST_CASE("parabola baseline: exact collimation before the viewport") {
    auto sys = layout::build_system(kLayout, nullptr, layout::MirrorShape::Parabolic);
    sys.surfaces.resize(1);  // mirror only: rays before the viewport
    for (double h = 0.5; h <= kLayout.aperture_radius; h += 0.25) {
        const auto out = geometry::trace(sys, layout::aim_at_mirror(kLayout, h)).ray;
        CHECK(std::abs(out.u) < 1e-10);
    }
}

TEST_CASE("parabola variant: geometric spot below the diffraction reference") {
    const double rms_mm = best_rms(Variant::Parabola, nullptr);
    const double limit_um = evaluation::diffraction_limit_um(493.4, 0.2);  // ~1.5 um
    CHECK(rms_mm * 1e3 < limit_um);
}

TEST_CASE("spot metrics: counts, centroid and vignetting bookkeeping") {
    const auto sys = evaluation::variant_system(kLayout, Variant::Quartic, nullptr);
    ImagingStage stage;
    const auto m = evaluation::spot_size(sys, stage, 0.0, 0.0, 128, kLayout);
    CHECK(m.n_rays_traced >= 126);
    CHECK(m.n_rays_vignetted == 0);
    CHECK(m.rms_radius >= 0.0);
    CHECK(std::abs(m.centroid_r) < 0.05);  // on-axis source: centroid near the axis
    CHECK_THROWS_AS(evaluation::spot_size(sys, stage, 0.0, 0.0, 16, kLayout),
                    std::invalid_argument);
}

TEST_CASE("spot metrics: fan density doubling changes rms by < 2%") {
    for (Variant v : {Variant::Quartic, Variant::FitFull, Variant::NoCorrector}) {
        const SagProfile full = fit_profile(corrector::FitBasis::Full);
        const SagProfile* sag = v == Variant::FitFull ? &full : nullptr;
        const double a = best_rms(v, sag, 128);
        const double b = best_rms(v, sag, 256);
        CHECK(std::abs(a - b) / a < 0.02);
    }
}

TEST_CASE("monotone aberration: uncorrected rms grows with aperture") {
    double prev = 0.0;
    for (double aperture : {5.0, 7.0, 9.0}) {
        layout::LayoutParams p = kLayout;
        p.aperture_radius = aperture;
        const auto sys = evaluation::variant_system(p, Variant::NoCorrector, nullptr);
        ImagingStage stage;
        stage.image_plane_z = evaluation::best_focus(sys, stage, 128, p);
        const double rms = evaluation::spot_size(sys, stage, 0.0, 0.0, 128, p).rms_radius;
        CHECK(rms > prev);
        prev = rms;
    }
}

TEST_CASE("best focus matches the closed-form straight-ray minimum") {
    // rms^2 is exactly quadratic in the plane position for straight rays, so
    // the vertex  z* = z0 - cov(r, tan u) / var(tan u)  is an independent oracle
    const auto sys = evaluation::variant_system(kLayout, Variant::Quartic, nullptr);
    ImagingStage stage;
    const double z0 = stage.nominal_focus_z();
    double sr = 0, st = 0, srt = 0, stt = 0;
    int n = 0;
    for (int i = 0; i < 128; ++i) {
        const double h = -kLayout.aperture_radius +
                         2.0 * kLayout.aperture_radius * i / 127.0;
        if (std::abs(h) < 1e-9) continue;
        const auto out = geometry::trace(sys, layout::aim_at_mirror(kLayout, h)).ray;
        const double t_in = std::tan(out.u);
        const double y = out.r + t_in * (stage.objective_principal_plane_z - out.z);
        const double t = t_in - y / stage.objective_focal_length;
        const double r = y + t * (z0 - stage.objective_principal_plane_z);
        sr += r;
        st += t;
        srt += r * t;
        stt += t * t;
        ++n;
    }
    const double cov = srt / n - (sr / n) * (st / n);
    const double var = stt / n - (st / n) * (st / n);
    const double oracle = z0 - cov / var;
    const double golden = evaluation::best_focus(sys, stage, 128, kLayout);
    CHECK(golden == doctest::Approx(oracle).epsilon(2e-3 / oracle));
}

TEST_CASE("quartic vs full-fit spot ratio is about 3") {
    const SagProfile full = fit_profile(corrector::FitBasis::Full);
    const double quartic = best_rms(Variant::Quartic, nullptr);
    const double fitted = best_rms(Variant::FitFull, &full);
    const double ratio = quartic / fitted;
    CHECK(ratio > 2.0);
    CHECK(ratio < 4.5);
}

TEST_CASE("defocus sweep: degenerate single offset equals spot_size") {
    const auto sys = evaluation::variant_system(kLayout, Variant::Quartic, nullptr);
    ImagingStage stage;
    stage.image_plane_z = evaluation::best_focus(sys, stage, 128, kLayout);
    const auto rows = evaluation::defocus_sweep(kLayout, {{Variant::Quartic, nullptr}}, {0.0},
                                                stage, 128);
    REQUIRE(rows.size() == 1);
    const auto direct = evaluation::spot_size(sys, stage, 0.0, 0.0, 128, kLayout);
    CHECK(rows[0].rms_um == doctest::Approx(direct.rms_radius * 1e3).epsilon(1e-12));
    CHECK_THROWS_AS(
        evaluation::defocus_sweep(kLayout, {{Variant::Quartic, nullptr}}, {}, stage, 128),
        std::invalid_argument);
}

TEST_CASE("defocus sweep: corrected variants beat the quartic across +-50 um") {
    const SagProfile even = fit_profile(corrector::FitBasis::EvenOnly);
    const SagProfile full = fit_profile(corrector::FitBasis::Full);
    ImagingStage stage;
    std::vector<double> offsets{-50, -25, 0, 25, 50};
    const auto rows = evaluation::defocus_sweep(
        kLayout,
        {{Variant::Quartic, nullptr}, {Variant::FitEven, &even}, {Variant::FitFull, &full}},
        offsets, stage, 128);
    for (double offset : offsets) {
        double quartic = 0, ev = 0, fl = 0;
        for (const auto& row : rows) {
            if (row.offset_um != offset) continue;
            if (row.variant == Variant::Quartic) quartic = row.rms_um;
            if (row.variant == Variant::FitEven) ev = row.rms_um;
            if (row.variant == Variant::FitFull) fl = row.rms_um;
        }
        CHECK(ev < quartic);
        CHECK(fl < quartic);
        // the two good fits stay close to each other across the sweep
        CHECK(std::abs(ev - fl) < 0.6 * std::max(ev, fl));
    }
}

TEST_CASE("defocus sweep: bare mirror is worst at best focus") {
    const SagProfile full = fit_profile(corrector::FitBasis::Full);
    ImagingStage stage;
    const auto rows = evaluation::defocus_sweep(
        kLayout, {{Variant::NoCorrector, nullptr}, {Variant::Quartic, nullptr},
                 {Variant::FitFull, &full}},
        {0.0}, stage, 128);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rms_um > rows[1].rms_um);
    CHECK(rows[1].rms_um > rows[2].rms_um);
}

TEST_CASE("heavy vignetting raises the sweep warning flag") {
    layout::LayoutParams wide = kLayout;
    wide.aperture_radius = 11.5;  // fan overfills the 10 mm physical mirror
    ImagingStage stage;
    const auto rows =
        evaluation::defocus_sweep(wide, {{Variant::NoCorrector, nullptr}}, {0.0}, stage, 128);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].vignetted > 12);  // > 10% of the fan
    CHECK(rows[0].vignetting_warning);
}

TEST_CASE("collection efficiency: circular caps") {
    CHECK(evaluation::collection_efficiency_circular(0.9) ==
          doctest::Approx(0.2820550528229664).epsilon(1e-12));
    CHECK(evaluation::collection_efficiency_circular(0.25) ==
          doctest::Approx(0.015877081724072872).epsilon(1e-12));
    // hemisphere limit
    CHECK(evaluation::collection_efficiency_circular(0.999999) ==
          doctest::Approx(0.5).epsilon(1e-2));
    CHECK_THROWS_AS(evaluation::collection_efficiency_circular(0.0),
                    evaluation::InvalidAperture);
    CHECK_THROWS_AS(evaluation::collection_efficiency_circular(1.0),
                    evaluation::InvalidAperture);
}

TEST_CASE("collection efficiency: square mirror and solid-angle ratios") {
    const double square = evaluation::collection_efficiency_square(10.0, 10.0);
    CHECK(square == doctest::Approx(1.0 / 6.0).epsilon(1e-12));  // cube-face geometry
    const double circular = evaluation::collection_efficiency_circular(0.9);
    const double lens = evaluation::collection_efficiency_circular(0.25);
    CHECK(circular / lens == doctest::Approx(17.765).epsilon(0.01));
    // bounded by inscribed and circumscribed circular caps
    const double d = 10.0;
    const auto cap = [&](double radius) {
        const double na = radius / std::hypot(radius, d);
        return evaluation::collection_efficiency_circular(na);
    };
    CHECK(square > cap(10.0));                  // inscribed circle
    CHECK(square < cap(10.0 * std::sqrt(2.0))); // circumscribed circle
    CHECK_THROWS_AS(evaluation::collection_efficiency_square(-1.0, 5.0),
                    evaluation::InvalidAperture);
}

TEST_CASE("efficiency bounds: always in (0, 0.5)") {
    for (double na : {0.05, 0.3, 0.6, 0.95}) {
        const double e = evaluation::collection_efficiency_circular(na);
        CHECK(e > 0.0);
        CHECK(e < 0.5);
    }
    for (double hw : {1.0, 5.0, 20.0}) {
        for (double d : {2.0, 10.0, 50.0}) {
            const double e = evaluation::collection_efficiency_square(hw, d);
            CHECK(e > 0.0);
            CHECK(e < 0.5);
        }
    }
}

TEST_CASE("diffraction limit: Airy reference values and linearity") {
    CHECK(evaluation::diffraction_limit_um(493.0, 0.2) ==
          doctest::Approx(1.50365).epsilon(1e-10));
    CHECK(evaluation::diffraction_limit_um(493.0, 0.9) ==
          doctest::Approx(0.3341444444).epsilon(1e-9));
    CHECK(evaluation::diffraction_limit_um(986.0, 0.2) ==
          doctest::Approx(2.0 * 1.50365).epsilon(1e-12));
    CHECK_THROWS_AS(evaluation::diffraction_limit_um(493.0, 0.0),
                    evaluation::InvalidAperture);
}

TEST_CASE("imaging stage validation") {
    ImagingStage bad;
    bad.image_plane_z = bad.objective_principal_plane_z - 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    ImagingStage negative;
    negative.objective_focal_length = -5.0;
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}
