// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line each. Exit code is the number of failed criteria.
//
//   ./acceptance          run all
//   ./acceptance 3 7 12   run a subset

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ionmirror/commands.hpp"
#include "ionmirror/config.hpp"
#include "ionmirror/corrector.hpp"
#include "ionmirror/evaluation.hpp"
#include "ionmirror/trap.hpp"
#include "support/vector_tracer.hpp"

using namespace ionmirror;
namespace fs = std::filesystem;

namespace {

const layout::LayoutParams kLayout{};
constexpr double kLambdaQuarterMm = 1.2335e-4;

const corrector::CorrectorCurve& numeric_curve() {
    static corrector::CorrectorCurve curve = corrector::derive_corrector(kLayout);
    return curve;
}

const std::vector<trap::SweepPoint>& trap_sweep_points() {
    static std::vector<trap::SweepPoint> points =
        trap::displacement_sweep(trap::TrapSystem::reference_default(), {3.0, 5.0, 8.0, 12.0});
    return points;
}

double variant_best_rms_um(evaluation::Variant v, const geometry::SagProfile* sag,
                           double radial_offset_um, double* image_plane = nullptr) {
    const auto sys = evaluation::variant_system(kLayout, v, sag);
    evaluation::ImagingStage stage;
    stage.image_plane_z = evaluation::best_focus(sys, stage, 128, kLayout);
    if (image_plane) *image_plane = stage.image_plane_z;
    return evaluation::spot_size(sys, stage, 0.0, radial_offset_um, 128, kLayout).rms_radius *
           1e3;
}

bool criterion_eq2(std::ostream& out) {
    const double n = materials::index(materials::Material::BK7, 493.4);
    const double c4 = corrector::quartic_coefficient(20.0, n);
    const double rel = std::abs(c4 - 5.98785e-5) / 5.98785e-5;
    out << "quartic coefficient " << c4 << " mm^-3 vs published 5.98785e-05 (rel err " << rel
        << ", tol 5e-03)";
    return rel < 5e-3;
}

bool criterion_convergence(std::ostream& out) {
    const auto& curve = numeric_curve();
    out << "converged=" << (curve.converged ? "yes" : "no") << " after "
        << curve.iterations_used << " iterations (limit 20), last change "
        << curve.sag_change_per_iteration.back() << " mm (tol " << kLambdaQuarterMm << ")";
    return curve.converged && curve.iterations_used <= 20 &&
           curve.sag_change_per_iteration.back() < kLambdaQuarterMm;
}

bool criterion_fit_deviation(std::ostream& out) {
    const auto& curve = numeric_curve();
    const auto even = corrector::fit_polynomial(curve, corrector::FitBasis::EvenOnly);
    const auto odd = corrector::fit_polynomial(curve, corrector::FitBasis::OddOnly);
    const auto full = corrector::fit_polynomial(curve, corrector::FitBasis::Full);
    const double full_um = full.max_abs_deviation * 1e3;
    out << "max |deviation| um: full " << full_um << " (window [5, 40]), even "
        << even.max_abs_deviation * 1e3 << ", odd " << odd.max_abs_deviation * 1e3
        << "; ordering odd>=even " << (odd.max_abs_deviation >= even.max_abs_deviation)
        << ", odd>=full " << (odd.max_abs_deviation >= full.max_abs_deviation);
    return full_um >= 5.0 && full_um <= 40.0 &&
           odd.max_abs_deviation >= even.max_abs_deviation &&
           odd.max_abs_deviation >= full.max_abs_deviation;
}

bool criterion_spot_ratio(std::ostream& out) {
    const auto full_sag =
        corrector::fit_polynomial(numeric_curve(), corrector::FitBasis::Full).sag_profile();
    const double quartic = variant_best_rms_um(evaluation::Variant::Quartic, nullptr, 0.0);
    const double full = variant_best_rms_um(evaluation::Variant::FitFull, &full_sag, 0.0);
    const double ratio = quartic / full;
    out << "rms quartic " << quartic << " um / rms full-fit " << full << " um = " << ratio
        << " (window [2, 4.5])";
    return ratio >= 2.0 && ratio <= 4.5;
}

bool criterion_off_axis(std::ostream& out) {
    const auto full_sag =
        corrector::fit_polynomial(numeric_curve(), corrector::FitBasis::Full).sag_profile();
    const auto sys = evaluation::variant_system(kLayout, evaluation::Variant::FitFull, &full_sag);
    evaluation::ImagingStage stage;
    stage.image_plane_z = evaluation::best_focus(sys, stage, 128, kLayout);
    const double on_axis =
        evaluation::spot_size(sys, stage, 0.0, 0.0, 128, kLayout).rms_radius;
    const double off_axis =
        evaluation::spot_size(sys, stage, 0.0, 100.0, 128, kLayout).rms_radius;
    const double growth = off_axis / on_axis - 1.0;
    out << "rms growth at 100 um radial offset: " << growth * 100.0
        << "% (required < 5%; meridional field coma of the 0.75-NA mirror adds ~35 um rms "
           "even with a perfect reflector, so the 2D model cannot reach the target)";
    return growth < 0.05;
}

bool criterion_parabola(std::ostream& out) {
    auto sys = layout::build_system(kLayout, nullptr, layout::MirrorShape::Parabolic);
    sys.surfaces.resize(1);  // before the viewport
    double worst = 0.0;
    for (int i = 1; i <= 256; ++i) {
        const double h = kLayout.aperture_radius * i / 256.0;
        const auto outray = geometry::trace(sys, layout::aim_at_mirror(kLayout, h)).ray;
        worst = std::max(worst, std::abs(outray.u));
    }
    out << "max |collimation residual| " << worst << " rad (tol 1e-10)";
    return worst < 1e-10;
}

bool criterion_efficiency(std::ostream& out) {
    const double c09 = evaluation::collection_efficiency_circular(0.9);
    const double c025 = evaluation::collection_efficiency_circular(0.25);
    const double ratio = c09 / c025;
    const auto cfg = config::defaults();
    const double square = evaluation::collection_efficiency_square(
        cfg.square_half_width_mm, cfg.square_distance_effective_mm());
    out << "circular NA 0.9: " << c09 << " (0.282 +- 0.001), NA 0.25: " << c025
        << " (0.0159 +- 0.0005), ratio " << ratio << " (17.8 +- 0.2); square-mirror ratio "
        << square / c025 << " beside the experiment's ~15";
    return std::abs(c09 - 0.282) < 1e-3 && std::abs(c025 - 0.0159) < 5e-4 &&
           std::abs(ratio - 17.8) < 0.2;
}

bool criterion_trap_anchor(std::ostream& out) {
    const auto& points = trap_sweep_points();
    const double at5 = points[1].rms_displacement_um;
    bool monotone = true;
    for (std::size_t i = 1; i < points.size(); ++i) {
        monotone = monotone &&
                   points[i].rms_displacement_um < points[i - 1].rms_displacement_um;
    }
    out << "rms at 5 mm: " << at5 << " um (window (0.05, 1)); sweep {3,5,8,12} mm: ";
    for (const auto& p : points) out << p.rms_displacement_um << " ";
    out << "um, strictly decreasing=" << monotone;
    return at5 < 1.0 && at5 > 0.05 && monotone;
}

bool criterion_oracle_equivalence(std::ostream& out) {
    bool ok = true;
    out << "rms vs pseudopotential shift (rel dev, tol 0.2): ";
    for (const auto& p : trap_sweep_points()) {
        const double rel = std::abs(p.rms_displacement_um - p.equilibrium_shift_um) /
                           p.equilibrium_shift_um;
        out << p.distance_mm << "mm:" << rel << " ";
        ok = ok && rel < 0.2;
    }
    return ok;
}

bool criterion_calibration(std::ostream& out) {
    const auto t = trap::TrapSystem::reference_default();
    const double measured = trap::measure_secular_frequency(t);
    const double formula = t.secular_frequency_formula();
    const double dev_target = std::abs(measured - 1.0e6) / 1.0e6;
    const double dev_formula = std::abs(measured - formula) / formula;
    out << "simulated secular " << measured / 1e6 << " MHz: vs 1 MHz " << dev_target * 100.0
        << "%, vs Mathieu formula " << dev_formula * 100.0 << "% (tol 5%); q = "
        << t.mathieu_q();
    return dev_target < 0.05 && dev_formula < 0.05;
}

bool criterion_kernel(std::ostream& out) {
    const auto quartic_sag = geometry::SagProfile::polynomial(
        {0.0, 0.0, 0.0, 0.0,
         corrector::quartic_coefficient(kLayout.mirror_radius, kLayout.corrector_index())});
    const auto sys = layout::build_system(kLayout, &quartic_sag);
    const auto back = geometry::reversed(sys);

    double snell_worst = 0.0, reverse_worst = 0.0, vector_worst = 0.0;
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> height(0.1, kLayout.aperture_radius - 0.1);
    for (int i = 0; i < 64; ++i) {
        const auto in = layout::aim_at_mirror(kLayout, height(rng));
        const auto result = geometry::trace(sys, in);
        for (const auto& ev : result.events) {
            snell_worst = std::max(snell_worst, ev.snell_residual);
        }
        // reversibility (turn around clear of the last surface)
        const geometry::MeridionalRay turned = result.ray.propagated(5.0);
        const geometry::MeridionalRay rev{turned.z, turned.r,
                                          std::remainder(turned.u + M_PI, 2.0 * M_PI)};
        const auto home = geometry::trace(back, rev).ray;
        const double s = (in.z - home.z) / home.dir_z();
        reverse_worst = std::max(reverse_worst, std::abs(home.r + s * home.dir_r() - in.r));
        reverse_worst = std::max(
            reverse_worst, std::abs(std::remainder(home.u - (in.u + M_PI), 2.0 * M_PI)));
        // 2D vs 3D
        const auto out3d = testing::trace_3d(sys, testing::embed(in));
        vector_worst = std::max(vector_worst, std::abs(result.ray.r - out3d.position.x));
        vector_worst = std::max(vector_worst, std::abs(result.ray.z - out3d.position.z));
        vector_worst =
            std::max(vector_worst, std::abs(std::sin(result.ray.u) - out3d.direction.x));
    }

    corrector::SynthesisParams doubled;
    doubled.n_grid = 2049;
    const auto dense = corrector::derive_corrector(kLayout, doubled);
    const auto& base = numeric_curve();
    double grid_worst = 0.0;
    for (std::size_t i = 0; i < base.r.size(); ++i) {
        grid_worst = std::max(grid_worst, std::abs(base.z[i] - dense.z[2 * i]));
    }

    out << "snell " << snell_worst << " (<1e-12), reversibility " << reverse_worst
        << " (<1e-9), 2D-vs-3D " << vector_worst << " (<1e-10), grid doubling " << grid_worst
        << " mm (<4.934e-5)";
    return snell_worst < 1e-12 && reverse_worst < 1e-9 && vector_worst < 1e-10 &&
           grid_worst < 4.934e-5;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool criterion_determinism(std::ostream& out) {
    const fs::path base = fs::temp_directory_path() / "ionmirror_acceptance";
    fs::remove_all(base);
    std::ostringstream devnull;
    std::vector<std::string> dirs{(base / "a").string(), (base / "b").string()};
    for (const std::string& dir : dirs) {
        auto cfg = config::defaults();
        cfg.output_dir = dir;
        cfg.sweep_distances_mm = {3.0, 5.0, 8.0};  // keep the pipeline pass brisk
        cfg.orbit_cycles = 2000;
        if (cli::run_corrector_derive(cfg, devnull) != 0) {
            out << "pipeline failed at corrector derive";
            return false;
        }
        if (cli::run_corrector_fit(cfg, {}, devnull) != 0) {
            out << "pipeline failed at corrector fit";
            return false;
        }
        if (cli::run_spot_sweep(cfg, {}, devnull) != 0) {
            out << "pipeline failed at spot sweep";
            return false;
        }
        if (cli::run_trap_sweep(cfg, devnull) != 0) {
            out << "pipeline failed at trap sweep";
            return false;
        }
        std::ostringstream eff;
        if (cli::run_efficiency(cfg, eff) != 0) {
            out << "pipeline failed at efficiency";
            return false;
        }
    }
    bool identical = true;
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        const fs::path other = fs::path(dirs[1]) / entry.path().filename();
        ++compared;
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
            identical = false;
            out << "mismatch: " << entry.path().filename().string() << " ";
        }
    }
    out << "compared " << compared << " output files across two full pipeline runs; "
        << (identical ? "all byte-identical" : "differences found");
    fs::remove_all(base);
    return identical && compared >= 8;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::ostream&)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "eq2-reproduction", criterion_eq2},
        {2, "corrector-convergence", criterion_convergence},
        {3, "fit-deviation-scale", criterion_fit_deviation},
        {4, "spot-size-ratio", criterion_spot_ratio},
        {5, "off-axis-tolerance", criterion_off_axis},
        {6, "parabola-baseline", criterion_parabola},
        {7, "collection-efficiency", criterion_efficiency},
        {8, "trap-perturbation-anchor", criterion_trap_anchor},
        {9, "oracle-equivalence", criterion_oracle_equivalence},
        {10, "calibration-closure", criterion_calibration},
        {11, "kernel-properties", criterion_kernel},
        {12, "determinism", criterion_determinism},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : criteria()) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
            continue;
        }
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail << "exception: " << e.what();
        }
        std::printf("[%s] C%-2d %-26s %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    detail.str().c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
