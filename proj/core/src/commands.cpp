#include "ionmirror/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ionmirror/corrector.hpp"
#include "ionmirror/csv.hpp"
#include "ionmirror/evaluation.hpp"
#include "ionmirror/svg.hpp"
#include "ionmirror/trap.hpp"

namespace ionmirror::cli {

namespace fs = std::filesystem;
using corrector::CorrectorCurve;
using corrector::FitBasis;
using evaluation::Variant;

namespace {

fs::path out_dir(const config::RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

CorrectorCurve load_numeric_curve(const fs::path& dir) {
    const fs::path file = dir / "corrector_numeric.csv";
    if (!fs::exists(file)) {
        throw config::ConfigError("missing " + file.string() + "; run 'corrector derive' first");
    }
    const io::CsvTable table = io::read_csv(file);
    CorrectorCurve curve;
    curve.source = corrector::CurveSource::IterativeNumeric;
    curve.converged = true;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        curve.r.push_back(table.value(i, 0));
        curve.z.push_back(table.value(i, 1));
    }
    if (curve.r.size() < 2) throw config::ConfigError("corrector_numeric.csv has no samples");
    return curve;
}

std::optional<geometry::SagProfile> load_fit_profile(const fs::path& dir, FitBasis basis) {
    const fs::path file = dir / ("fit_" + corrector::to_string(basis) + ".csv");
    if (!fs::exists(file)) return std::nullopt;
    const io::CsvTable table = io::read_csv(file);
    std::vector<double> coeffs(11, 0.0);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const int order = static_cast<int>(table.value(i, 0));
        if (order >= 0 && order < static_cast<int>(coeffs.size())) {
            coeffs[static_cast<std::size_t>(order)] = table.value(i, 1);
        }
    }
    coeffs[0] = 0.0;
    return geometry::SagProfile::polynomial(coeffs);
}

}  // namespace

int run_corrector_derive(const config::RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    CorrectorCurve curve;
    try {
        curve = corrector::derive_corrector(cfg.layout, cfg.synthesis);
    } catch (const corrector::NonConvergence& e) {
        log << "corrector derive: " << e.what() << "\n";
        io::CsvWriter conv({"iteration", "max_sag_change_mm"});
        for (std::size_t i = 0; i < e.sag_change_per_iteration.size(); ++i) {
            conv.add_row({static_cast<double>(i + 1), e.sag_change_per_iteration[i]});
        }
        conv.write(dir / "convergence.csv");
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        log << "corrector derive: " << e.what() << "\n";
        return kExitInput;
    }

    io::CsvWriter out({"r_mm", "z_mm"});
    for (std::size_t i = 0; i < curve.r.size(); ++i) out.add_row({curve.r[i], curve.z[i]});
    out.write(dir / "corrector_numeric.csv");

    io::CsvWriter conv({"iteration", "max_sag_change_mm"});
    for (std::size_t i = 0; i < curve.sag_change_per_iteration.size(); ++i) {
        conv.add_row({static_cast<double>(i + 1), curve.sag_change_per_iteration[i]});
    }
    conv.write(dir / "convergence.csv");

    log << "converged after " << curve.iterations_used << " iterations; last change "
        << io::format_double(curve.sag_change_per_iteration.back()) << " mm\n";
    return kExitOk;
}

int run_corrector_fit(const config::RunConfig& cfg, const std::vector<std::string>& bases,
                      std::ostream& log) {
    const fs::path dir = out_dir(cfg);

    std::vector<FitBasis> wanted;
    if (bases.empty()) {
        wanted = {FitBasis::EvenOnly, FitBasis::OddOnly, FitBasis::Full};
    } else {
        for (const std::string& name : bases) {
            if (name == "even") {
                wanted.push_back(FitBasis::EvenOnly);
            } else if (name == "odd") {
                wanted.push_back(FitBasis::OddOnly);
            } else if (name == "full") {
                wanted.push_back(FitBasis::Full);
            } else {
                log << "corrector fit: unknown basis '" << name << "'\n";
                return kExitInput;
            }
        }
    }

    CorrectorCurve curve;
    try {
        curve = load_numeric_curve(dir);
    } catch (const config::ConfigError& e) {
        log << "corrector fit: " << e.what() << "\n";
        return kExitInput;
    }

    io::CsvWriter deviations({"basis", "r_mm", "deviation_mm"});
    io::SvgPlot profile_plot("Corrector thickness profiles", "r (mm)", "z (mm)");
    io::SvgPlot deviation_plot("Polynomial fit deviations from the numeric curve", "r (mm)",
                               "deviation (mm)");
    profile_plot.add_series("numeric", curve.r, curve.z);
    {
        const double c4 =
            corrector::quartic_coefficient(cfg.layout.mirror_radius, cfg.layout.corrector_index());
        std::vector<double> zq(curve.r.size());
        for (std::size_t i = 0; i < curve.r.size(); ++i) {
            const double r = curve.r[i];
            zq[i] = c4 * r * r * r * r;
        }
        profile_plot.add_series("schmidt quartic", curve.r, zq);
    }

    for (FitBasis basis : wanted) {
        corrector::FitResult fit;
        try {
            fit = corrector::fit_polynomial(curve, basis);
        } catch (const corrector::InsufficientSamples& e) {
            log << "corrector fit: " << e.what() << "\n";
            return kExitInput;
        } catch (const corrector::RankDeficient& e) {
            log << "corrector fit: " << e.what() << "\n";
            return kExitInput;
        }
        io::CsvWriter fit_csv({"order", "coefficient"});
        for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
            fit_csv.add_row({static_cast<double>(j), fit.coefficients[j]});
        }
        fit_csv.write(dir / ("fit_" + corrector::to_string(basis) + ".csv"));

        for (std::size_t i = 0; i < fit.r.size(); ++i) {
            deviations.add_row(std::vector<std::string>{corrector::to_string(basis),
                                                        io::format_double(fit.r[i]),
                                                        io::format_double(fit.deviation[i])});
        }
        deviation_plot.add_series(corrector::to_string(basis), fit.r, fit.deviation);
        if (basis == FitBasis::Full) {
            std::vector<double> zf(curve.r.size());
            const geometry::SagProfile p = fit.sag_profile();
            for (std::size_t i = 0; i < curve.r.size(); ++i) zf[i] = p.value(curve.r[i]);
            profile_plot.add_series("full 10th fit", curve.r, zf);
        }
        log << "fit " << corrector::to_string(basis)
            << ": max |deviation| = " << io::format_double(fit.max_abs_deviation * 1e3)
            << " um\n";
    }

    deviations.write(dir / "deviations.csv");
    // figure2.svg: profiles on top, deviations below, one self-contained file
    {
        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"960\" "
               "viewBox=\"0 0 720 960\">\n<rect width=\"100%\" height=\"100%\" "
               "fill=\"white\"/>\n<g>\n"
            << profile_plot.render() << "</g>\n<g transform=\"translate(0 480)\">\n"
            << deviation_plot.render() << "</g>\n</svg>\n";
        std::ofstream out(dir / "figure2.svg", std::ios::binary);
        out << svg.str();
    }
    return kExitOk;
}

int run_spot_sweep(const config::RunConfig& cfg, const std::vector<std::string>& variant_names,
                   std::ostream& log) {
    const fs::path dir = out_dir(cfg);

    std::vector<Variant> wanted;
    if (variant_names.empty()) {
        wanted = {Variant::Quartic, Variant::FitEven, Variant::FitOdd,
                  Variant::FitFull, Variant::Numeric, Variant::Parabola, Variant::NoCorrector};
    } else {
        for (const std::string& name : variant_names) {
            const auto v = evaluation::variant_from_string(name);
            if (!v) {
                log << "spot sweep: unknown variant '" << name << "'\n";
                return kExitInput;
            }
            wanted.push_back(*v);
        }
    }

    // gather sag profiles for the curve-backed variants
    std::map<Variant, geometry::SagProfile> sags;
    for (Variant v : wanted) {
        try {
            if (v == Variant::Numeric) {
                sags[v] = load_numeric_curve(dir).sag_profile();
            } else if (v == Variant::FitEven || v == Variant::FitOdd || v == Variant::FitFull) {
                const FitBasis basis = v == Variant::FitEven   ? FitBasis::EvenOnly
                                       : v == Variant::FitOdd  ? FitBasis::OddOnly
                                                               : FitBasis::Full;
                auto profile = load_fit_profile(dir, basis);
                if (!profile) {
                    log << "spot sweep: missing fit_" << corrector::to_string(basis)
                        << ".csv; run 'corrector fit' first\n";
                    return kExitInput;
                }
                sags[v] = *profile;
            }
        } catch (const config::ConfigError& e) {
            log << "spot sweep: " << e.what() << "\n";
            return kExitInput;
        }
    }

    std::vector<std::pair<Variant, const geometry::SagProfile*>> variants;
    for (Variant v : wanted) {
        const auto it = sags.find(v);
        variants.emplace_back(v, it == sags.end() ? nullptr : &it->second);
    }

    if (cfg.sweep_step_um <= 0.0) {
        log << "spot sweep: sweep step must be positive\n";
        return kExitInput;
    }
    std::vector<double> offsets;
    for (double o = cfg.sweep_min_um; o <= cfg.sweep_max_um + 1e-9; o += cfg.sweep_step_um) {
        offsets.push_back(o);
    }
    if (offsets.empty()) {
        log << "spot sweep: empty offset sweep\n";
        return kExitInput;
    }

    std::vector<evaluation::SweepRow> rows;
    try {
        rows = evaluation::defocus_sweep(cfg.layout, variants, offsets, cfg.imaging_stage(),
                                         cfg.fan_size);
    } catch (const std::exception& e) {
        log << "spot sweep: " << e.what() << "\n";
        return kExitNumerical;
    }

    io::CsvWriter csv({"variant", "offset_um", "rms_um", "vignetted_count"});
    io::SvgPlot plot("RMS spot size vs source defocus", "axial source offset (um)",
                     "rms spot (um)");
    for (const auto& [variant, sag] : variants) {
        std::vector<double> xs, ys;
        for (const evaluation::SweepRow& row : rows) {
            if (row.variant != variant) continue;
            csv.add_row(std::vector<std::string>{
                evaluation::to_string(row.variant), io::format_double(row.offset_um),
                io::format_double(row.rms_um), std::to_string(row.vignetted)});
            if (row.vignetting_warning) {
                log << "warning: variant " << evaluation::to_string(row.variant) << " at "
                    << row.offset_um << " um vignettes more than 10% of the fan\n";
            }
            xs.push_back(row.offset_um);
            ys.push_back(row.rms_um);
        }
        plot.add_series(evaluation::to_string(variant), xs, ys);
    }
    plot.add_reference_line(
        "diffraction reference",
        evaluation::diffraction_limit_um(cfg.layout.wavelength_nm, 0.2));
    csv.write(dir / "figure3.csv");
    plot.write(dir / "figure3.svg");

    // radial source-offset tolerance at each variant's own best focus
    if (cfg.off_axis_um > 0.0) {
        io::CsvWriter off(
            {"variant", "radial_offset_um", "rms_on_axis_um", "rms_um", "growth_percent"});
        for (const auto& [variant, sag] : variants) {
            const auto system = evaluation::variant_system(cfg.layout, variant, sag);
            evaluation::ImagingStage focused = cfg.imaging_stage();
            focused.image_plane_z =
                evaluation::best_focus(system, focused, cfg.fan_size, cfg.layout);
            const double on_axis =
                evaluation::spot_size(system, focused, 0.0, 0.0, cfg.fan_size, cfg.layout)
                    .rms_radius;
            const double off_axis =
                evaluation::spot_size(system, focused, 0.0, cfg.off_axis_um, cfg.fan_size,
                                      cfg.layout)
                    .rms_radius;
            const double growth = on_axis > 0.0 ? (off_axis / on_axis - 1.0) * 100.0 : 0.0;
            off.add_row(std::vector<std::string>{
                evaluation::to_string(variant), io::format_double(cfg.off_axis_um),
                io::format_double(on_axis * 1e3), io::format_double(off_axis * 1e3),
                io::format_double(growth)});
            log << "off-axis " << evaluation::to_string(variant) << ": rms "
                << io::format_double(on_axis * 1e3) << " -> " << io::format_double(off_axis * 1e3)
                << " um at " << cfg.off_axis_um << " um offset\n";
        }
        off.write(dir / "offaxis.csv");
    }
    return kExitOk;
}

int run_trap_sweep(const config::RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);

    trap::TrapSystem system;
    try {
        system = cfg.trap_system();
    } catch (const trap::NoStableMinimum&) {
        const double ratio = 2.0 * cfg.secular_target_mhz / cfg.rf_frequency_mhz;
        log << "trap sweep: unstable configuration, required Mathieu q = "
            << io::format_double(std::sqrt(2.0) * ratio) << " >= 0.908\n";
        return kExitNumerical;
    }

    trap::OrbitParams params;
    params.duration_cycles = cfg.orbit_cycles;
    params.steps_per_cycle = cfg.steps_per_cycle;

    std::vector<double> distances = cfg.sweep_distances_mm;
    std::sort(distances.begin(), distances.end());

    std::vector<trap::SweepPoint> points;
    try {
        points = trap::displacement_sweep(system, distances, params);
    } catch (const trap::UnstableOrbit& e) {
        log << "trap sweep: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        log << "trap sweep: " << e.what() << "\n";
        return kExitInput;
    }

    io::CsvWriter csv({"distance_mm", "rms_displacement_um", "equilibrium_shift_um"});
    std::vector<double> xs, ys, zs;
    for (const trap::SweepPoint& p : points) {
        csv.add_row({p.distance_mm, p.rms_displacement_um, p.equilibrium_shift_um});
        xs.push_back(p.distance_mm);
        ys.push_back(p.rms_displacement_um);
        zs.push_back(p.equilibrium_shift_um);
    }
    csv.write(dir / "figure1.csv");

    io::SvgPlot plot("Ion orbit displacement vs grounded-plane distance", "plane distance (mm)",
                     "displacement (um)");
    plot.add_series("orbit rms", xs, ys);
    plot.add_series("pseudopotential shift", xs, zs);
    plot.write(dir / "figure1.svg");

    if (cfg.dump_trajectory) {
        trap::TrapSystem single = system;
        single.plane_distance_mm = cfg.plane_distance_mm;
        const trap::OrbitResult orbit = trap::integrate_orbit(single, params);
        io::CsvWriter traj({"t_us", "x_um", "y_um", "z_um"});
        for (std::size_t i = 0; i < orbit.t_us.size(); ++i) {
            traj.add_row({orbit.t_us[i], orbit.x_um[i], orbit.y_um[i], orbit.z_um[i]});
        }
        traj.write(dir / "trajectory.csv");
    }

    {
        trap::TrapSystem probe = system;
        probe.plane_distance_mm = cfg.plane_distance_mm;
        const trap::ShiftContributions split = trap::equilibrium_shift_split(probe);
        log << "shift contributions at " << io::format_double(cfg.plane_distance_mm)
            << " mm: rf-image " << io::format_double(split.rf_image_shift_um.norm())
            << " um, self-image " << io::format_double(split.self_image_shift_um.norm())
            << " um\n";
    }
    log << "swept " << points.size() << " plane distances; Mathieu q = "
        << io::format_double(system.mathieu_q()) << "\n";
    return kExitOk;
}

int run_efficiency(const config::RunConfig& cfg, std::ostream& out) {
    double circ09 = 0.0, circ025 = 0.0, square = 0.0;
    try {
        circ09 = evaluation::collection_efficiency_circular(0.9);
        circ025 = evaluation::collection_efficiency_circular(0.25);
        square = evaluation::collection_efficiency_square(
            cfg.square_half_width_mm, cfg.square_distance_effective_mm());
    } catch (const evaluation::InvalidAperture& e) {
        out << "efficiency: " << e.what() << "\n";
        return kExitInput;
    }

    out << "aperture                         solid-angle fraction\n";
    out << "circular NA 0.90                 " << io::format_double(circ09) << "\n";
    out << "circular NA 0.25                 " << io::format_double(circ025) << "\n";
    out << "square mirror (hw "
        << io::format_double(cfg.square_half_width_mm) << " mm at "
        << io::format_double(cfg.square_distance_effective_mm()) << " mm)  "
        << io::format_double(square) << "\n";
    out << "\n";
    out << "ratio circular 0.90 / 0.25       " << io::format_double(circ09 / circ025) << "\n";
    out << "ratio square   /  0.25 lens      " << io::format_double(square / circ025) << "\n";
    out << "(the reference experiment reported approximately 15)\n";
    out << "\n";
    out << "diffraction reference 0.61*lambda/NA at " << io::format_double(cfg.layout.wavelength_nm)
        << " nm, NA 0.2: "
        << io::format_double(evaluation::diffraction_limit_um(cfg.layout.wavelength_nm, 0.2))
        << " um\n";
    return kExitOk;
}

}  // namespace ionmirror::cli
