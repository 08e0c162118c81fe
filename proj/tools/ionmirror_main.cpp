// ionmirror: design and score the aspheric corrector for a high-NA spherical
// ion-imaging mirror, and simulate the grounded-mirror perturbation of a
// trapped ion. Subcommands mirror the analysis pipeline:
//
//   ionmirror corrector derive   -> corrector_numeric.csv, convergence.csv
//   ionmirror corrector fit      -> fit_{even,odd,full}.csv, deviations.csv, figure2.svg
//   ionmirror spot sweep         -> figure3.csv, figure3.svg
//   ionmirror trap sweep         -> figure1.csv, figure1.svg
//   ionmirror efficiency         -> stdout table

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ionmirror/commands.hpp"
#include "ionmirror/config.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
};

int load_config(const GlobalOptions& opts, ionmirror::config::RunConfig& cfg) {
    try {
        if (!opts.config_path.empty()) {
            cfg = ionmirror::config::load(opts.config_path);
        } else {
            cfg = ionmirror::config::defaults();
        }
        for (const std::string& assignment : opts.overrides) {
            ionmirror::config::apply_override(cfg, assignment);
        }
        if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    } catch (const ionmirror::config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ionmirror::cli::kExitInput;
    }
    return ionmirror::cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spherical-mirror corrector design and trapped-ion perturbation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "config file (key=value with [sections])");
    app.add_option("--out", opts.out_dir, "output directory (overrides output.dir)");
    app.add_option("--set", opts.overrides, "override a config key, e.g. layout.aperture_radius_mm=8");

    auto* corrector_cmd = app.add_subcommand("corrector", "corrector plate synthesis");
    corrector_cmd->fallthrough();
    corrector_cmd->require_subcommand(1);
    auto* derive_cmd = corrector_cmd->add_subcommand("derive", "iterative numeric derivation");
    derive_cmd->fallthrough();
    auto* fit_cmd = corrector_cmd->add_subcommand("fit", "polynomial fits of the numeric curve");
    fit_cmd->fallthrough();
    std::vector<std::string> bases;
    fit_cmd->add_option("--basis", bases, "fit bases: even, odd, full (default: all)");

    auto* spot_cmd = app.add_subcommand("spot", "image-quality evaluation");
    spot_cmd->fallthrough();
    auto* spot_sweep_cmd = spot_cmd->add_subcommand("sweep", "rms spot vs source defocus");
    spot_sweep_cmd->fallthrough();
    std::vector<std::string> variants;
    spot_sweep_cmd->add_option("--variants", variants,
                               "corrector variants: quartic, even, odd, full, numeric, "
                               "parabola, none (default: all)");

    auto* trap_cmd = app.add_subcommand("trap", "trapped-ion perturbation");
    trap_cmd->fallthrough();
    auto* trap_sweep_cmd = trap_cmd->add_subcommand("sweep", "orbit displacement vs plane distance");
    trap_sweep_cmd->fallthrough();

    auto* efficiency_cmd = app.add_subcommand("efficiency", "solid-angle collection table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ionmirror::cli::kExitInput;
    }

    ionmirror::config::RunConfig cfg;
    if (const int code = load_config(opts, cfg); code != 0) return code;

    try {
        if (derive_cmd->parsed()) {
            return ionmirror::cli::run_corrector_derive(cfg, std::cerr);
        }
        if (fit_cmd->parsed()) {
            return ionmirror::cli::run_corrector_fit(cfg, bases, std::cerr);
        }
        if (spot_sweep_cmd->parsed()) {
            return ionmirror::cli::run_spot_sweep(cfg, variants, std::cerr);
        }
        if (trap_sweep_cmd->parsed()) {
            return ionmirror::cli::run_trap_sweep(cfg, std::cerr);
        }
        if (efficiency_cmd->parsed()) {
            return ionmirror::cli::run_efficiency(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ionmirror::cli::kExitNumerical;
    }
    return ionmirror::cli::kExitInput;
}
