#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionmirror/evaluation.hpp"
#include "ionmirror/layout.hpp"
#include "ionmirror/trap.hpp"

namespace ionmirror::config {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Every knob of the pipeline, with defaults reproducing the reference setup.
/// Serialized as a line-oriented key=value file with [section] headers; an
/// empty file is a valid config.
struct RunConfig {
    // [layout]
    layout::LayoutParams layout;

    // [synthesis]
    corrector::SynthesisParams synthesis;

    // [evaluation]
    int fan_size = 128;
    double objective_focal_mm = 25.0;
    double objective_z_mm = 40.0;
    double sweep_min_um = -50.0;
    double sweep_max_um = 50.0;
    double sweep_step_um = 10.0;
    double off_axis_um = 100.0;
    double square_half_width_mm = 10.0;
    /// <= 0 means "derive from the layout": distance from the source to the
    /// plane of the ground mirror's square rim.
    double square_distance_mm = 0.0;

    // [trap]
    double rod_spacing_mm = 1.4;  ///< opposite-rod center distance
    double rod_radius_mm = 0.25;
    double rf_frequency_mhz = 22.0;
    double secular_target_mhz = 1.0;
    double axial_frequency_khz = 100.0;
    double endcap_spacing_mm = 2.0;
    double endcap_voltage_v = 100.0;
    double ion_mass_u = 138.0;
    double ion_charge_e = 1.0;
    double plane_distance_mm = 5.0;
    double damping_per_s = 2.0e4;
    int orbit_cycles = 6000;
    int steps_per_cycle = 400;
    std::vector<double> sweep_distances_mm{3, 4, 5, 6, 8, 10, 12, 15};
    bool dump_trajectory = false;

    // [output]
    std::string output_dir = "out";
    unsigned long random_seed = 0;  ///< reserved; current algorithms are deterministic

    evaluation::ImagingStage imaging_stage() const;
    trap::TrapSystem trap_system() const;  ///< calibrated
    double square_distance_effective_mm() const;
};

RunConfig defaults();

/// Parse a config file; unknown keys are errors. Missing keys keep defaults.
RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);

/// Canonical rendering; parse(render(c)) == c field-for-field.
std::string render(const RunConfig& cfg);

/// Apply a "section.key=value" override.
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace ionmirror::config
