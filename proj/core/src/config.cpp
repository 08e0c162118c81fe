#include "ionmirror/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ionmirror/csv.hpp"

namespace ionmirror::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const std::string t = trim(value);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ConfigError("invalid number for " + key + ": '" + value + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

std::string render_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += io::format_double(values[i]);
    }
    return out;
}

// Field registry: maps "section.key" to accessors, drives both parse and render.
struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

std::map<std::string, Field> field_registry() {
    std::map<std::string, Field> f;
    auto dbl = [&](const std::string& name, auto member) {
        f[name] = {[member](const RunConfig& c) { return io::format_double(c.*member); },
                   [member, name](RunConfig& c, const std::string& v) {
                       c.*member = parse_double(name, v);
                   }};
    };
    auto integer = [&](const std::string& name, auto member) {
        f[name] = {[member](const RunConfig& c) { return std::to_string(c.*member); },
                   [member, name](RunConfig& c, const std::string& v) {
                       c.*member = static_cast<int>(parse_double(name, v));
                   }};
    };

    f["layout.mirror_radius_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.mirror_radius); },
        [](RunConfig& c, const std::string& v) {
            c.layout.mirror_radius = parse_double("layout.mirror_radius_mm", v);
        }};
    f["layout.mirror_half_width_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.mirror_half_width); },
        [](RunConfig& c, const std::string& v) {
            c.layout.mirror_half_width = parse_double("layout.mirror_half_width_mm", v);
        }};
    f["layout.aperture_radius_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.aperture_radius); },
        [](RunConfig& c, const std::string& v) {
            c.layout.aperture_radius = parse_double("layout.aperture_radius_mm", v);
        }};
    f["layout.viewport_entry_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.viewport_entry); },
        [](RunConfig& c, const std::string& v) {
            c.layout.viewport_entry = parse_double("layout.viewport_entry_mm", v);
        }};
    f["layout.viewport_thickness_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.viewport_thickness); },
        [](RunConfig& c, const std::string& v) {
            c.layout.viewport_thickness = parse_double("layout.viewport_thickness_mm", v);
        }};
    f["layout.corrector_entry_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.corrector_entry); },
        [](RunConfig& c, const std::string& v) {
            c.layout.corrector_entry = parse_double("layout.corrector_entry_mm", v);
        }};
    f["layout.corrector_thickness_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.corrector_thickness); },
        [](RunConfig& c, const std::string& v) {
            c.layout.corrector_thickness = parse_double("layout.corrector_thickness_mm", v);
        }};
    f["layout.wavelength_nm"] = {
        [](const RunConfig& c) { return io::format_double(c.layout.wavelength_nm); },
        [](RunConfig& c, const std::string& v) {
            c.layout.wavelength_nm = parse_double("layout.wavelength_nm", v);
        }};

    f["synthesis.n_grid"] = {
        [](const RunConfig& c) { return std::to_string(c.synthesis.n_grid); },
        [](RunConfig& c, const std::string& v) {
            c.synthesis.n_grid = static_cast<int>(parse_double("synthesis.n_grid", v));
        }};
    f["synthesis.fan_rays"] = {
        [](const RunConfig& c) { return std::to_string(c.synthesis.fan_rays); },
        [](RunConfig& c, const std::string& v) {
            c.synthesis.fan_rays = static_cast<int>(parse_double("synthesis.fan_rays", v));
        }};
    f["synthesis.tolerance_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.synthesis.tolerance); },
        [](RunConfig& c, const std::string& v) {
            c.synthesis.tolerance = parse_double("synthesis.tolerance_mm", v);
        }};
    f["synthesis.max_iterations"] = {
        [](const RunConfig& c) { return std::to_string(c.synthesis.max_iterations); },
        [](RunConfig& c, const std::string& v) {
            c.synthesis.max_iterations =
                static_cast<int>(parse_double("synthesis.max_iterations", v));
        }};
    f["synthesis.output_slope_per_mm"] = {
        [](const RunConfig& c) { return io::format_double(c.synthesis.output_slope_per_mm); },
        [](RunConfig& c, const std::string& v) {
            c.synthesis.output_slope_per_mm = parse_double("synthesis.output_slope_per_mm", v);
        }};

    integer("evaluation.fan_size", &RunConfig::fan_size);
    dbl("evaluation.objective_focal_mm", &RunConfig::objective_focal_mm);
    dbl("evaluation.objective_z_mm", &RunConfig::objective_z_mm);
    dbl("evaluation.sweep_min_um", &RunConfig::sweep_min_um);
    dbl("evaluation.sweep_max_um", &RunConfig::sweep_max_um);
    dbl("evaluation.sweep_step_um", &RunConfig::sweep_step_um);
    dbl("evaluation.off_axis_um", &RunConfig::off_axis_um);
    dbl("evaluation.square_half_width_mm", &RunConfig::square_half_width_mm);
    dbl("evaluation.square_distance_mm", &RunConfig::square_distance_mm);

    dbl("trap.rod_spacing_mm", &RunConfig::rod_spacing_mm);
    dbl("trap.rod_radius_mm", &RunConfig::rod_radius_mm);
    dbl("trap.rf_frequency_mhz", &RunConfig::rf_frequency_mhz);
    dbl("trap.secular_target_mhz", &RunConfig::secular_target_mhz);
    dbl("trap.axial_frequency_khz", &RunConfig::axial_frequency_khz);
    dbl("trap.endcap_spacing_mm", &RunConfig::endcap_spacing_mm);
    dbl("trap.endcap_voltage_v", &RunConfig::endcap_voltage_v);
    dbl("trap.ion_mass_u", &RunConfig::ion_mass_u);
    dbl("trap.ion_charge_e", &RunConfig::ion_charge_e);
    dbl("trap.plane_distance_mm", &RunConfig::plane_distance_mm);
    dbl("trap.damping_per_s", &RunConfig::damping_per_s);
    integer("trap.orbit_cycles", &RunConfig::orbit_cycles);
    integer("trap.steps_per_cycle", &RunConfig::steps_per_cycle);
    f["trap.sweep_distances_mm"] = {
        [](const RunConfig& c) { return render_list(c.sweep_distances_mm); },
        [](RunConfig& c, const std::string& v) {
            c.sweep_distances_mm = parse_list("trap.sweep_distances_mm", v);
        }};
    f["trap.dump_trajectory"] = {
        [](const RunConfig& c) { return c.dump_trajectory ? std::string("1") : std::string("0"); },
        [](RunConfig& c, const std::string& v) {
            c.dump_trajectory = parse_double("trap.dump_trajectory", v) != 0.0;
        }};

    f["output.dir"] = {[](const RunConfig& c) { return c.output_dir; },
                       [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); }};
    f["output.random_seed"] = {
        [](const RunConfig& c) { return std::to_string(c.random_seed); },
        [](RunConfig& c, const std::string& v) {
            c.random_seed = static_cast<unsigned long>(parse_double("output.random_seed", v));
        }};
    return f;
}

}  // namespace

evaluation::ImagingStage RunConfig::imaging_stage() const {
    evaluation::ImagingStage stage;
    stage.objective_focal_length = objective_focal_mm;
    stage.objective_principal_plane_z = objective_z_mm;
    stage.image_plane_z = objective_z_mm + objective_focal_mm;
    return stage;
}

trap::TrapSystem RunConfig::trap_system() const {
    trap::TrapSystem t;
    const double a = rod_spacing_mm / 2.0 / std::sqrt(2.0);
    t.rods = {trap::Rod{a, a, +1}, trap::Rod{-a, -a, +1}, trap::Rod{a, -a, -1},
              trap::Rod{-a, a, -1}};
    t.rod_radius_mm = rod_radius_mm;
    t.rf_frequency_hz = rf_frequency_mhz * 1e6;
    t.secular_target_hz = secular_target_mhz * 1e6;
    t.axial_frequency_hz = axial_frequency_khz * 1e3;
    t.endcap_spacing_mm = endcap_spacing_mm;
    t.endcap_voltage_v = endcap_voltage_v;
    t.ion.mass_u = ion_mass_u;
    t.ion.charge_e = ion_charge_e;
    t.plane_distance_mm = plane_distance_mm;
    t.damping_per_s = damping_per_s;
    t.calibrate();
    return t;
}

double RunConfig::square_distance_effective_mm() const {
    if (square_distance_mm > 0.0) return square_distance_mm;
    // plane of the ground mirror's square rim, seen from the source at the focus
    const double R = layout.mirror_radius;
    const double h = std::min(square_half_width_mm, R);
    return std::sqrt(R * R - h * h) - 0.5 * R;
}

RunConfig defaults() { return RunConfig{}; }

RunConfig parse(const std::string& text) {
    RunConfig cfg;
    const auto fields = field_registry();
    std::stringstream ss(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = section + "." + trim(t.substr(0, eq));
        const auto it = fields.find(key);
        if (it == fields.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        it->second.set(cfg, trim(t.substr(eq + 1)));
    }
    return cfg;
}

RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string render(const RunConfig& cfg) {
    const auto fields = field_registry();
    std::string out, section;
    for (const auto& [key, field] : fields) {  // std::map: deterministic order
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!out.empty()) out += '\n';
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += key.substr(dot + 1) + " = " + field.get(cfg) + "\n";
    }
    return out;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override must look like section.key=value");
    }
    const std::string key = trim(assignment.substr(0, eq));
    const auto fields = field_registry();
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, trim(assignment.substr(eq + 1)));
}

}  // namespace ionmirror::config
