#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ionmirror/config.hpp"

namespace ionmirror::cli {

/// Exit codes shared by every command: 0 success, 2 input/validation error,
/// 3 numerical failure (non-convergence / instability).
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// corrector derive: writes corrector_numeric.csv and convergence.csv.
int run_corrector_derive(const config::RunConfig& cfg, std::ostream& log);

/// corrector fit: reads corrector_numeric.csv, writes fit_<basis>.csv per
/// requested basis, deviations.csv and figure2.svg. Empty basis list = all.
int run_corrector_fit(const config::RunConfig& cfg, const std::vector<std::string>& bases,
                      std::ostream& log);

/// spot sweep: writes figure3.csv and figure3.svg for the requested variants
/// (empty = quartic, even, odd, full, numeric, parabola, none).
int run_spot_sweep(const config::RunConfig& cfg, const std::vector<std::string>& variants,
                   std::ostream& log);

/// trap sweep: writes figure1.csv and figure1.svg (plus trajectory.csv when
/// configured).
int run_trap_sweep(const config::RunConfig& cfg, std::ostream& log);

/// efficiency: prints the solid-angle table to the stream.
int run_efficiency(const config::RunConfig& cfg, std::ostream& out);

}  // namespace ionmirror::cli
