#pragma once

#include <stdexcept>
#include <string>

namespace ionmirror::materials {

enum class Material { Vacuum, BK7, FusedSilica };

struct OutOfDispersionRange : std::runtime_error {
    explicit OutOfDispersionRange(double wavelength_nm)
        : std::runtime_error("wavelength " + std::to_string(wavelength_nm) +
                             " nm outside the 300-1000 nm dispersion window") {}
};

/// Ba+ cooling transition; the default wavelength for every optical default.
inline constexpr double kDefaultWavelengthNm = 493.4;

/// Refractive index at the given vacuum wavelength (three-term Sellmeier for
/// the glasses, exactly 1 for vacuum). Valid for 300-1000 nm.
double index(Material material, double wavelength_nm);

std::string to_string(Material material);

}  // namespace ionmirror::materials
