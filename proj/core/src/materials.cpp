#include "ionmirror/materials.hpp"

#include <cmath>

namespace ionmirror::materials {

namespace {

struct SellmeierFit {
    double b[3];
    double c[3];  // um^2
};

// Standard three-term fits: SCHOTT N-BK7 catalog data and Malitson (1965)
// fused silica. Coefficients C_i in um^2.
constexpr SellmeierFit kBK7{{1.03961212, 0.231792344, 1.01046945},
                            {0.00600069867, 0.0200179144, 103.560653}};
constexpr SellmeierFit kFusedSilica{{0.6961663, 0.4079426, 0.8974794},
                                    {0.0684043 * 0.0684043, 0.1162414 * 0.1162414,
                                     9.896161 * 9.896161}};

double sellmeier(const SellmeierFit& fit, double wavelength_nm) {
    const double l2 = (wavelength_nm * 1e-3) * (wavelength_nm * 1e-3);
    double n2 = 1.0;
    for (int i = 0; i < 3; ++i) n2 += fit.b[i] * l2 / (l2 - fit.c[i]);
    return std::sqrt(n2);
}

}  // namespace

double index(Material material, double wavelength_nm) {
    if (material == Material::Vacuum) return 1.0;
    if (wavelength_nm < 300.0 || wavelength_nm > 1000.0) {
        throw OutOfDispersionRange(wavelength_nm);
    }
    switch (material) {
        case Material::BK7:
            return sellmeier(kBK7, wavelength_nm);
        case Material::FusedSilica:
            return sellmeier(kFusedSilica, wavelength_nm);
        default:
            return 1.0;
    }
}

std::string to_string(Material material) {
    switch (material) {
        case Material::Vacuum: return "vacuum";
        case Material::BK7: return "bk7";
        case Material::FusedSilica: return "fused_silica";
    }
    return "unknown";
}

}  // namespace ionmirror::materials
