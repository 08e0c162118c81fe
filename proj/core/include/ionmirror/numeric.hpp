#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace ionmirror::numeric {

/// Shape-preserving piecewise-cubic interpolant (Fritsch–Carlson node slopes,
/// three-point end rule). C1 everywhere; never overshoots monotone data.
class PchipInterpolant {
public:
    /// Extension behavior for queries beyond the last knot.
    enum class Extension {
        Linear,  ///< continue with the end-node derivative
        Hold,    ///< clamp to the end-node value (derivative 0)
    };

    PchipInterpolant() = default;
    PchipInterpolant(std::vector<double> x, std::vector<double> y,
                     Extension ext = Extension::Linear);

    double value(double x) const;
    double derivative(double x) const;
    /// Exact antiderivative of the interpolant from the first knot to x
    /// (extensions integrated analytically).
    double integral(double x) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_, y_, d_;  // knots, values, node derivatives
    std::vector<double> cum_;        // cumulative exact panel integrals
    Extension ext_ = Extension::Linear;
};

struct RankDeficient : std::runtime_error {
    RankDeficient() : std::runtime_error("least-squares design matrix is rank deficient") {}
};

/// Linear least squares min ||A c - b|| via Householder QR.
/// A is row-major, rows x cols, rows >= cols. Throws RankDeficient when a
/// diagonal of R collapses relative to the largest one.
std::vector<double> least_squares_qr(std::vector<double> a, std::size_t rows,
                                     std::size_t cols, std::vector<double> b);

/// Cumulative trapezoid of samples y on abscissae x; result[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& x,
                                         const std::vector<double>& y);

/// Golden-section minimizer on [lo, hi]; f must be unimodal there.
double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double tol);

}  // namespace ionmirror::numeric
