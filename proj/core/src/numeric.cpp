#include "ionmirror/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ionmirror::numeric {

namespace {

// Non-centered three-point end derivative with the usual shape clamps.
double pchip_end_derivative(double h0, double h1, double s0, double s1) {
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0) {
        d = 0.0;
    } else if (s0 * s1 < 0.0 && std::abs(d) > 3.0 * std::abs(s0)) {
        d = 3.0 * s0;
    }
    return d;
}

}  // namespace

PchipInterpolant::PchipInterpolant(std::vector<double> x, std::vector<double> y,
                                   Extension ext)
    : x_(std::move(x)), y_(std::move(y)), ext_(ext) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
        throw std::invalid_argument("PchipInterpolant needs >= 2 matching knots");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw std::invalid_argument("PchipInterpolant knots must be strictly increasing");
        }
    }
    d_.assign(n, 0.0);
    if (n == 2) {
        const double s = (y_[1] - y_[0]) / (x_[1] - x_[0]);
        d_[0] = d_[1] = s;
        cum_ = {0.0, 0.5 * (y_[0] + y_[1]) * (x_[1] - x_[0])};
        return;
    }
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (s[i - 1] * s[i] <= 0.0) {
            d_[i] = 0.0;  // local extremum: flat node keeps the shape
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
    d_[0] = pchip_end_derivative(h[0], h[1], s[0], s[1]);
    d_[n - 1] = pchip_end_derivative(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);

    cum_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        cum_[i + 1] = cum_[i] + h[i] * (0.5 * (y_[i] + y_[i + 1]) +
                                        h[i] * (d_[i] - d_[i + 1]) / 12.0);
    }
}

std::size_t PchipInterpolant::segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double PchipInterpolant::value(double x) const {
    if (x <= x_.front()) {
        return y_.front() + (ext_ == Extension::Linear ? d_.front() * (x - x_.front()) : 0.0);
    }
    if (x >= x_.back()) {
        return y_.back() + (ext_ == Extension::Linear ? d_.back() * (x - x_.back()) : 0.0);
    }
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double PchipInterpolant::integral(double x) const {
    if (x <= x_.front()) {
        const double dx = x - x_.front();
        return y_.front() * dx + (ext_ == Extension::Linear ? 0.5 * d_.front() * dx * dx : 0.0);
    }
    if (x >= x_.back()) {
        const double dx = x - x_.back();
        return cum_.back() + y_.back() * dx +
               (ext_ == Extension::Linear ? 0.5 * d_.back() * dx * dx : 0.0);
    }
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    // antiderivatives of the Hermite basis on [0, 1], scaled by h
    const double H00 = t - t3 + 0.5 * t4;
    const double H10 = 0.5 * t2 - 2.0 * t3 / 3.0 + 0.25 * t4;
    const double H01 = t3 - 0.5 * t4;
    const double H11 = 0.25 * t4 - t3 / 3.0;
    return cum_[i] + h * (H00 * y_[i] + H10 * h * d_[i] + H01 * y_[i + 1] + H11 * h * d_[i + 1]);
}

double PchipInterpolant::derivative(double x) const {
    if (x <= x_.front()) return ext_ == Extension::Linear ? d_.front() : 0.0;
    if (x >= x_.back()) return ext_ == Extension::Linear ? d_.back() : 0.0;
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double g00 = (6 * t2 - 6 * t) / h;
    const double g10 = 3 * t2 - 4 * t + 1;
    const double g01 = (-6 * t2 + 6 * t) / h;
    const double g11 = 3 * t2 - 2 * t;
    return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

std::vector<double> least_squares_qr(std::vector<double> a, std::size_t rows,
                                     std::size_t cols, std::vector<double> b) {
    if (a.size() != rows * cols || b.size() != rows || rows < cols || cols == 0) {
        throw std::invalid_argument("least_squares_qr: inconsistent dimensions");
    }
    auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * cols + c]; };

    std::vector<double> diag(cols, 0.0);
    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) norm += at(i, k) * at(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) throw RankDeficient{};
        if (at(k, k) < 0.0) norm = -norm;  // avoid cancellation in the reflector
        for (std::size_t i = k; i < rows; ++i) at(i, k) /= norm;
        at(k, k) += 1.0;
        for (std::size_t j = k + 1; j < cols; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < rows; ++i) s += at(i, k) * at(i, j);
            s = -s / at(k, k);
            for (std::size_t i = k; i < rows; ++i) at(i, j) += s * at(i, k);
        }
        double s = 0.0;
        for (std::size_t i = k; i < rows; ++i) s += at(i, k) * b[i];
        s = -s / at(k, k);
        for (std::size_t i = k; i < rows; ++i) b[i] += s * at(i, k);
        diag[k] = -norm;  // R(k,k)
    }

    double dmax = 0.0;
    for (double d : diag) dmax = std::max(dmax, std::abs(d));
    for (double d : diag) {
        if (std::abs(d) < 1e-13 * dmax) throw RankDeficient{};
    }

    std::vector<double> c(cols, 0.0);
    for (std::size_t k = cols; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < cols; ++j) s -= at(k, j) * c[j];
        c[k] = s / diag[k];
    }
    return c;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& x,
                                         const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("cumulative_trapezoid: need matching samples");
    }
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    return out;
}

double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c1 = b - kInvPhi * (b - a);
    double c2 = a + kInvPhi * (b - a);
    double f1 = f(c1), f2 = f(c2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kInvPhi * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kInvPhi * (b - a);
            f2 = f(c2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace ionmirror::numeric
