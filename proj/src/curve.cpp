#include "mmphase/curve.hpp"

#include <algorithm>
#include <cmath>

#include "mmphase/error.hpp"

namespace mmphase {

namespace {

void check_grid(const std::vector<double>& x, std::size_t ny) {
    if (x.size() < 2 || x.size() != ny) {
        throw Error(ErrorKind::Domain, "curve needs at least two nodes and matching value counts");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw Error(ErrorKind::Domain, "curve grid must be strictly increasing");
        }
    }
}

}  // namespace

Curve Curve::hermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy) {
    check_grid(x, y.size());
    if (dy.size() != x.size()) {
        throw Error(ErrorKind::Domain, "curve slope count differs from grid size");
    }
    Curve c;
    c.x_ = std::move(x);
    c.y_ = std::move(y);
    c.dy_ = std::move(dy);
    return c;
}

Curve Curve::natural_spline(std::vector<double> x, std::vector<double> y) {
    check_grid(x, y.size());
    const std::size_t n = x.size();
    // Tridiagonal system for the second derivatives m_i with m_0 = m_{n-1} = 0.
    std::vector<double> m(n, 0.0);
    if (n > 2) {
        std::vector<double> diag(n), upper(n), rhs(n);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1];
            const double h1 = x[i + 1] - x[i];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        // Forward sweep (Thomas); sub-diagonal entry of row i is h_{i-1}.
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = (x[i] - x[i - 1]) / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            const double next = (i + 2 < n) ? m[i + 1] : 0.0;
            m[i] = (rhs[i] - upper[i] * next) / diag[i];
            if (i == 1) break;
        }
    }
    std::vector<double> dy(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = x[i + 1] - x[i];
        dy[i] = (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
    }
    {
        const double h = x[n - 1] - x[n - 2];
        dy[n - 1] = (y[n - 1] - y[n - 2]) / h + h * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
    }
    return hermite(std::move(x), std::move(y), std::move(dy));
}

std::size_t Curve::interval(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) return 0;
    const auto i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double Curve::operator()(double x) const {
    x = std::clamp(x, x_.front(), x_.back());
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y_[i] + h * h10 * dy_[i] + h01 * y_[i + 1] + h * h11 * dy_[i + 1];
}

double Curve::derivative(double x) const {
    x = std::clamp(x, x_.front(), x_.back());
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double d00 = 6.0 * s * (s - 1.0);
    const double d10 = (1.0 - s) * (1.0 - 3.0 * s);
    const double d01 = -d00;
    const double d11 = s * (3.0 * s - 2.0);
    return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * dy_[i] + d11 * dy_[i + 1];
}

double Curve::second_derivative(double x) const {
    x = std::clamp(x, x_.front(), x_.back());
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double e00 = 12.0 * s - 6.0;
    const double e10 = 6.0 * s - 4.0;
    const double e11 = 6.0 * s - 2.0;
    return (e00 * (y_[i] - y_[i + 1]) / h + e10 * dy_[i] + e11 * dy_[i + 1]) / h;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        throw Error(ErrorKind::Domain, "log_grid needs 0 < lo < hi and n >= 2");
    }
    std::vector<double> g(n);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace mmphase
