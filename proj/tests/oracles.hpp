#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library except for the Parameters/Vec2 value types.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Eigenvalues of [[a, b], [c, d]] by the textbook quadratic formula in long double.
inline std::array<long double, 2> eigenvalues(long double a, long double b, long double c, long double d) {
    const long double tr = a + d;
    const long double det = a * d - b * c;
    const long double disc = std::sqrt(tr * tr / 4.0L - det);
    return {tr / 2.0L - disc, tr / 2.0L + disc};  // {lambda_minus, lambda_plus}
}

/// Classical RK4 on a 2-vector with a fixed step count.
inline std::array<double, 2> rk4(const std::function<std::array<double, 2>(double, std::array<double, 2>)>& f,
                                 std::array<double, 2> y, double t0, double t1, int steps) {
    const double h = (t1 - t0) / steps;
    double t = t0;
    auto axpy = [](std::array<double, 2> a, double s, std::array<double, 2> b) {
        return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
    };
    for (int i = 0; i < steps; ++i) {
        const auto k1 = f(t, y);
        const auto k2 = f(t + h / 2, axpy(y, h / 2, k1));
        const auto k3 = f(t + h / 2, axpy(y, h / 2, k2));
        const auto k4 = f(t + h, axpy(y, h, k3));
        for (int j = 0; j < 2; ++j) y[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
        t += h;
    }
    return y;
}

/// The time-form vector field written out directly.
inline std::array<double, 2> field(double eps, double eta, double x, double y) {
    return {-x + (1 - eta) * y + x * y, (x - y - x * y) / eps};
}

/// sigma_n at the origin from substituting y = sum s_k x^k into
/// (x - y - x y) = eps y' (-x + (1-eta) y + x y), solved order by order.
inline std::vector<double> origin_series(double eps, double eta, int order, double sigma) {
    std::vector<double> s(order + 1, 0.0);
    if (order >= 1) s[1] = sigma;
    for (int n = 2; n <= order; ++n) {
        // Collect the x^n coefficient of  eps y' D - N  with s_n unknown: a s_n + b = 0.
        auto coeff = [&](double sn) {
            std::vector<double> t = s;
            t[n] = sn;
            // N = x - y - x y, D = -x + (1-eta) y + x y, y' = sum k t_k x^(k-1)
            double lhs = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double yp = k * t[k];  // coefficient of x^(k-1) in y'
                const int need = n - (k - 1);  // D coefficient index
                double dcoef = (1 - eta) * t[need];
                if (need == 1) dcoef += -1.0;
                if (need >= 1) dcoef += t[need - 1];
                lhs += eps * yp * dcoef;
            }
            double ncoef = -t[n] - t[n - 1];
            if (n == 1) ncoef += 1.0;
            return lhs - ncoef;
        };
        const double c0 = coeff(0.0);
        const double c1 = coeff(1.0);
        s[n] = -c0 / (c1 - c0);
    }
    return s;
}

/// Least-squares slope of log|r| against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& r) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(r[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
