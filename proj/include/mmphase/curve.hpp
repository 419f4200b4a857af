#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmphase {

/// Sampled graph y(x) on a strictly increasing grid, interpolated by the
/// piecewise cubic Hermite polynomial through (x_i, y_i, y'_i).
class Curve {
public:
    Curve() = default;

    /// Node slopes supplied by the caller. Throws Error{Domain} unless the grid
    /// is strictly increasing with at least two points and sizes agree.
    static Curve hermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy);

    /// Node slopes from the natural cubic spline through (x_i, y_i).
    static Curve natural_spline(std::vector<double> x, std::vector<double> y);

    std::span<const double> grid() const { return x_; }
    std::span<const double> values() const { return y_; }
    std::span<const double> slopes() const { return dy_; }
    std::size_t size() const { return x_.size(); }
    bool empty() const { return x_.empty(); }
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

    /// Interpolated value; x outside the grid is clamped to the nearest end.
    double operator()(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> dy_;
};

/// n points log-spaced on [lo, hi], endpoints exact.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace mmphase
