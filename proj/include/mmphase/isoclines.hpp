#pragma once

#include <string_view>

#include "mmphase/kinetics.hpp"

namespace mmphase {

/// Which level curve of the slope field to evaluate.
struct IsoclineId {
    enum class Kind { Horizontal, Vertical, Alpha, Slope };

    Kind kind = Kind::Horizontal;
    double slope = 0.0;  // only read for Kind::Slope

    static IsoclineId horizontal() { return {Kind::Horizontal, 0.0}; }
    static IsoclineId vertical() { return {Kind::Vertical, 0.0}; }
    static IsoclineId alpha() { return {Kind::Alpha, 0.0}; }
    static IsoclineId with_slope(double c) { return {Kind::Slope, c}; }
};

/// K(c) = (1 + eps(1-eta)c)/(1 + eps c). Throws Error{KPole} at c = -1/eps.
double K(const Parameters& p, double c);

/// The isocline of slope c, y = x/(K(c) + x), with F(x, -1/eps) = 0.
/// Throws Error{SingularSlope} when K(c) = -x.
double F(const Parameters& p, double x, double c);

inline double horizontal_isocline(double x) { return x / (1.0 + x); }
inline double vertical_isocline(const Parameters& p, double x) { return x / (1.0 - p.eta() + x); }
/// alpha(x) = x/(1/sigma + x), the isocline of slope sigma.
inline double alpha_isocline(double sigma, double x) { return x / (1.0 / sigma + x); }

double isocline_eval(const Parameters& p, const IsoclineId& id, double x);

/// Analytic x-derivative of the isocline.
double isocline_derivative(const Parameters& p, const IsoclineId& id, double x);

/// u(c) = c K(c) for c > 0; Throws Error{Domain} otherwise.
double u(const Parameters& p, double c);

/// w(w - 1) + x w'; vanishes along every isocline.
double isocline_residual(double x, double w, double w_prime);

/// Absolute y tolerance used when deciding which side of an isocline a point lies on.
inline constexpr double kBoundaryTolerance = 1e-13;

enum class Region { BelowH, Gamma1, AlphaToV, OnV, VToOne, AtOrAboveOne };

std::string_view to_string(Region r) noexcept;

struct RegionLabel {
    Region region = Region::BelowH;
    bool in_gamma0 = false;  // x > 0, H <= y <= V
    bool in_gamma1 = false;  // x > 0, H <= y <= alpha
};

/// Labels a point of the closed first quadrant. Isocline curves belong to the
/// closed regions Gamma0/Gamma1; `tolerance` is an absolute band in y.
RegionLabel classify_region(const Parameters& p, Vec2 pt, double tolerance = kBoundaryTolerance);

}  // namespace mmphase
