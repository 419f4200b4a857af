#pragma once

#include <array>
#include <cmath>

namespace mmphase {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Row-major 2x2 matrix.
struct Matrix2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }
    Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    /// Row vector times matrix, i.e. (A^T v)^T.
    Vec2 left_multiply(Vec2 v) const { return {v.x * a11 + v.y * a21, v.x * a12 + v.y * a22}; }
};

/// Dimensional rate constants of S + E <-> C -> P + E.
struct RateConstants {
    double k1 = 0.0;        // conc^-1 time^-1
    double k_minus1 = 0.0;  // time^-1
    double k2 = 0.0;        // time^-1
    double e0 = 0.0;        // total enzyme
    double s0 = 0.0;        // initial substrate, only used for trajectory mapping

    /// Throws Error{InvalidParameters} unless k1 > 0, k2 > 0, k_minus1 >= 0, e0 > 0.
    void validate() const;

    /// Michaelis constant (k_-1 + k2)/k1.
    double michaelis_constant() const { return (k_minus1 + k2) / k1; }
    /// Dissociation constant k_-1/k1.
    double dissociation_constant() const { return k_minus1 / k1; }
};

/// Dimensionless pair (eps, eta) with eps > 0 and 0 < eta < 1.
class Parameters {
public:
    /// Throws Error{InvalidParameters} when outside the admissible set.
    Parameters(double eps, double eta);

    double eps() const { return eps_; }
    double eta() const { return eta_; }
    double inv_eps() const { return 1.0 / eps_; }

    friend bool operator==(const Parameters&, const Parameters&) = default;

private:
    double eps_;
    double eta_;
};

/// x = x_per_s * s, y = y_per_c * c, t = t_per_tau * tau.
struct Scaling {
    double x_per_s = 0.0;
    double y_per_c = 0.0;
    double t_per_tau = 0.0;
};

struct Nondimensionalization {
    Parameters params;
    Scaling scaling;
};

/// Throws Error{InadmissibleEta} when k_minus1 == 0 (eta would be 1).
Nondimensionalization nondimensionalize(const RateConstants& rc);

/// Time-form vector field (x', y').
Vec2 rhs_time(const Parameters& p, Vec2 pt);

/// -x + (1 - eta) y + x y; zero exactly on the vertical isocline.
inline double slope_denominator(const Parameters& p, double x, double y) {
    return -x + (1.0 - p.eta()) * y + x * y;
}

/// x - y - x y; zero exactly on the horizontal isocline.
inline double slope_numerator(double x, double y) { return x - y - x * y; }

/// True when (x, y) sits on the vertical isocline up to rounding of the
/// denominator's terms.
bool on_vertical_isocline(const Parameters& p, double x, double y);

/// dy/dx = f(x, y). Throws Error{SingularSlope} on the vertical isocline.
double slope_field(const Parameters& p, Vec2 pt);

Matrix2 linearization(const Parameters& p);

struct Resonance {
    bool resonant = false;
    bool near_resonant = false;
    long nearest_integer = 0;
    double distance = 0.0;  // |kappa - nearest_integer|
};

inline constexpr double kResonanceTolerance = 1e-9;
inline constexpr double kNearResonanceTolerance = 1e-4;

struct Spectrum {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double kappa = 0.0;
    double sigma = 0.0;
    Vec2 v_plus;
    Vec2 v_minus;
    Vec2 vhat_plus;
    Vec2 vhat_minus;
    Resonance resonance;
};

Spectrum spectrum(const Parameters& p);

/// eta giving eigenvalue ratio kappa at this eps. Throws
/// Error{InadmissibleEta} when the result falls outside (0, 1).
double eta_from_kappa(double eps, double kappa);

/// Solution of z' = A z, z(0) = x0.
Vec2 linear_solution(const Parameters& p, Vec2 x0, double t);

/// State (s, e, c, p) of the four-species mass-action system.
using SpeciesState = std::array<double, 4>;

SpeciesState mass_action_rhs(const RateConstants& rc, const SpeciesState& state);

}  // namespace mmphase
