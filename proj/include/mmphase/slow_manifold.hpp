#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "mmphase/curve.hpp"
#include "mmphase/integrate.hpp"
#include "mmphase/kinetics.hpp"
#include "mmphase/series.hpp"

namespace mmphase {

struct ManifoldOptions {
    double x_min = 1e-3;
    double x_max = 1e3;
    std::size_t grid_points = 600;
    double tol = 1e-12;  // relative tolerance on the offset from H
    std::size_t seed_order = 5;
};

/// The slow manifold M sampled on a log grid.
///
/// The curve is stored twice: `curve` holds M itself, `offset` holds
/// z = M - H. All margins, slopes and curvatures are computed from z because
/// near x_max the manifold hugs H to within eps*eta/x^3 and M - H would lose
/// every significant digit.
struct SlowManifold {
    Parameters params{1.0, 0.5};
    double sigma = 0.0;
    Curve curve;   // M with analytic node slopes f(x, M)
    Curve offset;  // z = M - H with node slopes f(x, M) - H'(x)
    std::size_t seed_order = 0;
    double seed_value = 0.0;
    double tol = 0.0;
    double fence_margin = 0.0;  // min over nodes of min(M - H, alpha - M)
    bool used_fallback = false;
    IntegrationStats stats;
    std::optional<TailFit> tail;

    double operator()(double x) const { return curve(x); }
    double offset_at(double x) const { return offset(x); }
};

/// Builds M by integrating the offset from the infinity-series seed at x_max
/// down to x_min. If the result leaves Gamma1 the antifunnel shooting of
/// `antifunnel_shoot` takes over. Throws Error{Domain} for x_min <= 0,
/// x_max <= x_min, x_max < 50 or seed_order > 8, and Error{Construction} when
/// neither route yields a curve inside Gamma1 over the whole grid.
SlowManifold compute_manifold(const Parameters& p, const ManifoldOptions& options = {});

struct ShootResult {
    Curve curve;         // on the requested grid points up to `reach`
    double reach = 0.0;  // furthest x the best trial stayed inside Gamma1
    double y_start = 0.0;
    double bracket_width = 0.0;
    std::size_t trials = 0;
};

/// Antifunnel bisection: bisects y(x_left) between H and alpha, integrating
/// forward in x, on whether the trial leaves Gamma1 through H or through alpha.
/// Keeps the trial that stays inside longest.
ShootResult antifunnel_shoot(const Parameters& p, double x_left, double x_right, std::span<const double> grid,
                             double tol = 1e-12, double width = 1e-14);

/// Stable evaluation of slope and curvature at a point given by its offset from H.
struct OffsetGeometry {
    double y = 0.0;
    double slope = 0.0;      // f(x, y)
    double curvature = 0.0;  // p(x, y) h(x, y)
    double h = 0.0;
};

OffsetGeometry offset_geometry(const Parameters& p, double x, double z);

struct FenceReport {
    std::vector<double> x;
    std::vector<double> lower_margin;  // y - H
    std::vector<double> upper_margin;  // alpha - y
    double min_lower = 0.0;
    double min_upper = 0.0;
    /// Strictly inside: every margin > 0. A curve lying on a fence fails.
    bool pass = false;
    /// Every margin > kFenceSlack.
    bool within_slack = false;
};

inline constexpr double kFenceSlack = -1e-9;

FenceReport verify_fences(const Parameters& p, const SlowManifold& m);
FenceReport verify_fences(const Parameters& p, const Curve& curve);

struct SlopeCurvature {
    double slope = 0.0;
    double curvature = 0.0;
};

/// M' = f(x, M(x)) and M'' = p h at (x, M(x)); x must lie in the grid range.
SlopeCurvature slope_and_curvature(const Parameters& p, const SlowManifold& m, double x);

/// Fits M - sum_{n <= ceil(kappa)} sigma_n x^n = C x^kappa on the grid points
/// below 1e-2. Throws Error{UnsupportedResonance} for resonant p and
/// Error{InsufficientPrecision} when the residual sinks below the floor of
/// max(1e-13, 10 tol) * sigma x on too many points to fit.
TailFit origin_tail(const Parameters& p, const SlowManifold& m);

enum class CurvatureLimit { Finite, Divergent, Indeterminate };

std::string_view to_string(CurvatureLimit c) noexcept;

struct CurvatureLimitReport {
    CurvatureLimit kind = CurvatureLimit::Indeterminate;
    double expected_finite = 0.0;  // 2 sigma_2
    std::vector<double> x;
    std::vector<double> curvature;
};

/// Follows M'' along x_k = 1e-2 * 2^-k, k = 0..halvings, by continuing the
/// offset integration below the manifold grid. Finite when the deepest third
/// of the sequence lies within 5% of 2 sigma_2; divergent when |M''| grows
/// over the second half and ends above 1e3. Throws
/// Error{UnsupportedResonance} for resonant p and Error{Domain} when
/// |kappa - 2| <= 0.05.
CurvatureLimitReport second_derivative_limit(const Parameters& p, const SlowManifold& m,
                                             std::size_t halvings = 20);

/// Seeds y(x0) = M(x0) + delta and integrates forward in x until the curve
/// leaves Gamma1 or reaches x_end; returns the exit abscissa, or nullopt.
std::optional<double> perturbed_exit(const Parameters& p, const SlowManifold& m, double x0, double delta,
                                     double x_end);

}  // namespace mmphase
