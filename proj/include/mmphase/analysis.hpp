#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmphase/curve.hpp"
#include "mmphase/integrate.hpp"
#include "mmphase/kinetics.hpp"
#include "mmphase/slow_manifold.hpp"

namespace mmphase {

/// p(x, y) = eta / (eps D^2), positive off V. Throws Error{SingularSlope} on V.
double p_aux(const Parameters& p, Vec2 pt);

/// h(x, y) = y (y - 1) + x f(x, y); sign(y'') = sign(h). Throws
/// Error{SingularSlope} on V.
double h_aux(const Parameters& p, Vec2 pt);

/// Rows of the concavity table, top to bottom.
enum class ConcavityRow { BelowM, MToAlpha, AlphaToV, VToOne, AboveOne };
enum class Concavity { Down, Up, Either };

std::string_view to_string(ConcavityRow r) noexcept;
std::string_view to_string(Concavity c) noexcept;

/// Expected concavity for each row; rows whose solutions pass through an
/// inflection point report Either.
Concavity expected_concavity(ConcavityRow r) noexcept;

struct ConcavityReport {
    Vec2 point;
    ConcavityRow row = ConcavityRow::BelowM;
    Concavity expected = Concavity::Either;
    double h = 0.0;
    double p = 0.0;
    double curvature = 0.0;  // p h
    int observed_sign = 0;   // sign of p h
    bool consistent = true;  // observed matches expected (always true for Either)
};

/// Chooses the row by comparing y with M(x), alpha(x), V(x) and 1. M is only
/// consulted between H and alpha, where x must lie in the manifold's grid
/// range (Error{Domain} otherwise). Throws Error{SingularSlope} on V.
ConcavityReport concavity_classify(const Parameters& p, Vec2 pt, const SlowManifold& m);

/// Real roots of c3 y^3 + c2 y^2 + c1 y + c0, ascending, polished by Newton.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

/// Coefficients (c3, c2, c1, c0) in y of G(x, y) = eps D h.
std::array<double, 4> inflection_cubic(const Parameters& p, double x);

enum class LocusBranch { BetweenMAlpha, AboveOne, DiscardedNegative, OnV, Other };

std::string_view to_string(LocusBranch b) noexcept;

struct LocusPoint {
    double x = 0.0;
    double y = 0.0;
    LocusBranch branch = LocusBranch::Other;
    double h = 0.0;  // back-substituted h(x, y)
};

struct InflectionLoci {
    std::vector<LocusPoint> points;
    std::vector<std::string> warnings;

    std::vector<LocusPoint> branch(LocusBranch b) const;
};

/// Roots of G(x, .) for every x of the grid, sorted into branches. With a
/// manifold the lower band is (M, alpha); without one it is (H, alpha).
/// Roots on V are reported as OnV; near-coincident roots add a warning.
InflectionLoci inflection_locus(const Parameters& p, std::span<const double> x_grid,
                                const SlowManifold* m = nullptr);

enum class EntryOutcome { Entered, NotEntered, Inconclusive };

std::string_view to_string(EntryOutcome e) noexcept;

struct EntryReport {
    EntryOutcome outcome = EntryOutcome::Inconclusive;
    Vec2 start;
    double t_enter = 0.0;             // Entered only
    double t_decided = 0.0;           // NotEntered only: when C > 0 became evident
    std::optional<Event> v_crossing;  // last crossing of V before the outcome
    double x_star = 0.0;              // V meets y = sigma x here
    bool kappa_above_two = false;
    /// Entry is forced: kappa > 2, or V was crossed right of x_star.
    bool entry_guaranteed = false;
    IntegrationStats stats;
};

/// Simulates from `start` over [0, horizon]. Entered when an EnterGamma1
/// event occurs. NotEntered (kappa < 2 only) when the solution is in Gamma0,
/// x <= 1e-3 and y - alpha exceeds both 10 |sigma_2 + sigma^2| x^2 and the
/// integration noise, i.e. its x^kappa coefficient is positive, without having
/// entered Gamma1 before. Inconclusive otherwise. Throws
/// Error{UnsupportedResonance} for resonant p.
EntryReport gamma1_entry(const Parameters& p, Vec2 start, double horizon, const Tolerance& tol = {1e-10, 1e-200});

/// gamma1_entry for `count` starts evenly spaced on x = x_start, y in [y_lo, y_hi];
/// used to look for solutions that never enter Gamma1 (starts above V near the y-axis).
std::vector<EntryReport> entry_scan(const Parameters& p, double x_start, double y_lo, double y_hi, std::size_t count,
                                    double horizon, const Tolerance& tol = {1e-10, 1e-200});

struct FraserIterates {
    std::vector<Curve> iterates;                 // y_0 .. y_n on the grid of y_0
    std::vector<std::vector<std::size_t>> pole_hits;  // per iterate k >= 1: nodes where y_{k-1}' = -1/eps
    std::vector<std::size_t> edge_nodes;         // nodes whose derivative is one-sided
    std::vector<double> distance;                // sup |y_k - M| over the reference range, if given

    /// sup |y_k - M| over grid nodes in [lo, hi], one entry per iterate.
    std::vector<double> sup_distance(const SlowManifold& m, double lo, double hi) const;
};

/// y_{k+1}(x_i) = F(x_i, y_k'(x_i)). y_0' comes from the caller's curve; later
/// iterates are natural cubic splines through their node values. Throws
/// Error{Domain} for n < 1 and Error{SingularSlope} when an iterate blows up
/// (K(y_k') = -x).
FraserIterates fraser_iterate(const Parameters& p, const Curve& y0, std::size_t n,
                              const SlowManifold* reference = nullptr);

struct AuditRow {
    ConcavityRow row = ConcavityRow::BelowM;
    std::size_t samples = 0;
    std::size_t checked = 0;     // determinate rows with |h| above the band
    std::size_t mismatches = 0;  // differenced y'' against the table
    std::size_t excluded = 0;    // |h| inside the band
    std::size_t unresolved = 0;  // x too still to difference
    std::size_t model_disagreements = 0;  // differenced y'' against sign(p h), every row
};

struct ConcavityAudit {
    std::array<AuditRow, 5> rows;
    std::size_t skipped = 0;  // near V, on the axes or outside the manifold range
    bool pass = false;        // every row sampled min_samples times, no mismatch
};

/// Samples time-form solutions from each start at `samples_per_start` times
/// (quadratically clustered toward t = 0). At each sample y'' is differenced
/// along the solution and its sign compared with the table's determinate rows
/// and with sign(p h), ignoring |h| <= h_band.
ConcavityAudit concavity_audit(const Parameters& p, const SlowManifold& m, std::span<const Vec2> starts, double t_end,
                         std::size_t samples_per_start = 400, double h_band = 1e-6, std::size_t min_samples = 100);

}  // namespace mmphase
