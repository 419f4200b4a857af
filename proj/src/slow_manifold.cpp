#include "mmphase/slow_manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmphase/error.hpp"
#include "mmphase/isoclines.hpp"

namespace mmphase {

namespace {

// alpha - H without cancellation.
double fence_gap(double sigma, double x) {
    const double inv = 1.0 / sigma;
    return x * (1.0 - inv) / ((inv + x) * (1.0 + x));
}

double offset_slope(const Parameters& p, double x, double z) {
    const double n = -(1.0 + x) * z;
    const double d = -p.eta() * x / (1.0 + x) + (1.0 - p.eta() + x) * z;
    return n / (p.eps() * d) - 1.0 / ((1.0 + x) * (1.0 + x));
}

struct OffsetRun {
    std::vector<double> x, z, dz;
    double exit_x = 0.0;
    int exit_side = 0;  // -1 through H, +1 through alpha, 0 stayed inside
    bool underflow = false;
    IntegrationStats stats;
};

/// Integrates z' = f(x, H + z) - H' from (x0, z0) to x1, recording the stop
/// points, and halts as soon as z leaves (0, alpha - H).
OffsetRun run_offset(const Parameters& p, double sigma, double x0, double z0, double x1, const Tolerance& tol,
                     std::span<const double> stops) {
    using S = ode::State<1>;
    auto rhs = [&](double x, const S& z) { return S{offset_slope(p, x, z[0])}; };
    OffsetRun run;
    std::size_t next = 0;
    const double dir = x1 >= x0 ? 1.0 : -1.0;
    while (next < stops.size() && dir * (stops[next] - x0) <= 0.0) ++next;
    auto on_step = [&](const ode::Step<1>& step) {
        const double z = step.y1[0];
        if (!(z > 0.0)) {
            run.exit_side = -1;
        } else if (!(z < fence_gap(sigma, step.t1))) {
            run.exit_side = 1;
        }
        if (run.exit_side != 0) {
            run.exit_x = step.t0;
            return false;
        }
        while (next < stops.size() && dir * (stops[next] - step.t1) <= 0.0) {
            if (stops[next] == step.t1) {
                run.x.push_back(step.t1);
                run.z.push_back(z);
                run.dz.push_back(step.f1[0]);
            }
            ++next;
        }
        return true;
    };
    const ode::Outcome out = ode::integrate<1>(rhs, x0, S{z0}, x1, tol, stops, on_step);
    run.stats = {out.stats.accepted, out.stats.rejected, out.stats.max_error};
    run.underflow = out.underflow;
    if (run.exit_side == 0) run.exit_x = out.t_reached;
    return run;
}

SlowManifold assemble(const Parameters& p, double sigma, std::vector<double> x, std::vector<double> z,
                      std::vector<double> dz) {
    SlowManifold m;
    m.params = p;
    m.sigma = sigma;
    std::vector<double> y(x.size()), dy(x.size());
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = horizontal_isocline(x[i]);
        y[i] = h + z[i];
        dy[i] = dz[i] + 1.0 / ((1.0 + x[i]) * (1.0 + x[i]));
        margin = std::min({margin, z[i], fence_gap(sigma, x[i]) - z[i]});
    }
    m.fence_margin = margin;
    m.curve = Curve::hermite(x, std::move(y), std::move(dy));
    m.offset = Curve::hermite(std::move(x), std::move(z), std::move(dz));
    return m;
}

double infinity_seed_offset(const InfinitySeries& rho, double x) {
    const std::size_t n_max = rho.coeffs.size() - 1;
    if (n_max < 3) return eval_infinity(rho, x) - horizontal_isocline(x);
    // rho_0..rho_2 coincide with the expansion of H, so only the remaining
    // differences and the truncation error of H survive.
    double z = 0.0;
    for (std::size_t n = n_max; n >= 3; --n) {
        const double h_n = (n % 2 == 0) ? 1.0 : -1.0;
        z = (z + rho.coeffs[n] - h_n) / x;
    }
    z /= x * x;
    const double sign = (n_max % 2 == 0) ? 1.0 : -1.0;
    return z + sign * std::pow(x, -static_cast<double>(n_max)) / (1.0 + x);
}

}  // namespace

OffsetGeometry offset_geometry(const Parameters& p, double x, double z) {
    const double d = -p.eta() * x / (1.0 + x) + (1.0 - p.eta() + x) * z;
    if (d == 0.0) {
        throw Error(ErrorKind::SingularSlope, "offset geometry evaluated on the vertical isocline");
    }
    OffsetGeometry g;
    g.y = horizontal_isocline(x) + z;
    g.slope = -(1.0 + x) * z / (p.eps() * d);
    const double dz = g.slope - 1.0 / ((1.0 + x) * (1.0 + x));
    g.h = z * (x - 1.0) / (1.0 + x) + z * z + x * dz;
    g.curvature = p.eta() / (p.eps() * d * d) * g.h;
    return g;
}

SlowManifold compute_manifold(const Parameters& p, const ManifoldOptions& o) {
    if (!(o.x_min > 0.0) || !(o.x_max > o.x_min)) {
        throw Error(ErrorKind::Domain, "compute_manifold needs 0 < x_min < x_max");
    }
    if (o.x_max < 50.0) {
        throw Error(ErrorKind::Domain, "compute_manifold needs x_max >= 50 for the infinity-series seed");
    }
    if (o.seed_order > 8) {
        throw Error(ErrorKind::Domain, "compute_manifold supports seed orders up to 8");
    }
    if (o.grid_points < 2) {
        throw Error(ErrorKind::Domain, "compute_manifold needs at least two grid points");
    }
    if (!(o.tol >= 1e-14) || !(o.tol <= 1e-3)) {
        throw Error(ErrorKind::Domain, "compute_manifold tolerance must lie in [1e-14, 1e-3]");
    }
    const double sigma = spectrum(p).sigma;
    const std::vector<double> grid = log_grid(o.x_min, o.x_max, o.grid_points);
    const InfinitySeries rho = infinity_coefficients(p, o.seed_order);
    const double z_seed = infinity_seed_offset(rho, o.x_max);
    const double seed_value = horizontal_isocline(o.x_max) + z_seed;

    const bool seed_inside = z_seed > 0.0 && z_seed < fence_gap(sigma, o.x_max);
    if (seed_inside) {
        std::vector<double> stops(grid.rbegin(), grid.rend());
        const Tolerance tol{o.tol, 1e-2 * o.tol * z_seed};
        OffsetRun run = run_offset(p, sigma, o.x_max, z_seed, o.x_min, tol, stops);
        if (run.exit_side == 0 && !run.underflow && run.x.size() + 1 == grid.size()) {
            run.x.insert(run.x.begin(), o.x_max);
            run.z.insert(run.z.begin(), z_seed);
            run.dz.insert(run.dz.begin(), offset_slope(p, o.x_max, z_seed));
            std::reverse(run.x.begin(), run.x.end());
            std::reverse(run.z.begin(), run.z.end());
            std::reverse(run.dz.begin(), run.dz.end());
            SlowManifold m = assemble(p, sigma, std::move(run.x), std::move(run.z), std::move(run.dz));
            m.seed_order = o.seed_order;
            m.seed_value = seed_value;
            m.tol = o.tol;
            m.stats = run.stats;
            return m;
        }
    }

    const ShootResult shot = antifunnel_shoot(p, o.x_min, o.x_max, grid, o.tol);
    if (shot.curve.empty() || shot.curve.x_max() < o.x_max) {
        std::ostringstream msg;
        msg << "slow manifold construction failed: backward integration "
            << (seed_inside ? "left Gamma1" : "had its seed outside Gamma1")
            << " and antifunnel shooting only reached x=" << shot.reach << " of " << o.x_max << " after "
            << shot.trials << " trials (bracket width " << shot.bracket_width << ")";
        throw Error(ErrorKind::Construction, msg.str());
    }
    std::vector<double> x(shot.curve.grid().begin(), shot.curve.grid().end());
    std::vector<double> z(x.size()), dz(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = shot.curve.values()[i] - horizontal_isocline(x[i]);
        dz[i] = offset_slope(p, x[i], z[i]);
    }
    SlowManifold m = assemble(p, sigma, std::move(x), std::move(z), std::move(dz));
    m.seed_order = o.seed_order;
    m.seed_value = seed_value;
    m.tol = o.tol;
    m.used_fallback = true;
    return m;
}

ShootResult antifunnel_shoot(const Parameters& p, double x_left, double x_right, std::span<const double> grid,
                             double tol, double width) {
    if (!(x_left > 0.0) || !(x_right > x_left)) {
        throw Error(ErrorKind::Domain, "antifunnel_shoot needs 0 < x_left < x_right");
    }
    const double sigma = spectrum(p).sigma;
    std::vector<double> stops;
    for (double g : grid) {
        if (g > x_left && g <= x_right) stops.push_back(g);
    }
    std::sort(stops.begin(), stops.end());

    double lo = 0.0;
    double hi = fence_gap(sigma, x_left);
    const Tolerance ode_tol{tol, 1e-3 * tol * hi};
    ShootResult best;
    OffsetRun best_run;
    double best_z = 0.0;
    best.reach = x_left;
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ++best.trials;
        OffsetRun run = run_offset(p, sigma, x_left, mid, x_right, ode_tol, stops);
        const int side = run.exit_side;
        if (best.trials == 1 || run.exit_x > best.reach) {
            best.reach = run.exit_x;
            best_z = mid;
            best_run = std::move(run);
        }
        if (side < 0) {
            lo = mid;
        } else if (side > 0) {
            hi = mid;
        } else {
            break;  // stayed inside up to x_right, or the step size collapsed
        }
    }
    best.bracket_width = hi - lo;
    best.y_start = horizontal_isocline(x_left) + best_z;

    std::vector<double> x{x_left}, y{best.y_start};
    std::vector<double> dy{offset_slope(p, x_left, best_z) + 1.0 / ((1.0 + x_left) * (1.0 + x_left))};
    for (std::size_t i = 0; i < best_run.x.size(); ++i) {
        x.push_back(best_run.x[i]);
        y.push_back(horizontal_isocline(best_run.x[i]) + best_run.z[i]);
        dy.push_back(best_run.dz[i] + 1.0 / ((1.0 + best_run.x[i]) * (1.0 + best_run.x[i])));
    }
    if (x.size() >= 2) best.curve = Curve::hermite(std::move(x), std::move(y), std::move(dy));
    return best;
}

namespace {

FenceReport summarize(FenceReport r) {
    r.min_lower = *std::min_element(r.lower_margin.begin(), r.lower_margin.end());
    r.min_upper = *std::min_element(r.upper_margin.begin(), r.upper_margin.end());
    r.pass = r.min_lower > 0.0 && r.min_upper > 0.0;
    r.within_slack = r.min_lower > kFenceSlack && r.min_upper > kFenceSlack;
    return r;
}

}  // namespace

FenceReport verify_fences(const Parameters& p, const SlowManifold& m) {
    const double sigma = spectrum(p).sigma;
    FenceReport r;
    const auto xs = m.offset.grid();
    const auto zs = m.offset.values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        r.x.push_back(xs[i]);
        r.lower_margin.push_back(zs[i]);
        r.upper_margin.push_back(fence_gap(sigma, xs[i]) - zs[i]);
    }
    return summarize(std::move(r));
}

FenceReport verify_fences(const Parameters& p, const Curve& curve) {
    const double sigma = spectrum(p).sigma;
    FenceReport r;
    const auto xs = curve.grid();
    const auto ys = curve.values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        r.x.push_back(xs[i]);
        r.lower_margin.push_back(ys[i] - horizontal_isocline(xs[i]));
        r.upper_margin.push_back(alpha_isocline(sigma, xs[i]) - ys[i]);
    }
    return summarize(std::move(r));
}

SlopeCurvature slope_and_curvature(const Parameters& p, const SlowManifold& m, double x) {
    if (!(x >= m.offset.x_min()) || !(x <= m.offset.x_max())) {
        throw Error(ErrorKind::Domain, "slope_and_curvature: x outside the manifold grid");
    }
    const OffsetGeometry g = offset_geometry(p, x, m.offset(x));
    return {g.slope, g.curvature};
}

TailFit origin_tail(const Parameters& p, const SlowManifold& m) {
    const Spectrum s = spectrum(p);
    if (s.resonance.resonant) {
        std::ostringstream msg;
        msg << "origin tail undefined at resonance (kappa=" << s.kappa << ")";
        throw Error(ErrorKind::UnsupportedResonance, msg.str());
    }
    // Subtracting through ceil(kappa) removes sigma_ceil x^ceil, which is
    // o(x^kappa) but only by x^(ceil - kappa) and swamps C x^kappa near
    // resonance.
    const auto order = static_cast<std::size_t>(std::floor(s.kappa)) + 1;
    const OriginSeries series = origin_coefficients(p, order);
    const double floor_rel = std::max(1e-13, 10.0 * m.tol);

    std::vector<double> xs, rs;
    std::size_t below_cut = 0;
    const auto grid = m.offset.grid();
    const auto zs = m.offset.values();
    for (std::size_t i = 0; i < grid.size() && grid[i] <= 1e-2; ++i) {
        const double x = grid[i];
        ++below_cut;
        // r = M - sum sigma_n x^n, written against z = M - H so that the
        // leading terms cancel analytically.
        double poly = 0.0;
        for (std::size_t n = order; n >= 1; --n) {
            const double h_n = (n % 2 == 1) ? 1.0 : -1.0;
            poly = (poly + series.coeffs[n] - h_n) * x;
        }
        const double h_trunc = ((order % 2 == 0) ? 1.0 : -1.0) * std::pow(x, static_cast<double>(order + 1)) / (1.0 + x);
        const double r = zs[i] - poly + h_trunc;
        if (std::abs(r) < floor_rel * s.sigma * x) continue;
        xs.push_back(x);
        rs.push_back(r);
    }
    if (below_cut < 8) {
        throw Error(ErrorKind::Domain, "origin_tail needs at least 8 grid points below x = 1e-2");
    }
    if (xs.size() < 8) {
        std::ostringstream msg;
        msg << "origin tail residual is below the precision floor on " << (below_cut - xs.size()) << " of "
            << below_cut << " points; the x^" << s.kappa << " term is not resolvable after subtracting "
            << order << " series terms";
        throw Error(ErrorKind::InsufficientPrecision, msg.str());
    }
    return fit_tail_auto(xs, rs);
}

std::string_view to_string(CurvatureLimit c) noexcept {
    switch (c) {
        case CurvatureLimit::Finite: return "finite";
        case CurvatureLimit::Divergent: return "divergent";
        case CurvatureLimit::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

CurvatureLimitReport second_derivative_limit(const Parameters& p, const SlowManifold& m, std::size_t halvings) {
    const Spectrum s = spectrum(p);
    if (s.resonance.resonant) {
        throw Error(ErrorKind::UnsupportedResonance, "second_derivative_limit needs nonresonant parameters");
    }
    if (!(std::abs(s.kappa - 2.0) > 0.05)) {
        throw Error(ErrorKind::Domain, "second_derivative_limit needs |kappa - 2| > 0.05");
    }
    const auto grid = m.offset.grid();
    const auto start = std::lower_bound(grid.begin(), grid.end(), 1e-2);
    if (start == grid.end() || grid.front() > 1e-2) {
        throw Error(ErrorKind::Domain, "second_derivative_limit needs a manifold grid containing x = 1e-2");
    }
    const double x0 = *start;
    const double z0 = m.offset.values()[static_cast<std::size_t>(start - grid.begin())];

    CurvatureLimitReport rep;
    const OriginSeries series = origin_coefficients(p, 2);
    rep.expected_finite = 2.0 * series.coeffs[2];

    std::vector<double> stops;
    for (std::size_t k = 0; k <= halvings; ++k) stops.push_back(std::ldexp(1e-2, -static_cast<int>(k)));
    const double x_end = stops.back();
    const Tolerance tol{m.tol, 1e-2 * m.tol * (s.sigma - 1.0) * x_end};
    const OffsetRun run = run_offset(p, s.sigma, x0, z0, x_end, tol, stops);
    if (x0 == stops.front()) {
        rep.x.push_back(x0);
        rep.curvature.push_back(offset_geometry(p, x0, z0).curvature);
    }
    for (std::size_t i = 0; i < run.x.size(); ++i) {
        rep.x.push_back(run.x[i]);
        rep.curvature.push_back(offset_geometry(p, run.x[i], run.z[i]).curvature);
    }

    // Finite: the deepest third of the sequence sits within 5% of 2 sigma_2
    // and the deviation has shrunk since x = 1e-2. The approach goes like
    // x^(kappa - 2), too slowly near kappa = 2 to settle by x = 1e-4.
    bool finite = false;
    if (rep.curvature.size() >= 3) {
        auto deviation = [&](std::size_t i) {
            return std::abs(rep.curvature[i] - rep.expected_finite) / std::abs(rep.expected_finite);
        };
        const std::size_t from = rep.curvature.size() - rep.curvature.size() / 3;
        bool ok = deviation(rep.curvature.size() - 1) < deviation(0);
        for (std::size_t i = from; i < rep.curvature.size(); ++i) ok = ok && deviation(i) <= 0.05;
        finite = ok;
    }
    bool divergent = false;
    if (rep.curvature.size() >= 4) {
        // The growth must persist over the second half of the sequence.
        const std::size_t from = rep.curvature.size() / 2;
        bool increasing = true;
        for (std::size_t i = from + 1; i < rep.curvature.size(); ++i) {
            increasing = increasing && std::abs(rep.curvature[i]) > std::abs(rep.curvature[i - 1]);
        }
        divergent = increasing && std::abs(rep.curvature.back()) > 1e3;
    }
    rep.kind = finite ? CurvatureLimit::Finite : divergent ? CurvatureLimit::Divergent : CurvatureLimit::Indeterminate;
    return rep;
}

std::optional<double> perturbed_exit(const Parameters& p, const SlowManifold& m, double x0, double delta,
                                     double x_end) {
    if (!(x0 >= m.offset.x_min()) || !(x0 < x_end)) {
        throw Error(ErrorKind::Domain, "perturbed_exit needs x_min <= x0 < x_end");
    }
    const double sigma = spectrum(p).sigma;
    const double z0 = m.offset(x0) + delta;
    const Tolerance tol{m.tol, 1e-3 * m.tol * std::abs(m.offset(x0))};
    const OffsetRun run = run_offset(p, sigma, x0, z0, x_end, tol, {});
    if (run.exit_side == 0 && !run.underflow) return std::nullopt;
    return run.exit_x;
}

}  // namespace mmphase
