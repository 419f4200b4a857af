#include "mmphase/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mmphase/error.hpp"
#include "mmphase/isoclines.hpp"

namespace mmphase {

namespace {

double checked_denominator(const Parameters& p, Vec2 pt) {
    const double d = slope_denominator(p, pt.x, pt.y);
    if (d == 0.0 || on_vertical_isocline(p, pt.x, pt.y)) {
        std::ostringstream msg;
        msg << "(" << pt.x << ", " << pt.y << ") lies on the vertical isocline";
        throw Error(ErrorKind::SingularSlope, msg.str());
    }
    return d;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double p_aux(const Parameters& p, Vec2 pt) {
    const double d = checked_denominator(p, pt);
    return p.eta() / (p.eps() * d * d);
}

double h_aux(const Parameters& p, Vec2 pt) {
    const double d = checked_denominator(p, pt);
    const double f = slope_numerator(pt.x, pt.y) / (p.eps() * d);
    return pt.y * (pt.y - 1.0) + pt.x * f;
}

std::string_view to_string(ConcavityRow r) noexcept {
    switch (r) {
        case ConcavityRow::BelowM: return "below_m";
        case ConcavityRow::MToAlpha: return "m_to_alpha";
        case ConcavityRow::AlphaToV: return "alpha_to_v";
        case ConcavityRow::VToOne: return "v_to_one";
        case ConcavityRow::AboveOne: return "above_one";
    }
    return "unknown";
}

std::string_view to_string(Concavity c) noexcept {
    switch (c) {
        case Concavity::Down: return "down";
        case Concavity::Up: return "up";
        case Concavity::Either: return "either";
    }
    return "unknown";
}

Concavity expected_concavity(ConcavityRow r) noexcept {
    switch (r) {
        case ConcavityRow::BelowM: return Concavity::Down;
        case ConcavityRow::MToAlpha: return Concavity::Either;
        case ConcavityRow::AlphaToV: return Concavity::Up;
        case ConcavityRow::VToOne: return Concavity::Down;
        case ConcavityRow::AboveOne: return Concavity::Either;
    }
    return Concavity::Either;
}

ConcavityReport concavity_classify(const Parameters& p, Vec2 pt, const SlowManifold& m) {
    if (!(pt.x >= 0.0) || !(pt.y >= 0.0)) {
        throw Error(ErrorKind::Domain, "concavity_classify needs a point of the closed first quadrant");
    }
    ConcavityReport r;
    r.point = pt;
    r.h = h_aux(p, pt);
    r.p = p_aux(p, pt);
    r.curvature = r.p * r.h;
    r.observed_sign = sign_of(r.curvature);

    const double sigma = m.sigma;
    if (pt.y >= 1.0) {
        r.row = ConcavityRow::AboveOne;
    } else if (pt.y > vertical_isocline(p, pt.x)) {
        r.row = ConcavityRow::VToOne;
    } else if (pt.y >= alpha_isocline(sigma, pt.x)) {
        r.row = ConcavityRow::AlphaToV;
    } else if (pt.y < horizontal_isocline(pt.x)) {
        r.row = ConcavityRow::BelowM;
    } else {
        if (pt.x < m.offset.x_min() || pt.x > m.offset.x_max()) {
            throw Error(ErrorKind::Domain, "concavity_classify: point between H and alpha outside the manifold grid");
        }
        const double z = pt.y - horizontal_isocline(pt.x);
        r.row = z > m.offset(pt.x) ? ConcavityRow::MToAlpha : ConcavityRow::BelowM;
    }
    r.expected = expected_concavity(r.row);
    switch (r.expected) {
        case Concavity::Down: r.consistent = r.observed_sign < 0; break;
        case Concavity::Up: r.consistent = r.observed_sign > 0; break;
        case Concavity::Either: r.consistent = true; break;
    }
    return r;
}

std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    std::vector<double> roots;
    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    if (scale == 0.0) return roots;
    if (std::abs(c3) <= 1e-14 * scale) {
        if (std::abs(c2) <= 1e-14 * scale) {
            if (c1 != 0.0) roots.push_back(-c0 / c1);
            return roots;
        }
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0.0) return roots;
        const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
        roots.push_back(q / c2);
        if (q != 0.0) roots.push_back(c0 / q);
    } else {
        const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
        const double pp = b - a * a / 3.0;
        const double qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        const double disc = qq * qq / 4.0 + pp * pp * pp / 27.0;
        if (disc > 0.0) {
            const double s = std::sqrt(disc);
            roots.push_back(std::cbrt(-qq / 2.0 + s) + std::cbrt(-qq / 2.0 - s) - a / 3.0);
        } else if (pp == 0.0) {
            roots.push_back(-a / 3.0);
        } else {
            const double r = 2.0 * std::sqrt(-pp / 3.0);
            const double arg = std::clamp(3.0 * qq / (2.0 * pp) * std::sqrt(-3.0 / pp), -1.0, 1.0);
            const double phi = std::acos(arg) / 3.0;
            for (int k = 0; k < 3; ++k) {
                roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - a / 3.0);
            }
        }
    }
    // Newton polish on the original coefficients; keep a step only if it helps.
    auto poly = [&](double y) { return ((c3 * y + c2) * y + c1) * y + c0; };
    auto dpoly = [&](double y) { return (3.0 * c3 * y + 2.0 * c2) * y + c1; };
    for (double& y : roots) {
        for (int it = 0; it < 4; ++it) {
            const double d = dpoly(y);
            if (d == 0.0) break;
            const double next = y - poly(y) / d;
            if (!(std::abs(poly(next)) < std::abs(poly(y)))) break;
            y = next;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::array<double, 4> inflection_cubic(const Parameters& p, double x) {
    const double e = p.eps();
    const double a = 1.0 - p.eta() + x;
    return {e * a, -e * (a + x), e * x - x * (1.0 + x), x * x};
}

std::string_view to_string(LocusBranch b) noexcept {
    switch (b) {
        case LocusBranch::BetweenMAlpha: return "between_m_alpha";
        case LocusBranch::AboveOne: return "above_one";
        case LocusBranch::DiscardedNegative: return "discarded_negative";
        case LocusBranch::OnV: return "on_v";
        case LocusBranch::Other: return "other";
    }
    return "unknown";
}

std::vector<LocusPoint> InflectionLoci::branch(LocusBranch b) const {
    std::vector<LocusPoint> out;
    std::copy_if(points.begin(), points.end(), std::back_inserter(out),
                 [&](const LocusPoint& pt) { return pt.branch == b; });
    return out;
}

InflectionLoci inflection_locus(const Parameters& p, std::span<const double> x_grid, const SlowManifold* m) {
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        if (!(x_grid[i] > 0.0) || (i > 0 && !(x_grid[i] > x_grid[i - 1]))) {
            throw Error(ErrorKind::Domain, "inflection_locus needs a positive increasing grid");
        }
    }
    const double sigma = spectrum(p).sigma;
    InflectionLoci loci;
    for (double x : x_grid) {
        const auto c = inflection_cubic(p, x);
        const std::vector<double> roots = cubic_real_roots(c[0], c[1], c[2], c[3]);
        for (std::size_t i = 1; i < roots.size(); ++i) {
            if (std::abs(roots[i] - roots[i - 1]) <= 1e-8 * (1.0 + std::abs(roots[i]))) {
                std::ostringstream msg;
                msg << "near-double inflection root at x=" << x << ", y=" << roots[i];
                loci.warnings.push_back(msg.str());
            }
        }
        for (double y : roots) {
            LocusPoint pt{x, y, LocusBranch::Other, 0.0};
            const double d = slope_denominator(p, x, y);
            if (y < 0.0) {
                pt.branch = LocusBranch::DiscardedNegative;
            } else if (std::abs(d) <= 1e-9 * (1.0 + x)) {
                pt.branch = LocusBranch::OnV;
            } else {
                pt.h = h_aux(p, {x, y});
                const double alpha = alpha_isocline(sigma, x);
                double lower = horizontal_isocline(x);
                if (m != nullptr && x >= m->offset.x_min() && x <= m->offset.x_max()) lower = (*m)(x);
                if (y > 1.0) {
                    pt.branch = LocusBranch::AboveOne;
                } else if (y > lower && y < alpha) {
                    pt.branch = LocusBranch::BetweenMAlpha;
                }
            }
            loci.points.push_back(pt);
        }
    }
    return loci;
}

std::string_view to_string(EntryOutcome e) noexcept {
    switch (e) {
        case EntryOutcome::Entered: return "entered";
        case EntryOutcome::NotEntered: return "not_entered";
        case EntryOutcome::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

EntryReport gamma1_entry(const Parameters& p, Vec2 start, double horizon, const Tolerance& tol) {
    const Spectrum s = spectrum(p);
    if (s.resonance.resonant) {
        throw Error(ErrorKind::UnsupportedResonance, "gamma1_entry assumes nonresonant parameters");
    }
    if (!(start.x >= 0.0) || !(start.y >= 0.0)) {
        throw Error(ErrorKind::Domain, "gamma1_entry needs a start in the closed first quadrant");
    }
    EntryReport rep;
    rep.start = start;
    rep.x_star = 1.0 / s.sigma - (1.0 - p.eta());
    rep.kappa_above_two = s.kappa > 2.0;

    const Trajectory traj = integrate_time(p, start, horizon, tol);
    rep.stats = traj.stats;

    // For kappa < 2, y - alpha = C x^kappa + (sigma_2 + sigma^2) x^2 + ... near
    // the origin. Once x is small and y - alpha clearly dominates the x^2 term
    // and the integration noise, C > 0 is settled and the solution stays
    // above alpha: any later "entry" would be rounding.
    double t_decided = horizon;
    if (!rep.kappa_above_two) {
        const OriginSeries series = origin_coefficients(p, 2);
        const double quad = std::abs(series.coeffs[2] + s.sigma * s.sigma);
        const double noise = 1e3 * tol.rel;
        for (const TrajectorySample& smp : traj.samples) {
            const Vec2 q = smp.point;
            if (!(q.x > 0.0) || q.x > 1e-3) continue;
            if (!classify_region(p, q, 0.0).in_gamma0) continue;
            const double gap = q.y - alpha_isocline(s.sigma, q.x);
            if (gap > 10.0 * quad * q.x * q.x && gap > noise * q.y) {
                t_decided = smp.t;
                break;
            }
        }
    }

    std::optional<Event> entered = traj.first_event(EventKind::EnterGamma1);
    if (entered && entered->t > t_decided) entered.reset();
    const double t_cut = entered ? entered->t : t_decided;
    std::optional<Event> gamma0;
    for (const Event& e : traj.events) {
        if (e.t > t_cut) break;
        if (e.kind == EventKind::CrossV) rep.v_crossing = e;
        if (e.kind == EventKind::EnterGamma0) gamma0 = e;
    }
    rep.entry_guaranteed = rep.kappa_above_two || (rep.v_crossing && rep.v_crossing->point.x > rep.x_star);
    if (entered) {
        rep.outcome = EntryOutcome::Entered;
        rep.t_enter = entered->t;
    } else if (t_decided < horizon && gamma0) {
        rep.outcome = EntryOutcome::NotEntered;
        rep.t_decided = t_decided;
    }
    return rep;
}

std::vector<EntryReport> entry_scan(const Parameters& p, double x_start, double y_lo, double y_hi, std::size_t count,
                                    double horizon, const Tolerance& tol) {
    if (count < 1 || !(x_start >= 0.0) || !(y_hi >= y_lo) || !(y_lo >= 0.0)) {
        throw Error(ErrorKind::Domain, "entry_scan needs count >= 1, x_start >= 0 and 0 <= y_lo <= y_hi");
    }
    std::vector<EntryReport> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double w = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(gamma1_entry(p, {x_start, y_lo + w * (y_hi - y_lo)}, horizon, tol));
    }
    return out;
}

std::vector<double> FraserIterates::sup_distance(const SlowManifold& m, double lo, double hi) const {
    std::vector<double> out;
    for (const Curve& c : iterates) {
        double d = 0.0;
        const auto xs = c.grid();
        const auto ys = c.values();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] < lo || xs[i] > hi) continue;
            if (xs[i] < m.curve.x_min() || xs[i] > m.curve.x_max()) continue;
            d = std::max(d, std::abs(ys[i] - m(xs[i])));
        }
        out.push_back(d);
    }
    return out;
}

FraserIterates fraser_iterate(const Parameters& p, const Curve& y0, std::size_t n, const SlowManifold* reference) {
    if (n < 1) {
        throw Error(ErrorKind::Domain, "fraser_iterate needs n >= 1");
    }
    if (y0.empty() || !(y0.x_min() > 0.0)) {
        throw Error(ErrorKind::Domain, "fraser_iterate needs an initial curve on a positive grid");
    }
    FraserIterates out;
    out.iterates.push_back(y0);
    out.edge_nodes = {0, y0.size() - 1};
    const std::vector<double> xs(y0.grid().begin(), y0.grid().end());
    for (std::size_t k = 0; k < n; ++k) {
        const Curve& prev = out.iterates.back();
        const auto slopes = prev.slopes();
        std::vector<double> next(xs.size());
        std::vector<std::size_t> poles;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double c = slopes[i];
            if (std::abs(1.0 + p.eps() * c) <= 1e-12 * (1.0 + p.eps() * std::abs(c))) poles.push_back(i);
            try {
                next[i] = F(p, xs[i], c);
            } catch (const Error& e) {
                std::ostringstream msg;
                msg << "Fraser iterate " << k + 1 << " diverged: " << e.what();
                throw Error(ErrorKind::SingularSlope, msg.str());
            }
        }
        out.pole_hits.push_back(std::move(poles));
        out.iterates.push_back(Curve::natural_spline(xs, std::move(next)));
    }
    if (reference != nullptr) {
        out.distance = out.sup_distance(*reference, reference->curve.x_min(), reference->curve.x_max());
    }
    return out;
}

namespace {

/// y'' along the computed solution: the change of dy/dx = f between two
/// nearby dense-output points, divided by the change in x. The stencil starts
/// where x moves by about 1e-4 x and is halved until both ends sit on the same
/// side of V as the sample and f changes by at most 5%. Empty when no such
/// stencil moves x measurably.
std::optional<double> differenced_curvature(const Parameters& p, const Trajectory& traj, double t, double t_end) {
    const Vec2 pt = traj.at(t);
    const double xdot = rhs_time(p, pt).x;
    if (xdot == 0.0) return std::nullopt;
    const double f0 = slope_field(p, pt);
    const bool above_v = slope_denominator(p, pt.x, pt.y) > 0.0;
    double dt = std::min(1e-4 * pt.x / std::abs(xdot), 0.25 * t_end);
    for (int halving = 0; halving < 80; ++halving, dt *= 0.5) {
        double t0 = std::max(0.0, t - dt);
        double t1 = std::min(t_end, t + dt);
        if (t1 - t0 < dt) {
            if (t0 == 0.0) t1 = std::min(t_end, 2.0 * dt);
            else t0 = std::max(0.0, t_end - 2.0 * dt);
        }
        const Vec2 a = traj.at(t0);
        const Vec2 b = traj.at(t1);
        if ((slope_denominator(p, a.x, a.y) > 0.0) != above_v || (slope_denominator(p, b.x, b.y) > 0.0) != above_v) {
            continue;
        }
        const double fa = slope_field(p, a);
        const double fb = slope_field(p, b);
        if (std::abs(fb - fa) > 0.05 * std::abs(f0) + 1e-3) continue;
        const double dx = b.x - a.x;
        if (!(std::abs(dx) > 1e-9 * pt.x)) return std::nullopt;
        return (fb - fa) / dx;
    }
    return std::nullopt;
}

}  // namespace

ConcavityAudit concavity_audit(const Parameters& p, const SlowManifold& m, std::span<const Vec2> starts, double t_end,
                         std::size_t samples_per_start, double h_band, std::size_t min_samples) {
    ConcavityAudit audit;
    for (std::size_t r = 0; r < audit.rows.size(); ++r) audit.rows[r].row = static_cast<ConcavityRow>(r);
    for (const Vec2& start : starts) {
        const Trajectory traj = integrate_time(p, start, t_end, {1e-10, 1e-200});
        for (std::size_t k = 0; k <= samples_per_start; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(samples_per_start);
            const double t = t_end * s * s;
            const Vec2 pt = traj.at(t);
            const double d = slope_denominator(p, pt.x, pt.y);
            if (!(pt.x > 0.0) || !(pt.y > 0.0) || std::abs(d) <= 1e-9 * (1.0 + pt.x)) {
                ++audit.skipped;
                continue;
            }
            ConcavityReport rep;
            std::optional<double> y2;
            try {
                rep = concavity_classify(p, pt, m);
                y2 = differenced_curvature(p, traj, t, t_end);
            } catch (const Error&) {
                ++audit.skipped;
                continue;
            }
            AuditRow& row = audit.rows[static_cast<std::size_t>(rep.row)];
            ++row.samples;
            if (std::abs(rep.h) <= h_band) {
                if (rep.expected != Concavity::Either) ++row.excluded;
                continue;
            }
            if (!y2 || *y2 == 0.0) {
                ++row.unresolved;
                continue;
            }
            const int observed = *y2 > 0.0 ? 1 : -1;
            if (observed != rep.observed_sign) ++row.model_disagreements;
            if (rep.expected == Concavity::Either) continue;
            ++row.checked;
            const int expected = rep.expected == Concavity::Up ? 1 : -1;
            if (observed != expected) ++row.mismatches;
        }
    }
    audit.pass = std::all_of(audit.rows.begin(), audit.rows.end(), [&](const AuditRow& r) {
        return r.samples >= min_samples && r.mismatches == 0 && r.model_disagreements == 0;
    });
    return audit;
}

}  // namespace mmphase
