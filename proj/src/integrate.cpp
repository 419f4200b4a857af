#include "mmphase/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "mmphase/error.hpp"
#include "mmphase/isoclines.hpp"

namespace mmphase {

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::CrossH: return "cross_h";
        case EventKind::CrossV: return "cross_v";
        case EventKind::CrossAlpha: return "cross_alpha";
        case EventKind::CrossOne: return "cross_one";
        case EventKind::EnterGamma0: return "enter_gamma0";
        case EventKind::EnterGamma1: return "enter_gamma1";
    }
    return "unknown";
}

namespace {

template <class Sample>
std::size_t locate(const std::vector<Sample>& samples, double t, auto time_of) {
    const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                     [&](double v, const Sample& s) { return v < time_of(s); });
    if (it == samples.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - samples.begin()) - 1, samples.size() - 2);
}

double hermite(double s, double h, double y0, double f0, double y1, double f1) {
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y0 + h * h10 * f0 + h01 * y1 + h * h11 * f1;
}

/// Bisection on a predicate that is false at t0 and true at t1.
template <class Pred>
double bisect_transition(double t0, double t1, Pred&& pred) {
    double lo = t0, hi = t1;
    while (std::abs(hi - lo) > kEventTimeTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (pred(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Vec2 Trajectory::at(double t) const {
    if (samples.size() == 1) return samples.front().point;
    t = std::clamp(t, samples.front().t, samples.back().t);
    const std::size_t i = locate(samples, t, [](const TrajectorySample& s) { return s.t; });
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    return {hermite(s, h, a.point.x, a.velocity.x, b.point.x, b.velocity.x),
            hermite(s, h, a.point.y, a.velocity.y, b.point.y, b.velocity.y)};
}

std::optional<Event> Trajectory::first_event(EventKind kind) const {
    for (const auto& e : events) {
        if (e.kind == kind) return e;
    }
    return std::nullopt;
}

Trajectory integrate_time(const Parameters& p, Vec2 x0, double t_end, const Tolerance& tol) {
    if (!(t_end > 0.0)) {
        throw Error(ErrorKind::Domain, "integrate_time needs t_end > 0");
    }
    if (!(tol.rel >= 1e-13) || !(tol.abs > 0.0)) {
        throw Error(ErrorKind::Domain, "integrate_time needs tol.rel >= 1e-13 and tol.abs > 0");
    }
    const double sigma = spectrum(p).sigma;

    using S = ode::State<2>;
    auto rhs = [&](double, const S& y) {
        const Vec2 v = rhs_time(p, {y[0], y[1]});
        return S{v.x, v.y};
    };

    struct Boundary {
        EventKind kind;
        double (*g)(const Parameters&, double, double, double);
    };
    static constexpr std::array<Boundary, 4> boundaries{{
        {EventKind::CrossH, [](const Parameters&, double, double x, double y) { return y - horizontal_isocline(x); }},
        {EventKind::CrossV, [](const Parameters& pp, double, double x, double y) { return y - vertical_isocline(pp, x); }},
        {EventKind::CrossAlpha, [](const Parameters&, double s, double x, double y) { return y - alpha_isocline(s, x); }},
        {EventKind::CrossOne, [](const Parameters&, double, double, double y) { return y - 1.0; }},
    }};

    auto membership = [&](Vec2 pt) {
        const RegionLabel l = classify_region(p, pt, 0.0);
        return std::array<bool, 2>{l.in_gamma0, l.in_gamma1};
    };

    Trajectory traj;
    traj.samples.push_back({0.0, x0, rhs_time(p, x0)});
    {
        const auto m = membership(x0);
        if (m[0]) traj.events.push_back({EventKind::EnterGamma0, 0.0, x0});
        if (m[1]) traj.events.push_back({EventKind::EnterGamma1, 0.0, x0});
    }

    auto on_step = [&](const ode::Step<2>& step) {
        const Vec2 a{step.y0[0], step.y0[1]};
        const Vec2 b{step.y1[0], step.y1[1]};
        auto dense = [&](double t) {
            const S y = step.dense(t);
            return Vec2{y[0], y[1]};
        };
        std::vector<Event> found;
        for (const auto& bd : boundaries) {
            const double ga = bd.g(p, sigma, a.x, a.y);
            const double gb = bd.g(p, sigma, b.x, b.y);
            if (ga == 0.0 || ((ga > 0.0) == (gb > 0.0) && gb != 0.0)) continue;
            const bool start_positive = ga > 0.0;
            const double t = bisect_transition(step.t0, step.t1, [&](double tt) {
                const Vec2 q = dense(tt);
                const double g = bd.g(p, sigma, q.x, q.y);
                return g == 0.0 || (g > 0.0) != start_positive;
            });
            found.push_back({bd.kind, t, dense(t)});
        }
        const auto ma = membership(a);
        const auto mb = membership(b);
        for (int k = 0; k < 2; ++k) {
            if (ma[k] || !mb[k]) continue;
            const double t = bisect_transition(step.t0, step.t1, [&](double tt) { return membership(dense(tt))[k]; });
            found.push_back({k == 0 ? EventKind::EnterGamma0 : EventKind::EnterGamma1, t, dense(t)});
        }
        std::sort(found.begin(), found.end(), [](const Event& l, const Event& r) { return l.t < r.t; });
        traj.events.insert(traj.events.end(), found.begin(), found.end());
        traj.samples.push_back({step.t1, b, Vec2{step.f1[0], step.f1[1]}});
        return true;
    };

    const ode::Outcome out = ode::integrate<2>(rhs, 0.0, S{x0.x, x0.y}, t_end, tol, {}, on_step);
    traj.stats = {out.stats.accepted, out.stats.rejected, out.stats.max_error};
    if (out.underflow) {
        std::ostringstream msg;
        msg << "step size underflow at t=" << out.t_reached
            << "; the time form is stiff for small eps, use the phase form instead";
        throw Error(ErrorKind::StepUnderflow, msg.str());
    }
    return traj;
}

PhaseCurve integrate_phase(const Parameters& p, Vec2 start, double x_end, const Tolerance& tol,
                           std::span<const double> output_grid) {
    auto guard_hit = [&](double x, double y, double factor) {
        return std::abs(slope_denominator(p, x, y)) < factor * (1.0 + std::abs(x));
    };
    if (guard_hit(start.x, start.y, kVGuard)) {
        std::ostringstream msg;
        msg << "phase integration cannot start on the vertical isocline at (" << start.x << ", " << start.y << ")";
        throw Error(ErrorKind::SingularSlope, msg.str());
    }
    const double dir = x_end >= start.x ? 1.0 : -1.0;

    std::vector<double> stops;
    for (double g : output_grid) {
        if (dir * (g - start.x) > 0.0 && dir * (x_end - g) >= 0.0) stops.push_back(g);
    }
    std::sort(stops.begin(), stops.end());
    if (dir < 0.0) std::reverse(stops.begin(), stops.end());
    const bool grid_mode = !output_grid.empty();

    using S = ode::State<1>;
    auto rhs = [&](double x, const S& y) {
        return S{slope_numerator(x, y[0]) / (p.eps() * slope_denominator(p, x, y[0]))};
    };

    std::vector<double> xs{start.x}, ys{start.y};
    std::vector<double> ds{rhs(start.x, S{start.y})[0]};
    PhaseCurve result;
    std::size_t grid_index = 0;
    double last_y = start.y;

    auto on_step = [&](const ode::Step<1>& step) {
        bool keep = !grid_mode;
        while (grid_index < stops.size() && dir * (stops[grid_index] - step.t1) <= 0.0) {
            if (stops[grid_index] == step.t1) keep = true;
            ++grid_index;
        }
        last_y = step.y1[0];
        const bool stop = guard_hit(step.t1, step.y1[0], kVGuard);
        if (keep || stop || step.t1 == x_end) {
            xs.push_back(step.t1);
            ys.push_back(step.y1[0]);
            ds.push_back(step.f1[0]);
        }
        if (stop) {
            result.stopped_near_v = true;
            return false;
        }
        return true;
    };

    const ode::Outcome out = ode::integrate<1>(rhs, start.x, S{start.y}, x_end, tol, stops, on_step);
    result.stats = {out.stats.accepted, out.stats.rejected, out.stats.max_error};
    result.x_reached = out.t_reached;
    if (out.underflow) {
        if (guard_hit(out.t_reached, last_y, kVApproach)) {
            result.stopped_near_v = true;
        } else {
            std::ostringstream msg;
            msg << "phase integration step size underflow at x=" << out.t_reached;
            throw Error(ErrorKind::StepUnderflow, msg.str());
        }
    }
    if (dir < 0.0) {
        std::reverse(xs.begin(), xs.end());
        std::reverse(ys.begin(), ys.end());
        std::reverse(ds.begin(), ds.end());
    }
    if (xs.size() >= 2) {
        result.curve = Curve::hermite(std::move(xs), std::move(ys), std::move(ds));
    }
    return result;
}

SpeciesState SpeciesTrajectory::at(double t) const {
    if (tau.size() == 1) return states.front();
    t = std::clamp(t, tau.front(), tau.back());
    const auto it = std::upper_bound(tau.begin(), tau.end(), t);
    std::size_t i = it == tau.begin() ? 0 : static_cast<std::size_t>(it - tau.begin()) - 1;
    i = std::min(i, tau.size() - 2);
    const double h = tau[i + 1] - tau[i];
    const double s = (t - tau[i]) / h;
    SpeciesState out;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = hermite(s, h, states[i][k], rates[i][k], states[i + 1][k], rates[i + 1][k]);
    }
    return out;
}

SpeciesTrajectory integrate_mass_action(const RateConstants& rc, double tau_end, const Tolerance& tol) {
    rc.validate();
    if (!(tau_end > 0.0)) {
        throw Error(ErrorKind::Domain, "integrate_mass_action needs tau_end > 0");
    }
    const SpeciesState start{rc.s0, rc.e0, 0.0, 0.0};
    auto rhs = [&](double, const SpeciesState& y) { return mass_action_rhs(rc, y); };

    SpeciesTrajectory traj;
    traj.tau.push_back(0.0);
    traj.states.push_back(start);
    traj.rates.push_back(mass_action_rhs(rc, start));
    auto on_step = [&](const ode::Step<4>& step) {
        traj.tau.push_back(step.t1);
        traj.states.push_back(step.y1);
        traj.rates.push_back(step.f1);
        return true;
    };
    const ode::Outcome out = ode::integrate<4>(rhs, 0.0, start, tau_end, tol, {}, on_step);
    traj.stats = {out.stats.accepted, out.stats.rejected, out.stats.max_error};
    if (out.underflow) {
        throw Error(ErrorKind::StepUnderflow, "mass-action integration step size underflow");
    }
    return traj;
}

}  // namespace mmphase
