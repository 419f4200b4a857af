#pragma once

// Dormand-Prince 5(4) embedded pair with PI step-size control and cubic
// Hermite dense output. Header-only so every state dimension gets its own
// instantiation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace mmphase::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Tolerance {
    double rel = 1e-10;
    double abs = 1e-12;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
    double max_error = 0.0;  // largest normalized error estimate among accepted steps
};

/// One accepted step together with the data for its Hermite interpolant.
template <std::size_t N>
struct Step {
    double t0 = 0.0;
    double t1 = 0.0;
    State<N> y0{};
    State<N> y1{};
    State<N> f0{};
    State<N> f1{};

    State<N> dense(double t) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        const double h10 = s * (1.0 - s) * (1.0 - s);
        const double h01 = s * s * (3.0 - 2.0 * s);
        const double h11 = s * s * (s - 1.0);
        State<N> out;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
        }
        return out;
    }
};

struct Outcome {
    StepStats stats;
    double t_reached = 0.0;
    bool completed = false;   // reached t_end
    bool stopped = false;     // observer asked to stop
    bool underflow = false;   // step size fell below the floor
};

namespace detail {

template <std::size_t N>
double error_norm(const State<N>& err, const State<N>& y0, const State<N>& y1, const Tolerance& tol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = tol.abs + tol.rel * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = err[i] / sc;
        acc += e * e;
    }
    const double r = std::sqrt(acc / static_cast<double>(N));
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

template <std::size_t N>
bool all_finite(const State<N>& v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t_end (either direction). Steps are
/// clipped so that every value in `stops` (ordered along the direction of
/// integration) is hit exactly. `on_step(const Step<N>&)` is called after every
/// accepted step and returns false to stop early. A rhs returning non-finite
/// values rejects the trial step.
template <std::size_t N, class Rhs, class OnStep>
Outcome integrate(Rhs&& rhs, double t0, State<N> y0, double t_end, const Tolerance& tol,
                  std::span<const double> stops, OnStep&& on_step) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    constexpr double safety = 0.9;
    constexpr double beta = 0.04;
    constexpr double expo = 0.2 - 0.75 * beta;
    constexpr double grow_max = 10.0;
    constexpr double shrink_max = 5.0;

    Outcome out;
    out.t_reached = t0;
    const double span = t_end - t0;
    if (span == 0.0) {
        out.completed = true;
        return out;
    }
    const double dir = span > 0.0 ? 1.0 : -1.0;
    const double h_floor = 1e-15 * std::abs(span);

    auto eval = [&](double t, const State<N>& y) {
        ++out.stats.evaluations;
        return rhs(t, y);
    };

    State<N> f0 = eval(t0, y0);

    // Initial step (Hairer, Norsett & Wanner, II.4).
    double h;
    {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = tol.abs + tol.rel * std::abs(y0[i]);
            d0 += (y0[i] / sc) * (y0[i] / sc);
            d1 += (f0[i] / sc) * (f0[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, std::abs(span));
        State<N> y1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + dir * h0 * f0[i];
        const State<N> f1 = eval(t0 + dir * h0, y1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = tol.abs + tol.rel * std::abs(y0[i]);
            d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
        }
        d2 = std::sqrt(d2 / N) / h0;
        if (!std::isfinite(d2)) d2 = 1e10 / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        h = std::min(100.0 * h0, h1);
        h = std::min(h, std::abs(span));
    }

    std::size_t next_stop = 0;
    auto skip_passed_stops = [&](double t) {
        while (next_stop < stops.size() && dir * (stops[next_stop] - t) <= 0.0) ++next_stop;
    };
    skip_passed_stops(t0);

    double t = t0;
    State<N> y = y0;
    double err_old = 1e-4;
    bool last_rejected = false;

    while (true) {
        double target = t_end;
        if (next_stop < stops.size() && dir * (stops[next_stop] - t_end) < 0.0) {
            target = stops[next_stop];
        }
        const double remaining = std::abs(target - t);
        const double h_proposed = h;
        bool clipped = false;
        double h_try = h;
        if (h_try >= remaining) {
            h_try = remaining;
            clipped = true;
        }
        const double floor_here = std::max(h_floor, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
        if (h_try < floor_here && !clipped) {
            out.underflow = true;
            out.t_reached = t;
            return out;
        }
        const double hs = dir * h_try;

        State<N> k2, k3, k4, k5, k6, k7, ys, y_new;
        for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * a21 * f0[i];
        k2 = eval(t + c2 * hs, ys);
        for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * (a31 * f0[i] + a32 * k2[i]);
        k3 = eval(t + c3 * hs, ys);
        for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = eval(t + c4 * hs, ys);
        for (std::size_t i = 0; i < N; ++i)
            ys[i] = y[i] + hs * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = eval(t + c5 * hs, ys);
        for (std::size_t i = 0; i < N; ++i)
            ys[i] = y[i] + hs * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = eval(t + hs, ys);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y[i] + hs * (a71 * f0[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        const double t_new = clipped ? target : t + hs;
        k7 = eval(t_new, y_new);

        State<N> err;
        for (std::size_t i = 0; i < N; ++i) {
            err[i] = hs * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        }
        double err_norm = detail::error_norm(err, y, y_new, tol);
        if (!detail::all_finite(y_new) || !detail::all_finite(k7)) {
            err_norm = std::numeric_limits<double>::infinity();
        }

        if (err_norm <= 1.0) {
            const double fac11 = std::pow(err_norm, expo);
            double fac = fac11 / std::pow(err_old, beta);
            fac = std::clamp(fac / safety, 1.0 / grow_max, shrink_max);
            double h_new = h_try / fac;
            if (last_rejected) h_new = std::min(h_new, h_try);
            // A step shortened to land on a stop says little about the scale.
            if (clipped) h_new = std::max(h_new, h_proposed);
            err_old = std::max(err_norm, 1e-4);
            last_rejected = false;

            ++out.stats.accepted;
            out.stats.max_error = std::max(out.stats.max_error, err_norm);
            Step<N> step{t, t_new, y, y_new, f0, k7};
            t = t_new;
            y = y_new;
            f0 = k7;
            out.t_reached = t;
            skip_passed_stops(t);
            if (!on_step(static_cast<const Step<N>&>(step))) {
                out.stopped = true;
                return out;
            }
            if (t == t_end) {
                out.completed = true;
                return out;
            }
            h = h_new;
        } else {
            ++out.stats.rejected;
            last_rejected = true;
            if (std::isfinite(err_norm)) {
                const double fac11 = std::pow(err_norm, expo);
                h = h_try / std::min(shrink_max, fac11 / safety);
            } else {
                h = h_try * 0.25;
            }
        }
    }
}

}  // namespace mmphase::ode
