#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mmphase/curve.hpp"
#include "mmphase/dopri.hpp"
#include "mmphase/kinetics.hpp"

namespace mmphase {

using ode::Tolerance;

enum class EventKind { CrossH, CrossV, CrossAlpha, CrossOne, EnterGamma0, EnterGamma1 };

std::string_view to_string(EventKind kind) noexcept;

struct Event {
    EventKind kind = EventKind::CrossH;
    double t = 0.0;
    Vec2 point;
};

struct TrajectorySample {
    double t = 0.0;
    Vec2 point;
    Vec2 velocity;
};

struct IntegrationStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    double max_error = 0.0;
};

/// Samples at every accepted step; consecutive samples carry enough data for
/// the cubic Hermite dense output used by `at`.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<Event> events;
    IntegrationStats stats;

    /// Dense output; t is clamped to the integrated range.
    Vec2 at(double t) const;
    std::optional<Event> first_event(EventKind kind) const;
};

/// Event times are refined by bisection on the dense output to this width.
inline constexpr double kEventTimeTolerance = 1e-12;

/// Integrates the time-form system from x0 over [0, t_end]. Region entry
/// events are logged at t = 0 when the start already lies in Gamma0/Gamma1.
/// Throws Error{Domain} for t_end <= 0 or tol.rel < 1e-13 and
/// Error{StepUnderflow} when the step size collapses.
Trajectory integrate_time(const Parameters& p, Vec2 x0, double t_end, const Tolerance& tol = {});

struct PhaseCurve {
    Curve curve;
    bool stopped_near_v = false;  // flagged partial result
    double x_reached = 0.0;
    IntegrationStats stats;
};

/// |denominator| below kVGuard * (1 + x) stops phase integration.
inline constexpr double kVGuard = 1e-10;
/// A step-size collapse within kVApproach * (1 + x) of V is also reported as a
/// V-proximity stop: the square-root singularity there cannot be resolved
/// down to kVGuard in binary64.
inline constexpr double kVApproach = 1e-5;

/// Integrates y' = f(x, y) from `start` to x_end in either direction. When
/// `output_grid` is non-empty the curve nodes are exactly those grid points
/// (plus the start) inside the integrated range; otherwise they are the
/// accepted steps. Throws Error{SingularSlope} when start lies on V.
PhaseCurve integrate_phase(const Parameters& p, Vec2 start, double x_end, const Tolerance& tol = {},
                           std::span<const double> output_grid = {});

struct SpeciesTrajectory {
    std::vector<double> tau;
    std::vector<SpeciesState> states;
    std::vector<SpeciesState> rates;
    IntegrationStats stats;

    SpeciesState at(double t) const;
};

/// Integrates the dimensional four-species mass-action system from
/// (s0, e0, 0, 0) over [0, tau_end].
SpeciesTrajectory integrate_mass_action(const RateConstants& rc, double tau_end, const Tolerance& tol = {});

}  // namespace mmphase
