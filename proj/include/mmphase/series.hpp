#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmphase/kinetics.hpp"

namespace mmphase {

/// Truncated power series sum sigma_n x^n of solutions entering the origin.
struct OriginSeries {
    std::vector<double> coeffs;  // sigma_0 .. sigma_valid_order, all defined
    std::size_t requested_order = 0;
    std::size_t valid_order = 0;  // highest index whose coefficient is defined
    double kappa = 0.0;
    bool resonant = false;
    /// Index of the vanishing denominator when resonant (equals round(kappa)).
    std::size_t resonant_order = 0;
    /// Smallest |denominator| met while building the defined coefficients.
    double min_denominator = 0.0;
    bool ill_conditioned = false;
};

/// Asymptotic series sum rho_n x^-n of the slow manifold as x -> infinity.
struct InfinitySeries {
    std::vector<double> coeffs;  // rho_0 .. rho_N
};

struct TailFit {
    double C = 0.0;
    double kappa_fit = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double residual_norm = 0.0;  // RMS of the log-log fit residuals
    std::size_t samples = 0;
};

/// A denominator counts as vanished below this multiple of (1/eps + n).
inline constexpr double kVanishingDenominator = 1e-10;
/// Minimum denominator (relative to 1/eps + n) before a conditioning warning.
inline constexpr double kIllConditionedDenominator = 1e-4;

/// sigma_0 = 0, sigma_1 = sigma, higher orders by substituting the series into
/// the phase equation. Stops at the first vanishing denominator (resonance).
OriginSeries origin_coefficients(const Parameters& p, std::size_t order);

namespace detail {

/// rho_n recursion, generic in the scalar so tests can run it on exact rationals.
template <class T>
std::vector<T> infinity_recursion(const T& eps, const T& eta, std::size_t order) {
    std::vector<T> rho(order + 1);
    const T seed[3] = {T(1), T(-1), T(1)};
    for (std::size_t n = 0; n <= order && n < 3; ++n) {
        rho[n] = seed[n];
    }
    const T one_minus_eta = T(1) - eta;
    for (std::size_t n = 3; n <= order; ++n) {
        T acc = T(0);
        for (std::size_t i = 1; i <= n - 2; ++i) {
            acc += T(static_cast<long>(i)) * rho[i] * (rho[n - i - 1] + one_minus_eta * rho[n - i - 2]);
        }
        rho[n] = -rho[n - 1] + eps * acc;
    }
    return rho;
}

}  // namespace detail

InfinitySeries infinity_coefficients(const Parameters& p, std::size_t order);

/// Horner evaluation of all defined origin coefficients.
double eval_origin(const OriginSeries& s, double x);
/// d/dx of eval_origin.
double eval_origin_derivative(const OriginSeries& s, double x);

/// Horner evaluation in 1/x. Throws Error{Domain} for x <= 0.
double eval_infinity(const InfinitySeries& s, double x);
double eval_infinity_derivative(const InfinitySeries& s, double x);

/// Least-squares power law r = C x^kappa on (log x, log|r|).
/// Throws Error{InsufficientSamples} below 8 samples, Error{Domain} for x <= 0
/// or r == 0, Error{SignChange} when r changes sign.
TailFit fit_tail(std::span<const double> x, std::span<const double> r);

/// Widest dyadic window [a, 2^k a] of the samples on which r keeps one sign and
/// log|r| is straight in log x to `straightness` RMS, with at least
/// `min_samples` points; ties go to the smaller RMS. Throws
/// Error{InsufficientPrecision} when no window qualifies.
TailFit fit_tail_auto(std::span<const double> x, std::span<const double> r,
                      std::size_t min_samples = 8, double straightness = 0.01);

}  // namespace mmphase
