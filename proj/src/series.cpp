#include "mmphase/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmphase/error.hpp"

namespace mmphase {

OriginSeries origin_coefficients(const Parameters& p, std::size_t order) {
    if (order < 1) {
        throw Error(ErrorKind::Domain, "origin series needs order >= 1");
    }
    const Spectrum spec = spectrum(p);
    const double inv_eps = p.inv_eps();
    const double q = 1.0 - p.eta();

    OriginSeries s;
    s.requested_order = order;
    s.kappa = spec.kappa;
    s.min_denominator = std::numeric_limits<double>::infinity();
    s.coeffs = {0.0, spec.sigma};

    const double s1 = spec.sigma;
    for (std::size_t n = 2; n <= order; ++n) {
        const double nd = static_cast<double>(n);
        const double den = inv_eps + q * (nd + 1.0) * s1 - nd;
        const double scale = inv_eps + nd;
        if (std::abs(den) < kVanishingDenominator * scale) {
            s.resonant = true;
            s.resonant_order = n;
            break;
        }
        s.min_denominator = std::min(s.min_denominator, std::abs(den));
        if (std::abs(den) < kIllConditionedDenominator * scale) {
            s.ill_conditioned = true;
        }
        const auto& c = s.coeffs;
        double acc = ((nd - 1.0) * s1 + inv_eps) * c[n - 1];
        for (std::size_t k = 2; k + 1 <= n; ++k) {
            acc += (static_cast<double>(n - k) * c[n - k] +
                    q * static_cast<double>(n - k + 1) * c[n - k + 1]) *
                   c[k];
        }
        s.coeffs.push_back(-acc / den);
    }
    s.valid_order = s.coeffs.size() - 1;
    return s;
}

InfinitySeries infinity_coefficients(const Parameters& p, std::size_t order) {
    return {detail::infinity_recursion<double>(p.eps(), p.eta(), order)};
}

double eval_origin(const OriginSeries& s, double x) {
    double acc = 0.0;
    for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

double eval_origin_derivative(const OriginSeries& s, double x) {
    double acc = 0.0;
    for (std::size_t n = s.coeffs.size(); n-- > 1;) {
        acc = acc * x + static_cast<double>(n) * s.coeffs[n];
    }
    return acc;
}

double eval_infinity(const InfinitySeries& s, double x) {
    if (!(x > 0.0)) {
        throw Error(ErrorKind::Domain, "infinity series needs x > 0");
    }
    const double w = 1.0 / x;
    double acc = 0.0;
    for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) {
        acc = acc * w + *it;
    }
    return acc;
}

double eval_infinity_derivative(const InfinitySeries& s, double x) {
    if (!(x > 0.0)) {
        throw Error(ErrorKind::Domain, "infinity series needs x > 0");
    }
    // d/dx sum rho_n x^-n = -sum n rho_n x^-(n+1)
    const double w = 1.0 / x;
    double acc = 0.0;
    for (std::size_t n = s.coeffs.size(); n-- > 1;) {
        acc = acc * w + static_cast<double>(n) * s.coeffs[n];
    }
    return -acc * w * w;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

LineFit least_squares(std::span<const double> u, std::span<const double> v) {
    const double n = static_cast<double>(u.size());
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= n;
    mv /= n;
    double suu = 0.0, suv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suu += (u[i] - mu) * (u[i] - mu);
        suv += (u[i] - mu) * (v[i] - mv);
    }
    LineFit fit;
    fit.slope = suv / suu;
    fit.intercept = mv - fit.slope * mu;
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = v[i] - (fit.intercept + fit.slope * u[i]);
        ss += e * e;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

}  // namespace

TailFit fit_tail(std::span<const double> x, std::span<const double> r) {
    if (x.size() != r.size()) {
        throw Error(ErrorKind::Domain, "fit_tail: x and r differ in length");
    }
    if (x.size() < 8) {
        std::ostringstream msg;
        msg << "fit_tail needs at least 8 samples, got " << x.size();
        throw Error(ErrorKind::InsufficientSamples, msg.str());
    }
    const double sign = r[0] > 0.0 ? 1.0 : -1.0;
    std::vector<double> lx(x.size()), lr(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || r[i] == 0.0 || !std::isfinite(r[i])) {
            throw Error(ErrorKind::Domain, "fit_tail needs x > 0 and finite nonzero r");
        }
        if ((r[i] > 0.0 ? 1.0 : -1.0) != sign) {
            throw Error(ErrorKind::SignChange, "residual changes sign inside the fit window");
        }
        lx[i] = std::log(x[i]);
        lr[i] = std::log(std::abs(r[i]));
    }
    const LineFit line = least_squares(lx, lr);
    TailFit fit;
    fit.kappa_fit = line.slope;
    fit.C = sign * std::exp(line.intercept);
    fit.residual_norm = line.rms;
    fit.window_lo = *std::min_element(x.begin(), x.end());
    fit.window_hi = *std::max_element(x.begin(), x.end());
    fit.samples = x.size();
    return fit;
}

TailFit fit_tail_auto(std::span<const double> x, std::span<const double> r,
                      std::size_t min_samples, double straightness) {
    if (x.size() != r.size()) {
        throw Error(ErrorKind::Domain, "fit_tail_auto: x and r differ in length");
    }
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs, rs;
    for (std::size_t i : order) {
        if (x[i] > 0.0 && r[i] != 0.0 && std::isfinite(r[i])) {
            xs.push_back(x[i]);
            rs.push_back(r[i]);
        }
    }
    if (xs.size() < min_samples) {
        throw Error(ErrorKind::InsufficientPrecision, "too few usable residual samples for a tail fit");
    }
    const int max_octaves = static_cast<int>(std::floor(std::log2(xs.back() / xs.front()) + 1e-12));
    for (int k = max_octaves; k >= 1; --k) {
        const double ratio = std::ldexp(1.0, k);
        bool found = false;
        TailFit best;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double hi = xs[i] * ratio * (1.0 + 1e-12);
            if (xs[i] * ratio > xs.back() * (1.0 + 1e-12)) break;  // window would be truncated
            std::size_t j = i;
            while (j < xs.size() && xs[j] <= hi) ++j;
            if (j - i < min_samples) continue;
            const std::span<const double> wx(xs.data() + i, j - i);
            const std::span<const double> wr(rs.data() + i, j - i);
            const bool one_sign = std::all_of(wr.begin(), wr.end(), [&](double v) { return (v > 0.0) == (wr[0] > 0.0); });
            if (!one_sign) continue;
            const TailFit fit = fit_tail(wx, wr);
            if (fit.residual_norm <= straightness && (!found || fit.residual_norm < best.residual_norm)) {
                best = fit;
                found = true;
            }
        }
        if (found) return best;
    }
    throw Error(ErrorKind::InsufficientPrecision, "no dyadic window gives a straight log-log tail");
}

}  // namespace mmphase
