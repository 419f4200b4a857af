#include "mmphase/kinetics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mmphase/error.hpp"

namespace mmphase {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidParameters: return "invalid_parameters";
        case ErrorKind::InadmissibleEta: return "inadmissible_eta";
        case ErrorKind::SingularSlope: return "singular_slope";
        case ErrorKind::KPole: return "k_pole";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::StepUnderflow: return "step_underflow";
        case ErrorKind::InsufficientSamples: return "insufficient_samples";
        case ErrorKind::SignChange: return "sign_change";
        case ErrorKind::UnsupportedResonance: return "unsupported_resonance";
        case ErrorKind::InsufficientPrecision: return "insufficient_precision";
        case ErrorKind::Construction: return "construction";
        case ErrorKind::Inconclusive: return "inconclusive";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

void RateConstants::validate() const {
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(k_minus1 >= 0.0) || !(e0 > 0.0)) {
        std::ostringstream msg;
        msg << "rate constants require k1 > 0, k2 > 0, k_minus1 >= 0, e0 > 0 (got k1=" << k1
            << ", k_minus1=" << k_minus1 << ", k2=" << k2 << ", e0=" << e0 << ")";
        throw Error(ErrorKind::InvalidParameters, msg.str());
    }
}

Parameters::Parameters(double eps, double eta) : eps_(eps), eta_(eta) {
    if (!(eps > 0.0) || !std::isfinite(eps) || !(eta > 0.0) || !(eta < 1.0)) {
        std::ostringstream msg;
        msg << "parameters require eps > 0 and 0 < eta < 1 (got eps=" << eps << ", eta=" << eta << ")";
        throw Error(ErrorKind::InvalidParameters, msg.str());
    }
}

Nondimensionalization nondimensionalize(const RateConstants& rc) {
    rc.validate();
    if (rc.k_minus1 == 0.0) {
        throw Error(ErrorKind::InadmissibleEta, "k_minus1 = 0 gives eta = 1, outside 0 < eta < 1");
    }
    const double kk = rc.k_minus1 + rc.k2;
    return {Parameters(rc.k1 * rc.e0 / kk, rc.k2 / kk),
            Scaling{rc.k1 / kk, 1.0 / rc.e0, rc.k1 * rc.e0}};
}

Vec2 rhs_time(const Parameters& p, Vec2 pt) {
    return {slope_denominator(p, pt.x, pt.y), p.inv_eps() * slope_numerator(pt.x, pt.y)};
}

bool on_vertical_isocline(const Parameters& p, double x, double y) {
    const double d = slope_denominator(p, x, y);
    const double scale = std::abs(x) + std::abs((1.0 - p.eta()) * y) + std::abs(x * y);
    return std::abs(d) <= 4.0 * std::numeric_limits<double>::epsilon() * scale;
}

double slope_field(const Parameters& p, Vec2 pt) {
    if (on_vertical_isocline(p, pt.x, pt.y)) {
        std::ostringstream msg;
        msg << "slope is singular on the vertical isocline at (" << pt.x << ", " << pt.y << ")";
        throw Error(ErrorKind::SingularSlope, msg.str());
    }
    return slope_numerator(pt.x, pt.y) / (p.eps() * slope_denominator(p, pt.x, pt.y));
}

Matrix2 linearization(const Parameters& p) {
    return {-1.0, 1.0 - p.eta(), p.inv_eps(), -p.inv_eps()};
}

Spectrum spectrum(const Parameters& p) {
    const double eps = p.eps();
    const double eta = p.eta();
    const double b = eps + 1.0;
    const double root = std::sqrt(b * b - 4.0 * eps * eta);

    Spectrum s;
    // lambda_minus has no cancellation; lambda_plus comes from the product
    // lambda_plus * lambda_minus = det A = eta / eps.
    s.lambda_minus = -(b + root) / (2.0 * eps);
    s.lambda_plus = -2.0 * eta / (b + root);
    s.kappa = (b + root) * (b + root) / (4.0 * eps * eta);
    s.sigma = (s.lambda_plus + 1.0) / (1.0 - eta);
    s.v_plus = {1.0 - eta, s.lambda_plus + 1.0};
    s.v_minus = {1.0 - eta, s.lambda_minus + 1.0};
    s.vhat_plus = {1.0 / eps, s.lambda_plus + 1.0};
    s.vhat_minus = {1.0 / eps, s.lambda_minus + 1.0};

    const double nearest = std::round(s.kappa);
    s.resonance.nearest_integer = static_cast<long>(nearest);
    s.resonance.distance = std::abs(s.kappa - nearest);
    s.resonance.resonant = nearest >= 2.0 && s.resonance.distance < kResonanceTolerance;
    s.resonance.near_resonant = nearest >= 2.0 && s.resonance.distance < kNearResonanceTolerance;
    return s;
}

double eta_from_kappa(double eps, double kappa) {
    if (!(eps > 0.0) || !(kappa > 1.0)) {
        std::ostringstream msg;
        msg << "eta_from_kappa requires eps > 0 and kappa > 1 (got eps=" << eps << ", kappa=" << kappa << ")";
        throw Error(ErrorKind::Domain, msg.str());
    }
    const double eta = kappa * (eps + 1.0) * (eps + 1.0) / (eps * (kappa + 1.0) * (kappa + 1.0));
    if (!(eta > 0.0 && eta < 1.0)) {
        std::ostringstream msg;
        msg << "kappa=" << kappa << " at eps=" << eps << " gives inadmissible eta=" << eta;
        throw Error(ErrorKind::InadmissibleEta, msg.str());
    }
    return eta;
}

Vec2 linear_solution(const Parameters& p, Vec2 x0, double t) {
    const Spectrum s = spectrum(p);
    const double c_plus = dot(s.vhat_plus, x0) / dot(s.vhat_plus, s.v_plus);
    const double c_minus = dot(s.vhat_minus, x0) / dot(s.vhat_minus, s.v_minus);
    return (c_minus * std::exp(s.lambda_minus * t)) * s.v_minus +
           (c_plus * std::exp(s.lambda_plus * t)) * s.v_plus;
}

SpeciesState mass_action_rhs(const RateConstants& rc, const SpeciesState& state) {
    const auto [s, e, c, p] = state;
    (void)p;
    const double binding = rc.k1 * s * e;
    return {rc.k_minus1 * c - binding,
            (rc.k_minus1 + rc.k2) * c - binding,
            binding - (rc.k_minus1 + rc.k2) * c,
            rc.k2 * c};
}

}  // namespace mmphase
