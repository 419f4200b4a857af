#include "mmphase/isoclines.hpp"

#include <cmath>
#include <sstream>

#include "mmphase/error.hpp"

namespace mmphase {

double K(const Parameters& p, double c) {
    const double den = 1.0 + p.eps() * c;
    if (den == 0.0) {
        throw Error(ErrorKind::KPole, "K(c) has a pole at c = -1/eps");
    }
    return (1.0 + p.eps() * (1.0 - p.eta()) * c) / den;
}

double F(const Parameters& p, double x, double c) {
    // x / (K + x) with K's denominator cleared; vanishes at the pole of K.
    const double pole = 1.0 + p.eps() * c;
    const double den = 1.0 + p.eps() * (1.0 - p.eta()) * c + x * pole;
    if (den == 0.0) {
        std::ostringstream msg;
        msg << "isocline of slope " << c << " is singular at x=" << x << " (K(c) = -x)";
        throw Error(ErrorKind::SingularSlope, msg.str());
    }
    return x * pole / den;
}

double isocline_eval(const Parameters& p, const IsoclineId& id, double x) {
    switch (id.kind) {
        case IsoclineId::Kind::Horizontal: return horizontal_isocline(x);
        case IsoclineId::Kind::Vertical: return vertical_isocline(p, x);
        case IsoclineId::Kind::Alpha: return alpha_isocline(spectrum(p).sigma, x);
        case IsoclineId::Kind::Slope: return F(p, x, id.slope);
    }
    return 0.0;
}

double isocline_derivative(const Parameters& p, const IsoclineId& id, double x) {
    // d/dx x/(k + x) = k/(k + x)^2
    double k = 0.0;
    switch (id.kind) {
        case IsoclineId::Kind::Horizontal: k = 1.0; break;
        case IsoclineId::Kind::Vertical: k = 1.0 - p.eta(); break;
        case IsoclineId::Kind::Alpha: k = 1.0 / spectrum(p).sigma; break;
        case IsoclineId::Kind::Slope:
            if (1.0 + p.eps() * id.slope == 0.0) {
                return 0.0;
            }
            k = K(p, id.slope);
            break;
    }
    return k / ((k + x) * (k + x));
}

double u(const Parameters& p, double c) {
    if (!(c > 0.0)) {
        throw Error(ErrorKind::Domain, "u(c) is defined for c > 0 only");
    }
    return c * K(p, c);
}

double isocline_residual(double x, double w, double w_prime) {
    return w * (w - 1.0) + x * w_prime;
}

std::string_view to_string(Region r) noexcept {
    switch (r) {
        case Region::BelowH: return "below_h";
        case Region::Gamma1: return "gamma1";
        case Region::AlphaToV: return "alpha_to_v";
        case Region::OnV: return "on_v";
        case Region::VToOne: return "v_to_one";
        case Region::AtOrAboveOne: return "at_or_above_one";
    }
    return "unknown";
}

RegionLabel classify_region(const Parameters& p, Vec2 pt, double tolerance) {
    const double x = pt.x;
    const double y = pt.y;
    const double h = horizontal_isocline(x);
    const double a = alpha_isocline(spectrum(p).sigma, x);
    const double v = vertical_isocline(p, x);

    RegionLabel label;
    if (y >= 1.0 - tolerance) {
        label.region = Region::AtOrAboveOne;
    } else if (y < h - tolerance) {
        label.region = Region::BelowH;
    } else if (y <= a + tolerance) {
        label.region = Region::Gamma1;
    } else if (std::abs(y - v) <= tolerance) {
        label.region = Region::OnV;
    } else if (y < v) {
        label.region = Region::AlphaToV;
    } else {
        label.region = Region::VToOne;
    }
    label.in_gamma0 = x > 0.0 && y >= h - tolerance && y <= v + tolerance;
    label.in_gamma1 = x > 0.0 && y >= h - tolerance && y <= a + tolerance;
    return label;
}

}  // namespace mmphase
