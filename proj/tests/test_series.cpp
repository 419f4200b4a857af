#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <vector>

#include "exact_series.hpp"
#include "mmphase/curve.hpp"
#include "mmphase/error.hpp"
#include "mmphase/series.hpp"
#include "oracles.hpp"

using namespace mmphase;
using boost::multiprecision::cpp_rational;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an mmphase::Error");
    return ErrorKind::Io;
}

/// 50 admissible parameter pairs with |kappa - 2| > 0.05, half on each side of 2.
std::vector<Parameters> sign_law_grid() {
    std::vector<Parameters> below, above;
    const double kappas[] = {1.1, 1.3, 1.5, 1.7, 1.9, 2.1, 2.6, 3.5, 5.0, 8.0};
    for (double eps : log_grid(0.2, 5.0, 40)) {
        for (double kappa : kappas) {
            auto& side = kappa < 2.0 ? below : above;
            if (side.size() == 25) continue;
            try {
                side.emplace_back(eps, eta_from_kappa(eps, kappa));
            } catch (const Error&) {
            }
        }
    }
    below.insert(below.end(), above.begin(), above.end());
    return below;
}

}  // namespace

TEST_SUITE("series") {

TEST_CASE("origin coefficients at (5, 0.8)") {
    const OriginSeries s = origin_coefficients(Parameters(5.0, 0.8), 2);
    REQUIRE(s.coeffs.size() == 3);
    CHECK(s.coeffs[0] == 0.0);
    CHECK(s.coeffs[1] == doctest::Approx(4.2360680).epsilon(1e-8));
    CHECK(s.coeffs[2] == doctest::Approx(-25.3377).epsilon(1e-5));
    // independent oracle for sigma_2 at n = 2
    const double e = 0.2, sg = s.coeffs[1];
    CHECK(s.coeffs[2] == doctest::Approx(-((sg + e) * sg) / (e + 3 * 0.2 * sg - 2)).epsilon(1e-13));
    CHECK(eval_origin(s, 0.0) == 0.0);
    CHECK(eval_origin(s, 0.01) == doctest::Approx(0.03982691).epsilon(1e-7));
}

TEST_CASE("origin coefficients match the order-by-order oracle") {
    for (const Parameters& p : {Parameters(5.0, 0.8), Parameters(0.6, 0.9), Parameters(2.0, 0.3)}) {
        const OriginSeries s = origin_coefficients(p, 6);
        const auto ref = oracle::origin_series(p.eps(), p.eta(), static_cast<int>(s.valid_order), s.coeffs[1]);
        for (std::size_t n = 0; n <= s.valid_order; ++n) {
            CHECK(s.coeffs[n] == doctest::Approx(ref[n]).epsilon(1e-9));
        }
    }
}

TEST_CASE("resonance at kappa = 3") {
    const Parameters p(1.0, eta_from_kappa(1.0, 3.0));
    const OriginSeries s = origin_coefficients(p, 5);
    CHECK(s.resonant);
    CHECK(s.resonant_order == 3);
    CHECK(s.valid_order == 2);
    CHECK(s.coeffs.size() == 3);
    CHECK(kind_of([&] { origin_coefficients(p, 0); }) == ErrorKind::Domain);
}

TEST_CASE("near resonance is flagged as ill-conditioned") {
    const Parameters p(1.0, eta_from_kappa(1.0, 3.0 + 1e-6));
    const OriginSeries s = origin_coefficients(p, 5);
    CHECK_FALSE(s.resonant);
    CHECK(s.ill_conditioned);
}

TEST_CASE("infinity coefficients") {
    const InfinitySeries a = infinity_coefficients(Parameters(0.3, 0.4), 2);
    REQUIRE(a.coeffs.size() == 3);
    CHECK(a.coeffs[0] == 1.0);
    CHECK(a.coeffs[1] == -1.0);
    CHECK(a.coeffs[2] == 1.0);
    const InfinitySeries b = infinity_coefficients(Parameters(5.0, 0.8), 3);
    CHECK(b.coeffs[3] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(eval_infinity(b, 10.0) == doctest::Approx(0.913).epsilon(1e-14));
    const InfinitySeries one = infinity_coefficients(Parameters(5.0, 0.8), 1);
    CHECK(eval_infinity(one, 100.0) == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(eval_infinity(b, 1e15) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kind_of([&] { eval_infinity(b, 0.0); }) == ErrorKind::Domain);
    for (double x : {2.0, 10.0, 100.0}) {
        const double h = 1e-5 * x;
        const double fd = (eval_infinity(b, x + h) - eval_infinity(b, x - h)) / (2 * h);
        CHECK(eval_infinity_derivative(b, x) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("property: rho_n agrees with exact rational substitution up to n = 12") {
    const cpp_rational pairs[][2] = {{cpp_rational(5), cpp_rational(4, 5)},
                                     {cpp_rational(3, 5), cpp_rational(9, 10)},
                                     {cpp_rational(1, 10), cpp_rational(1, 2)},
                                     {cpp_rational(7, 3), cpp_rational(1, 7)}};
    for (const auto& pr : pairs) {
        const auto exact = oracle::infinity_by_substitution<cpp_rational>(pr[0], pr[1], 12);
        const Parameters p(static_cast<double>(pr[0]), static_cast<double>(pr[1]));
        const InfinitySeries s = infinity_coefficients(p, 12);
        for (std::size_t n = 0; n <= 12; ++n) {
            const double ref = static_cast<double>(exact[n]);
            CHECK(std::abs(s.coeffs[n] - ref) <= 1e-10 * std::abs(ref));
        }
    }
}

TEST_CASE("property: sigma_2 sign law") {
    const auto ps = sign_law_grid();
    REQUIRE(ps.size() == 50);
    int below = 0, above = 0;
    for (const Parameters& p : ps) {
        const double kappa = spectrum(p).kappa;
        const double s2 = origin_coefficients(p, 2).coeffs[2];
        if (kappa < 2.0) {
            ++below;
            CHECK(s2 > 0.0);
        } else {
            ++above;
            CHECK(s2 < 0.0);
        }
    }
    CHECK(below == 25);
    CHECK(above == 25);
}

TEST_CASE("property: truncated origin series satisfies the equation to order N") {
    // At (5, 0.8) the coefficients grow by about 5 per order and the residual
    // only settles onto x^N below 1e-3.
    const std::pair<Parameters, double> cases[] = {
        {Parameters(5.0, 0.8), 1e-3}, {Parameters(0.6, 0.9), 1e-2}, {Parameters(1.0, 0.95), 1e-2}};
    for (const auto& [p, x_hi] : cases) {
        const double kappa = spectrum(p).kappa;
        const std::size_t N = std::min<std::size_t>(4, static_cast<std::size_t>(std::floor(kappa)));
        const OriginSeries s = origin_coefficients(p, N);
        std::vector<double> xs, rs;
        for (double x : log_grid(1e-4, x_hi, 30)) {
            const double y = eval_origin(s, x);
            xs.push_back(x);
            rs.push_back(eval_origin_derivative(s, x) - slope_field(p, {x, y}));
        }
        CHECK(oracle::loglog_slope(xs, rs) >= static_cast<double>(N) - 0.2);
    }
}

TEST_CASE("property: truncated infinity series satisfies the equation to order N + 2") {
    // Evaluated in 50 digits: the residual is far below double rounding of f.
    for (const Parameters& p : {Parameters(5.0, 0.8), Parameters(0.6, 0.9), Parameters(0.1, 0.5)}) {
        const InfinitySeries s = infinity_coefficients(p, 5);
        const Big eps = p.eps(), eta = p.eta();
        std::vector<double> xs, rs;
        for (double xd : log_grid(1e2, 1e4, 21)) {
            const Big x = xd;
            Big y = 0, dy = 0, u = 1 / x, un = 1;
            for (std::size_t n = 0; n < s.coeffs.size(); ++n) {
                y += Big(s.coeffs[n]) * un;
                dy -= Big(static_cast<double>(n)) * Big(s.coeffs[n]) * un * u;
                un *= u;
            }
            const Big N = x - y - x * y;
            const Big D = -x + (1 - eta) * y + x * y;
            const Big f = N / (eps * D);
            const Big fy = ((-1 - x) * D - N * (1 - eta + x)) / (eps * D * D);
            xs.push_back(xd);
            rs.push_back(static_cast<double>(abs((dy - f) / fy)));
        }
        CHECK(oracle::loglog_slope(xs, rs) <= -6.0 + 0.2);
    }
}

TEST_CASE("fit_tail on synthetic power laws") {
    std::vector<double> xs = log_grid(1e-4, 1e-3, 40), r;
    for (double x : xs) r.push_back(2.0 * x * x * x);
    const TailFit a = fit_tail(xs, r);
    CHECK(a.C == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(a.kappa_fit == doctest::Approx(3.0).epsilon(1e-12));

    r.clear();
    for (double x : xs) r.push_back(std::pow(x, 2.5) * (1 + x));
    CHECK(std::abs(fit_tail(xs, r).kappa_fit - 2.5) < 0.01);

    std::vector<double> few(xs.begin(), xs.begin() + 7), few_r(r.begin(), r.begin() + 7);
    CHECK(kind_of([&] { fit_tail(few, few_r); }) == ErrorKind::InsufficientSamples);

    r.clear();
    for (double x : xs) r.push_back(x * x - 3e-7);
    CHECK(kind_of([&] { fit_tail(xs, r); }) == ErrorKind::SignChange);
}

TEST_CASE("fit_tail_auto picks a straight window") {
    std::vector<double> xs = log_grid(1e-6, 1e-1, 200), r;
    // power law with a rounding floor below 1e-5 and a curved top
    for (double x : xs) r.push_back(x < 1e-5 ? 1e-20 * ((&x - xs.data()) % 2 ? 1 : -1) : 3.0 * std::pow(x, 1.7) * (1 + 50 * x));
    const TailFit f = fit_tail_auto(xs, r);
    CHECK(std::abs(f.kappa_fit - 1.7) < 0.05);
    CHECK(f.window_lo >= 1e-5);

    std::vector<double> noise(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) noise[i] = (i % 2 ? 1.0 : -1.0) * 1e-15;
    CHECK(kind_of([&] { fit_tail_auto(xs, noise); }) == ErrorKind::InsufficientPrecision);
}

}  // TEST_SUITE
