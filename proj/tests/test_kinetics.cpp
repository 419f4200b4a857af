#include <doctest.h>

#include <cmath>

#include "mmphase/error.hpp"
#include "mmphase/kinetics.hpp"
#include "oracles.hpp"

using namespace mmphase;

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

std::vector<Parameters> grid_10x10() {
    std::vector<Parameters> ps;
    for (int i = 0; i < 10; ++i) {
        const double eps = 0.01 * std::pow(1000.0, i / 9.0);
        for (int j = 0; j < 10; ++j) ps.emplace_back(eps, 0.05 + 0.1 * j);
    }
    return ps;
}

}  // namespace

TEST_SUITE("kinetics") {

TEST_CASE("parameters reject values outside the admissible set") {
    CHECK(kind_of([] { Parameters(0.0, 0.5); }) == ErrorKind::InvalidParameters);
    CHECK(kind_of([] { Parameters(1.0, 1.0); }) == ErrorKind::InvalidParameters);
    CHECK(kind_of([] { Parameters(1.0, 0.0); }) == ErrorKind::InvalidParameters);
    CHECK(kind_of([] { Parameters(-2.0, 0.3); }) == ErrorKind::InvalidParameters);
}

TEST_CASE("nondimensionalize known rate sets") {
    const auto a = nondimensionalize({1, 1, 1, 2, 0});
    CHECK(a.params.eps() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(a.params.eta() == doctest::Approx(0.5).epsilon(1e-15));

    const auto b = nondimensionalize({2, 3, 1, 10, 5});
    CHECK(b.params.eps() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(b.params.eta() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(b.scaling.x_per_s == doctest::Approx(0.5));
    CHECK(b.scaling.y_per_c == doctest::Approx(0.1));
    CHECK(b.scaling.t_per_tau == doctest::Approx(20.0));

    CHECK(kind_of([] { nondimensionalize({1, 0, 1, 1, 0}); }) == ErrorKind::InadmissibleEta);
    CHECK(kind_of([] { nondimensionalize({0, 1, 1, 1, 0}); }) == ErrorKind::InvalidParameters);
}

TEST_CASE("vector field spot values") {
    const Parameters p(5.0, 0.8);
    const Vec2 v = rhs_time(p, {1.0, 0.5});
    CHECK(v.x == doctest::Approx(-0.4));
    CHECK(std::abs(v.y) < 1e-16);
    CHECK(rhs_time(p, {0, 0}) == Vec2{0, 0});
    for (double x : {0.01, 0.3, 1.0, 7.0, 300.0}) {
        CHECK(std::abs(rhs_time(p, {x, x / (1 + x)}).y) < 1e-15);
        CHECK(std::abs(rhs_time(p, {x, x / (1 - p.eta() + x)}).x) < 1e-13 * (1 + x));
    }
}

TEST_CASE("slope field on the alpha isocline equals sigma; singular on V") {
    const Parameters p(5.0, 0.8);
    const double sigma = spectrum(p).sigma;
    CHECK(slope_field(p, {1.0, 1.0 / (1.0 / sigma + 1.0)}) == doctest::Approx(sigma).epsilon(1e-12));
    CHECK(std::abs(slope_field(p, {2.0, 2.0 / 3.0})) < 1e-15);
    CHECK(kind_of([&] { slope_field(p, {1.0, 1.0 / 1.2}); }) == ErrorKind::SingularSlope);
}

TEST_CASE("linearization entries") {
    const Matrix2 a = linearization(Parameters(1.0, 0.5));
    CHECK(a.a11 == -1.0);
    CHECK(a.a12 == 0.5);
    CHECK(a.a21 == 1.0);
    CHECK(a.a22 == -1.0);
    const Matrix2 b = linearization(Parameters(5.0, 0.8));
    CHECK(b.a12 == doctest::Approx(0.2));
    CHECK(b.a21 == doctest::Approx(0.2));
    CHECK(b.a22 == doctest::Approx(-0.2));
}

TEST_CASE("spectrum frozen values") {
    const Spectrum s = spectrum(Parameters(5.0, 0.8));
    CHECK(std::abs(s.lambda_plus - -0.1527864045) < 1e-9);
    CHECK(std::abs(s.lambda_minus - -1.0472135955) < 1e-9);
    CHECK(std::abs(s.kappa - 6.8541019662) < 1e-9);
    CHECK(std::abs(s.sigma - 4.2360679775) < 1e-9);
    CHECK_FALSE(s.resonance.resonant);
    CHECK(s.resonance.nearest_integer == 7);

    const Spectrum t = spectrum(Parameters(0.6, 0.9));
    CHECK(std::abs(t.lambda_plus - -0.8062871) < 1e-7);
    CHECK(std::abs(t.lambda_minus - -1.8603796) < 1e-7);
    CHECK(std::abs(t.kappa - 2.3073) < 1e-4);
    CHECK(std::abs(t.sigma - 1.9371294) < 1e-7);
}

TEST_CASE("spectrum agrees with a long-double quadratic oracle") {
    for (const Parameters& p : grid_10x10()) {
        const auto ev = oracle::eigenvalues(-1.0L, 1.0L - p.eta(), 1.0L / p.eps(), -1.0L / p.eps());
        const Spectrum s = spectrum(p);
        CHECK(s.lambda_minus == doctest::Approx(static_cast<double>(ev[0])).epsilon(1e-12));
        // the oracle loses digits in lambda_plus for large eps; compare loosely there
        CHECK(s.lambda_plus == doctest::Approx(static_cast<double>(ev[1])).epsilon(1e-6));
    }
}

TEST_CASE("eigenvalue ordering and sigma bounds on the parameter grid") {
    for (const Parameters& p : grid_10x10()) {
        const Spectrum s = spectrum(p);
        CHECK(s.lambda_minus < -1.0);
        CHECK(-1.0 < s.lambda_plus);
        CHECK(s.lambda_plus < 0.0);
        CHECK(s.kappa > 1.0);
        CHECK(1.0 < s.sigma);
        CHECK(s.sigma < 1.0 / (1.0 - p.eta()));
        CHECK(s.v_plus.x > 0.0);
        CHECK(s.v_plus.y > 0.0);
    }
}

TEST_CASE("eigenvectors, left eigenvectors and biorthogonality") {
    for (const Parameters& p : grid_10x10()) {
        const Matrix2 a = linearization(p);
        const Spectrum s = spectrum(p);
        const auto close = [](Vec2 u, Vec2 v, double scale) {
            return std::abs(u.x - v.x) <= 1e-12 * scale && std::abs(u.y - v.y) <= 1e-12 * scale;
        };
        const double scale = 1.0 + 1.0 / p.eps();
        CHECK(close(a * s.v_plus, s.lambda_plus * s.v_plus, scale));
        CHECK(close(a * s.v_minus, s.lambda_minus * s.v_minus, scale * scale));
        CHECK(close(a.left_multiply(s.vhat_plus), s.lambda_plus * s.vhat_plus, scale));
        CHECK(close(a.left_multiply(s.vhat_minus), s.lambda_minus * s.vhat_minus, scale * scale));
        CHECK(std::abs(dot(s.vhat_plus, s.v_minus)) < 1e-12 * scale);
        CHECK(std::abs(dot(s.vhat_minus, s.v_plus)) < 1e-12 * scale);
    }
}

TEST_CASE("eta_from_kappa inverts kappa") {
    CHECK(eta_from_kappa(5.0, 6.8541019662496845) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(std::abs(eta_from_kappa(0.6, 2.3073) - 0.9) < 1e-4);
    CHECK(kind_of([] { eta_from_kappa(1.0, 1.0); }) == ErrorKind::Domain);
    CHECK(kind_of([] { eta_from_kappa(1.0, 1.0 + 1e-9); }) == ErrorKind::InadmissibleEta);
    for (const Parameters& p : grid_10x10()) {
        const double k = spectrum(p).kappa;
        CHECK(std::abs(eta_from_kappa(p.eps(), k) - p.eta()) <= 1e-12 * p.eta());
    }
}

TEST_CASE("linear solution") {
    const Parameters p(5.0, 0.8);
    const Spectrum s = spectrum(p);
    const Vec2 at0 = linear_solution(p, {0.3, 0.7}, 0.0);
    CHECK(at0.x == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(at0.y == doctest::Approx(0.7).epsilon(1e-14));

    const Vec2 on_slow = linear_solution(p, s.v_plus, 2.0);
    CHECK(on_slow.x == doctest::Approx(std::exp(2.0 * s.lambda_plus) * s.v_plus.x).epsilon(1e-13));
    CHECK(on_slow.y == doctest::Approx(std::exp(2.0 * s.lambda_plus) * s.v_plus.y).epsilon(1e-13));

    const Matrix2 a = linearization(p);
    const auto ref = oracle::rk4(
        [&](double, std::array<double, 2> z) {
            const Vec2 d = a * Vec2{z[0], z[1]};
            return std::array<double, 2>{d.x, d.y};
        },
        {1.0, 1.0}, 0.0, 1.0, 20000);
    const Vec2 z = linear_solution(p, {1.0, 1.0}, 1.0);
    CHECK(std::abs(z.x - ref[0]) < 1e-10);
    CHECK(std::abs(z.y - ref[1]) < 1e-10);
}

TEST_CASE("mass-action right-hand side conserves enzyme") {
    const RateConstants rc{2, 3, 1, 10, 5};
    for (double c : {0.0, 1.0, 4.0}) {
        const SpeciesState st{5.0 - c, 10.0 - c, c, 0.0};
        const SpeciesState d = mass_action_rhs(rc, st);
        CHECK(std::abs(d[1] + d[2]) < 1e-14);
        CHECK(std::abs(d[0] + d[2] + d[3]) < 1e-13);
    }
}

}  // TEST_SUITE
