#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "heunqes/model.hpp"

using heunqes::PhysicalSystem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("system validation") {
    CHECK_NOTHROW(PhysicalSystem(0.0, -3.0, 1.0, 0));
    CHECK_THROWS_AS(PhysicalSystem(1.0, 0.0, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalSystem(1.0, 0.0, -1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalSystem(-0.1, 0.0, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalSystem(1.0, 0.0, 1.0, -1), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalSystem(NAN, 0.0, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalSystem(1.0, INFINITY, 1.0, 0), std::invalid_argument);
}

TEST_CASE("derived quantities") {
    const PhysicalSystem s(2.0, 0.5, 16.0, 3);
    CHECK(s.K() == 2.0);
    CHECK(s.centrifugal() == 12.0);
    const auto u = s.unit_scaled();
    CHECK(u.alpha() == 1.0);
    CHECK(u.beta() == 0.0625);
    CHECK(u.k() == 1.0);
    CHECK_THAT(s.effective_potential(0.5), WithinRel(-4.0 + 48.0 + 0.25 + 4.0, 1e-15));
    CHECK_THAT(heunqes::effective_momentum_squared(s, 1.0, 0.5), WithinRel(2.0 - 48.25, 1e-15));
    CHECK_THROWS_AS(heunqes::effective_momentum_squared(s, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("turning points vanish the momentum") {
    const PhysicalSystem s(1.0, 0.1, 1.0, 1);
    const double eps = 3.0;
    const auto tp = heunqes::turning_points(s, eps);
    REQUIRE(tp.realCount == 4);
    // two negative, then the classically allowed interval [r3, r4]
    CHECK(tp.roots[0].real() < tp.roots[1].real());
    CHECK(tp.roots[1].real() < 0.0);
    CHECK(tp.roots[2].real() > 0.0);
    CHECK(tp.roots[2].real() < tp.roots[3].real());
    for (std::size_t i = 2; i < 4; ++i) {
        const double r = tp.roots[i].real();
        CHECK(std::abs(heunqes::effective_momentum_squared(s, eps, r)) * r * r < 1e-12);
        CHECK(heunqes::effective_momentum_squared(s, eps, 0.5 * (tp.roots[2].real() + tp.roots[3].real())) > 0.0);
    }
    CHECK(tp.outer() == tp.roots[3].real());
}

TEST_CASE("momentum curve equals the quartic over -r^2") {
    const PhysicalSystem s(1.0, 1.0, 1.0, 1);
    const auto q = heunqes::turning_point_quartic(s, 3.0);
    for (double r : {0.3, 1.0, 2.2}) CHECK_THAT(heunqes::effective_momentum_squared(s, 3.0, r), WithinRel(q(r) / (r * r), 1e-14));
    CHECK(heunqes::effective_momentum_squared(s, 3.0, 1e-6) < -1e11);
}

TEST_CASE("complex turning points come in conjugate pairs") {
    const PhysicalSystem s(1.0, 1.0, 1.0, 1);
    const auto tp = heunqes::turning_points(s, 1.0);
    REQUIRE(tp.realCount == 0);
    CHECK(tp.roots[0] == std::conj(tp.roots[1]));
    CHECK(tp.roots[2] == std::conj(tp.roots[3]));
    CHECK(tp.roots[0].imag() < 0.0);
    CHECK(tp.roots[0].real() < tp.roots[2].real());
    CHECK(std::isnan(tp.outer()));
    for (double v : tp.vietaResiduals) CHECK(v < 1e-9);
}

TEST_CASE("Vieta residuals on exact and perturbed roots") {
    // -(r+3)(r+1)(r-1)(r-2) is the turning-point quartic of alpha = 1, beta = 1, k = 1, l = 2, eps = 7/2
    const PhysicalSystem s(1.0, 1.0, 1.0, 2);
    heunqes::TurningPointSet exact;
    exact.roots = {-3.0, -1.0, 1.0, 2.0};
    exact.realCount = 4;
    for (double v : heunqes::vieta_residuals(exact, s, 3.5)) CHECK(v < 1e-12);

    const auto found = heunqes::turning_points(s, 3.5);
    REQUIRE(found.realCount == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(found.roots[i].real(), WithinAbs(exact.roots[i].real(), 1e-13));

    exact.roots[3] += 1e-3;
    const auto res = heunqes::vieta_residuals(exact, s, 3.5);
    CHECK(*std::max_element(res.begin(), res.end()) > 1e-4);
}

TEST_CASE("s-wave oscillator has turning points at 0 and +-sqrt(2 eps)") {
    const PhysicalSystem s(0.0, 0.0, 1.0, 0);
    const auto tp = heunqes::turning_points(s, 1.5);
    REQUIRE(tp.realCount == 4);
    CHECK_THAT(tp.roots[0].real(), WithinRel(-std::sqrt(3.0), 1e-14));
    CHECK(tp.roots[1].real() == 0.0);
    CHECK(tp.roots[2].real() == 0.0);
    CHECK_THAT(tp.outer(), WithinRel(std::sqrt(3.0), 1e-14));
}

TEST_CASE("no positive turning point below the well") {
    const PhysicalSystem s(0.0, 0.0, 1.0, 2);
    const auto tp = heunqes::turning_points(s, -1.0);
    CHECK(std::isnan(tp.outer()));
}

TEST_CASE("property: Vieta relations hold for random systems") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> alpha(0.0, 5.0), beta(-3.0, 3.0), logk(-2.0, 2.0), eps(-5.0, 10.0);
    for (int trial = 0; trial < 300; ++trial) {
        const PhysicalSystem s(alpha(rng), beta(rng), std::exp(logk(rng)), trial % 4);
        const double e = eps(rng);
        const auto tp = heunqes::turning_points(s, e);
        const double scale[4] = {1.0 + std::abs(s.beta() / s.k()), 1.0 + std::abs(2.0 * e / s.k()),
                                 1.0 + s.alpha() / s.k(), 1.0 + s.centrifugal() / s.k()};
        for (std::size_t i = 0; i < 4; ++i) CHECK(tp.vietaResiduals[i] <= 1e-9 * scale[i]);
        CHECK(tp.realCount % 2 == 0);
    }
}
