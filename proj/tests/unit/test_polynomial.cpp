#include <catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <random>

#include "heunqes/polynomial.hpp"

using heunqes::Polynomial;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> sorted_real_parts(const heunqes::PolynomialRoots& r) {
    std::vector<double> out;
    for (auto z : r.roots) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

Polynomial from_roots(const std::vector<double>& roots, double lead = 1.0) {
    Polynomial p = Polynomial::constant(lead);
    for (double r : roots) p = p * Polynomial::linear(-r, 1.0);
    return p;
}

}  // namespace

TEST_CASE("horner evaluates ascending coefficients") {
    const std::vector<double> c{1.0, -3.0, 2.0};  // 2x^2 - 3x + 1
    CHECK(heunqes::horner(std::span<const double>(c), 2.0) == 3.0);
    const auto [p, dp] = heunqes::horner_with_derivative(std::span<const double>(c), 2.0);
    CHECK(p == 3.0);
    CHECK(dp == 5.0);
    const auto z = heunqes::horner(std::span<const double>(c), std::complex<double>(0.0, 1.0));
    CHECK(z == std::complex<double>(-1.0, -3.0));
}

TEST_CASE("polynomial algebra") {
    const Polynomial p({1.0, 2.0});
    const Polynomial q({-1.0, 0.0, 3.0});
    const auto prod = p * q;
    REQUIRE(prod.degree() == 3);
    CHECK(prod[0] == -1.0);
    CHECK(prod[1] == -2.0);
    CHECK(prod[2] == 3.0);
    CHECK(prod[3] == 6.0);
    CHECK(prod[17] == 0.0);
    CHECK((p + q).coefficients() == std::vector<double>{0.0, 2.0, 3.0});
    CHECK((2.0 * q).coefficients() == std::vector<double>{-2.0, 0.0, 6.0});
    CHECK(q.derivative().coefficients() == std::vector<double>{0.0, 6.0});
    CHECK(Polynomial({0.0, 0.0}).degree() == -1);
    CHECK(Polynomial({4.0, 1.0, 0.0}).degree() == 1);
    CHECK(Polynomial::constant(7.0).derivative().degree() == -1);
}

TEST_CASE("companion roots of a known cubic") {
    const auto r = heunqes::companion_roots(from_roots({-2.0, 0.5, 3.0}, 4.0));
    REQUIRE(r.roots.size() == 3);
    const auto re = sorted_real_parts(r);
    CHECK_THAT(re[0], WithinAbs(-2.0, 1e-14));
    CHECK_THAT(re[1], WithinAbs(0.5, 1e-14));
    CHECK_THAT(re[2], WithinAbs(3.0, 1e-14));
    for (auto z : r.roots) CHECK(heunqes::is_real_root(z, 1e-12));
}

TEST_CASE("complex pairs are reported as conjugates") {
    const auto r = heunqes::companion_roots(Polynomial({5.0, -2.0, 1.0}));  // 1 +- 2i
    REQUIRE(r.roots.size() == 2);
    for (auto z : r.roots) {
        CHECK_THAT(z.real(), WithinAbs(1.0, 1e-14));
        CHECK_THAT(std::abs(z.imag()), WithinAbs(2.0, 1e-14));
        CHECK_FALSE(heunqes::is_real_root(z, 1e-8));
    }
}

TEST_CASE("zero low-order coefficients give exact zero roots") {
    const auto r = heunqes::companion_roots(Polynomial({0.0, 0.0, -1.0, 1.0}));
    REQUIRE(r.roots.size() == 3);
    CHECK(r.roots[0] == std::complex<double>(0.0, 0.0));
    CHECK(r.roots[1] == std::complex<double>(0.0, 0.0));
    CHECK_THAT(r.roots[2].real(), WithinAbs(1.0, 1e-15));
}

TEST_CASE("trailing zero leading coefficients are ignored") {
    const auto r = heunqes::companion_roots(Polynomial({-2.0, 1.0, 0.0, 0.0}));
    REQUIRE(r.roots.size() == 1);
    CHECK_THAT(r.roots[0].real(), WithinAbs(2.0, 1e-15));
}

TEST_CASE("companion roots reject constants") {
    CHECK_THROWS_AS(heunqes::companion_roots(Polynomial::constant(3.0)), std::invalid_argument);
    CHECK_THROWS_AS(heunqes::companion_roots(Polynomial({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("polish_real_root refines a perturbed guess") {
    const auto p = from_roots({-1.0, std::sqrt(2.0)});
    CHECK_THAT(heunqes::polish_real_root(p, 1.4), WithinAbs(std::sqrt(2.0), 1e-15));
}

TEST_CASE("property: roots of random real-rooted polynomials are recovered") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int deg = 1 + trial % 8;
        std::vector<double> roots(static_cast<std::size_t>(deg));
        for (auto& x : roots) x = u(rng);
        std::sort(roots.begin(), roots.end());
        const auto p = from_roots(roots, 1.0 + std::abs(u(rng)));
        const auto found = heunqes::companion_roots(p);
        REQUIRE(found.roots.size() == roots.size());
        // each computed root is a root to rounding accuracy
        for (auto z : found.roots) {
            const double scale = p.magnitude_at(std::abs(z));
            CHECK(std::abs(p(z)) <= 1e-10 * scale);
        }
        // and Vieta's sum holds
        std::complex<double> sum = 0.0;
        for (auto z : found.roots) sum += z;
        double expected = 0.0;
        for (double x : roots) expected += x;
        CHECK_THAT(sum.real(), WithinAbs(expected, 1e-9 * (1.0 + std::abs(expected))));
    }
}
