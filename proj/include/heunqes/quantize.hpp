#pragma once

// Polynomial (quasi-exact) bound states. Terminating the Heun series at degree n
// requires c = 2(n+l+1)+1, which fixes the energy, plus one polynomial condition
// on b = beta/K^3 of degree n+1. Each real root b selects its own potential.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heunqes/errors.hpp"
#include "heunqes/heun.hpp"
#include "heunqes/model.hpp"
#include "heunqes/polynomial.hpp"

namespace heunqes {

inline constexpr double kConstraintRealTol = 1e-8;
inline constexpr int kDefaultDegreeCap = 32;
inline constexpr int kOdeSamplePoints = 50;

/// eps = K^2 (n + l + 3/2) - K^2 b^2 / 8.
inline double energy_from_termination(int n, int l, double K, double b) {
    if (!(K > 0.0)) throw std::invalid_argument("energy_from_termination: K must be positive");
    const double K2 = K * K;
    return K2 * (n + l + 1.5) - K2 * b * b / 8.0;
}

struct ConstraintPolynomial {
    int n = 0;
    int l = 0;
    double alphaOverK = 0.0;
    Polynomial poly;  ///< ascending in b, degree n+1
};

/// Runs the recurrence with c = 2(n+l+1)+1 over polynomials in b and returns
/// -2 c_{n-1}(b) + (n b - D(b)) c_n(b), which equals (n+1)(a+n+1) c_{n+1}(b).
/// For n = 0 this is -D = b(l+1) - alpha/K.
inline ConstraintPolynomial constraint_polynomial(int n, int l, double alphaOverK) {
    if (n < 0 || l < 0) throw std::invalid_argument("constraint_polynomial: n and l must be non-negative");
    const double a = 2.0 * l + 1.0;
    const double c = a + 2.0 + 2.0 * n;
    // -D(b) = b (l+1) - alpha/K
    const Polynomial minusD = Polynomial::linear(-alphaOverK, l + 1.0);

    Polynomial prev = Polynomial::constant(0.0);
    Polynomial cur = Polynomial::constant(1.0);
    for (int j = 0; j < n; ++j) {
        const double denom = (j + 1.0) * (a + j + 1.0);
        Polynomial next = (2.0 * j + a - c) * prev + (Polynomial::linear(0.0, j) + minusD) * cur;
        next *= 1.0 / denom;
        prev = std::move(cur);
        cur = std::move(next);
    }
    Polynomial p = (2.0 * n + a - c) * prev + (Polynomial::linear(0.0, n) + minusD) * cur;
    return {n, l, alphaOverK, std::move(p)};
}

struct BRoots {
    std::vector<double> roots;  ///< ascending
    int discardedComplex = 0;
};

/// Real roots of the constraint polynomial, Newton-polished on the real axis.
inline BRoots solve_b_roots(const ConstraintPolynomial& cp) {
    if (cp.poly.degree() < 1) throw std::invalid_argument("solve_b_roots: polynomial degree must be >= 1");
    const auto all = companion_roots(cp.poly);
    BRoots out;
    for (const auto& z : all.roots) {
        if (is_real_root(z, kConstraintRealTol))
            out.roots.push_back(polish_real_root(cp.poly, z.real()));
        else
            ++out.discardedComplex;
    }
    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

struct SolutionResiduals {
    /// |P(b)| / sum |p_i| |b|^i
    double constraint = 0.0;
    /// max(|c_{n+1}|, |c_{n+2}|) / max_{j<=n}|c_j|
    double termination = 0.0;
    /// max over sample points of the relative Heun-equation residual
    double ode = 0.0;
    std::optional<double> oracleGap;
    std::optional<int> oracleIndex;
    std::optional<int> nodeCount;
};

struct QuasiExactSolution {
    int n = 0;
    int l = 0;
    int branch = 0;  ///< index among the real roots, ascending in b
    double alpha = 0.0;
    double k = 0.0;
    double K = 0.0;
    double bRoot = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    std::vector<double> heunCoefficients;  ///< c_0..c_n
    SolutionResiduals residuals;

    PhysicalSystem system() const { return PhysicalSystem(alpha, beta, k, l); }
    HeunParameters heun_parameters() const { return to_heun_params(system(), epsilon); }
};

/// Upper end of the physically relevant z range: 2 K r4 (outer turning point), or sqrt(54) if none.
inline double ode_sample_extent(const PhysicalSystem& sys, double epsilon) {
    const double r4 = turning_points(sys, epsilon).outer();
    return std::isfinite(r4) ? 2.0 * sys.K() * r4 : std::sqrt(54.0);
}

/// Maximum relative Heun-equation residual at `points` equally spaced z in (0, zMax].
inline double max_ode_residual(const HeunParameters& hp, const CoefficientSequence& seq, double zMax,
                               int points = kOdeSamplePoints) {
    double worst = 0.0;
    for (int i = 1; i <= points; ++i) {
        const double z = zMax * i / points;
        worst = std::max(worst, ode_residual_terms(hp, seq, z).relative());
    }
    return worst;
}

/// Fills heunCoefficients and residual diagnostics from the solution's (n, l, alpha, k, bRoot, beta, epsilon).
inline void attach_diagnostics(QuasiExactSolution& sol, const ConstraintPolynomial& cp) {
    const double scale = cp.poly.magnitude_at(sol.bRoot);
    sol.residuals.constraint = scale > 0.0 ? std::abs(cp.poly(sol.bRoot)) / scale : 0.0;
    const PhysicalSystem sys = sol.system();
    const HeunParameters hp = to_heun_params(sys, sol.epsilon);
    const auto seq = coefficient_sequence(hp, sol.n + 2);
    sol.heunCoefficients.assign(seq.raw().begin(), seq.raw().begin() + sol.n + 1);
    sol.residuals.termination = termination_residual(seq.raw(), sol.n);
    sol.residuals.ode = max_ode_residual(hp, seq, ode_sample_extent(sys, sol.epsilon));
}

/// Builds the solution selected by a root b of the degree-n constraint polynomial.
inline QuasiExactSolution assemble_solution(const ConstraintPolynomial& cp, double alpha, double k, double b,
                                            int branch) {
    QuasiExactSolution sol;
    sol.n = cp.n;
    sol.l = cp.l;
    sol.branch = branch;
    sol.alpha = alpha;
    sol.k = k;
    sol.K = std::sqrt(std::sqrt(k));
    sol.bRoot = b;
    sol.beta = b * sol.K * sol.K * sol.K;
    sol.epsilon = energy_from_termination(cp.n, cp.l, sol.K, b);
    attach_diagnostics(sol, cp);
    return sol;
}

/// n = 0: b = alpha/(K(l+1)), beta = alpha K^2/(l+1), eps = K^2(l+3/2) - (alpha/(l+1))^2/8, H = 1.
inline QuasiExactSolution closed_form_n0(int l, double alpha, double K) {
    if (!(K > 0.0)) throw std::invalid_argument("closed_form_n0: K must be positive");
    const double ratio = alpha / (l + 1.0);
    QuasiExactSolution sol;
    sol.l = l;
    sol.alpha = alpha;
    sol.K = K;
    sol.k = K * K * K * K;
    sol.bRoot = alpha / (K * (l + 1.0));
    sol.beta = ratio * K * K;
    sol.epsilon = K * K * (l + 1.5) - ratio * ratio / 8.0;
    attach_diagnostics(sol, constraint_polynomial(0, l, alpha / K));
    return sol;
}

/// n = 1: roots of (l+1)(l+2) b^2 - (2l+3)(alpha/K) b + (alpha/K)^2 - 2(2l+2) = 0,
///   b = (alpha/K)(l+3/2)/((l+1)(l+2)) -+ sqrt((alpha/K)^2 / (4 (l+1)^2 (l+2)^2) + 4/(l+2)),
/// returned with the minus branch first. eps = K^2 (l + 5/2) - K^2 b^2 / 8.
inline std::array<QuasiExactSolution, 2> closed_form_n1(int l, double alpha, double K) {
    if (!(K > 0.0)) throw std::invalid_argument("closed_form_n1: K must be positive");
    const double aK = alpha / K;
    const double l1 = l + 1.0, l2 = l + 2.0;
    const double centre = aK * (l + 1.5) / (l1 * l2);
    const double radius = std::sqrt(aK * aK / (4.0 * l1 * l1 * l2 * l2) + 4.0 / l2);
    const double k = K * K * K * K;
    const auto cp = constraint_polynomial(1, l, aK);
    std::array<QuasiExactSolution, 2> out;
    for (int branch = 0; branch < 2; ++branch) {
        auto& sol = out[static_cast<std::size_t>(branch)];
        sol.n = 1;
        sol.l = l;
        sol.branch = branch;
        sol.alpha = alpha;
        sol.K = K;
        sol.k = k;
        sol.bRoot = branch == 0 ? centre - radius : centre + radius;
        sol.beta = sol.bRoot * K * K * K;
        sol.epsilon = K * K * (l + 2.5) - K * K * sol.bRoot * sol.bRoot / 8.0;
        attach_diagnostics(sol, cp);
    }
    return out;
}

struct SolveOptions {
    int degreeCap = kDefaultDegreeCap;
    /// Proceed above the cap and record a warning instead of throwing.
    bool allowAboveCap = false;
};

struct FamilyResult {
    std::vector<QuasiExactSolution> solutions;  ///< ascending in b
    int discardedComplexRoots = 0;
    std::vector<std::string> warnings;
};

/// All degree-n quasi-exact solutions for (l, alpha, k); beta is determined by each root.
inline FamilyResult solve_family(int n, int l, double alpha, double k, const SolveOptions& opts = {}) {
    if (n < 0 || l < 0) throw std::invalid_argument("solve_family: n and l must be non-negative");
    if (!(k > 0.0)) throw std::invalid_argument("solve_family: k must be positive");
    if (alpha < 0.0) throw std::invalid_argument("solve_family: alpha must be non-negative");
    FamilyResult out;
    if (n > opts.degreeCap) {
        const std::string msg = "degree " + std::to_string(n) + " exceeds cap " + std::to_string(opts.degreeCap) +
                                "; constraint coefficients may lose accuracy";
        if (!opts.allowAboveCap) throw std::invalid_argument("solve_family: " + msg);
        out.warnings.push_back(msg);
    }
    const double K = std::sqrt(std::sqrt(k));
    const auto cp = constraint_polynomial(n, l, alpha / K);
    const auto roots = solve_b_roots(cp);
    out.discardedComplexRoots = roots.discardedComplex;
    for (std::size_t i = 0; i < roots.roots.size(); ++i)
        out.solutions.push_back(assemble_solution(cp, alpha, k, roots.roots[i], static_cast<int>(i)));
    return out;
}

struct RadialSample {
    double r;
    double R;
};

/// R(r) = r^l exp(-beta r / (2K^2)) exp(-K^2 r^2 / 2) H(K r), unnormalized.
inline std::vector<RadialSample> wavefunction(const QuasiExactSolution& sol, std::span<const double> radii) {
    std::vector<RadialSample> out;
    out.reserve(radii.size());
    const double K2 = sol.K * sol.K;
    for (double r : radii) {
        if (!(r >= 0.0)) throw std::invalid_argument("wavefunction: radii must be non-negative");
        const double H = horner(std::span<const double>(sol.heunCoefficients), sol.K * r);
        const double envelope = std::exp(-sol.beta * r / (2.0 * K2) - K2 * r * r / 2.0);
        out.push_back({r, std::pow(r, sol.l) * envelope * H});
    }
    return out;
}

/// Scales so the trapezoidal integral of R^2 r^2 dr is 1, with R > 0 at the first non-negligible sample.
inline std::vector<RadialSample> normalize(std::vector<RadialSample> samples) {
    if (samples.size() < 3) throw std::invalid_argument("normalize: need at least 3 samples");
    double integral = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto& p = samples[i - 1];
        const auto& q = samples[i];
        if (!(q.r > p.r)) throw std::invalid_argument("normalize: grid must be strictly ascending");
        integral += 0.5 * (q.r - p.r) * (p.R * p.R * p.r * p.r + q.R * q.R * q.r * q.r);
    }
    if (!(integral > 0.0)) throw std::invalid_argument("normalize: all-zero input");
    double scale = 1.0 / std::sqrt(integral);
    for (const auto& s : samples) {
        if (std::abs(s.R * scale) > 1e-12) {
            if (s.R < 0.0) scale = -scale;
            break;
        }
    }
    for (auto& s : samples) s.R *= scale;
    return samples;
}

}  // namespace heunqes
