#pragma once

// Acceptance criteria. Each check runs at its fixed tolerance and reports one
// line; the acceptance test binary and the `verify` CLI command share them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "heunqes/heun.hpp"
#include "heunqes/model.hpp"
#include "heunqes/oracle.hpp"
#include "heunqes/quantize.hpp"
#include "heunqes/testing/power_matching.hpp"

namespace heunqes::verify {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr double kOracleRelTol = 1e-5;
inline constexpr double kRichardsonRelTol = 1e-6;
inline constexpr double kRootAgreementTol = 1e-12;
inline constexpr double kOdeResidualTol = 1e-9;
inline constexpr double kRecurrenceRelTol = 1e-12;
inline constexpr double kScalingRelTol = 1e-8;
inline constexpr double kVietaTol = 1e-9;
inline constexpr double kOffManifoldFactor = 10.0;
inline constexpr double kBetaPerturbation = 1e-3;
inline constexpr std::uint64_t kSeed = 20111017;

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline double rel_gap(double value, double target) { return std::abs(value - target) / std::max(1.0, std::abs(target)); }

/// Runs jobs concurrently and returns results in submission order.
template <typename T>
std::vector<T> parallel_map(const std::vector<std::function<T()>>& jobs) {
    std::vector<std::future<T>> futures;
    futures.reserve(jobs.size());
    for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, job));
    std::vector<T> out;
    out.reserve(jobs.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

template <typename F>
CriterionResult timed(int id, std::string name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    r.id = id;
    r.name = std::move(name);
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace detail

inline constexpr double kN0RuntimeBudgetSeconds = 10.0;

/// 1: n = 0 closed form is in the oracle spectrum of the induced potential.
inline CriterionResult n0_closed_form() {
    auto result = detail::timed(1, "n=0 closed form energies confirmed by finite differences", [](CriterionResult& r) {
        double worstRaw = 0.0, worstRich = 0.0;
        int failures = 0;
        for (int l = 0; l <= 3; ++l) {
            for (double alpha : {0.5, 1.0, 2.0}) {
                const auto sol = closed_form_n0(l, alpha, 1.0);
                const auto sys = sol.system();
                const auto raw = oracle_check(sys, sol.epsilon, kOracleRelTol, false);
                const auto rich = oracle_check(sys, sol.epsilon, kRichardsonRelTol, true);
                if (!raw.match || !rich.match) {
                    ++failures;
                    continue;
                }
                worstRaw = std::max(worstRaw, detail::rel_gap(sol.epsilon + raw.match->gap, sol.epsilon));
                worstRich = std::max(worstRich, detail::rel_gap(sol.epsilon + rich.match->gap, sol.epsilon));
            }
        }
        r.passed = failures == 0;
        r.detail = "12 systems, unmatched=" + std::to_string(failures) + ", worst gap " + detail::fmt(worstRaw) +
                   " (tol 1e-5), after Richardson " + detail::fmt(worstRich) + " (tol 1e-6)";
    });
    if (result.seconds >= kN0RuntimeBudgetSeconds) {
        result.passed = false;
        result.detail += "; runtime over 10 s budget";
    }
    return result;
}

/// 2: n = 1 closed form matches the quadratic's companion roots and the oracle.
inline CriterionResult n1_closed_form() {
    return detail::timed(2, "n=1 closed form roots and energies", [](CriterionResult& r) {
        double worstRoot = 0.0, worstGap = 0.0;
        int failures = 0;
        for (int l = 0; l <= 2; ++l) {
            for (double aK : {0.0, 1.0}) {
                const auto pair = closed_form_n1(l, aK, 1.0);
                const double l1 = l + 1.0, l2 = l + 2.0;
                const Polynomial quadratic({aK * aK - 2.0 * (2.0 * l + 2.0), -aK * (2.0 * l + 3.0), l1 * l2});
                std::vector<double> roots;
                for (const auto& z : companion_roots(quadratic).roots) roots.push_back(z.real());
                std::sort(roots.begin(), roots.end());
                const auto generic = solve_b_roots(constraint_polynomial(1, l, aK)).roots;
                if (roots.size() != 2 || generic.size() != 2) {
                    ++failures;
                    continue;
                }
                for (std::size_t i = 0; i < 2; ++i) {
                    const double b = pair[i].bRoot;
                    worstRoot = std::max({worstRoot, std::abs(b - roots[i]) / std::max(1.0, std::abs(b)),
                                          std::abs(b - generic[i]) / std::max(1.0, std::abs(b))});
                    const auto check = oracle_check(pair[i].system(), pair[i].epsilon, kOracleRelTol, true);
                    if (!check.match) {
                        ++failures;
                        continue;
                    }
                    worstGap = std::max(worstGap, detail::rel_gap(pair[i].epsilon + check.match->gap, pair[i].epsilon));
                }
            }
        }
        r.passed = failures == 0 && worstRoot <= kRootAgreementTol;
        r.detail = "12 branches, unmatched=" + std::to_string(failures) + ", worst root disagreement " +
                   detail::fmt(worstRoot) + " (tol 1e-12), worst oracle gap " + detail::fmt(worstGap) + " (tol 1e-5)";
    });
}

/// 3: general degree n <= 8 solutions terminate, satisfy the ODE and are oracle-confirmed.
inline CriterionResult general_n() {
    return detail::timed(3, "general n<=8 termination, ODE residual and oracle energies", [](CriterionResult& r) {
        struct Outcome {
            int solutions = 0;
            int failures = 0;
            double worstTermination = 0.0, worstOde = 0.0, worstGap = 0.0;
        };
        std::vector<std::function<Outcome()>> jobs;
        for (int n = 0; n <= 8; ++n)
            for (int l = 0; l <= 3; ++l)
                for (double aK : {0.0, 1.0})
                    jobs.emplace_back([=] {
                        Outcome o;
                        for (const auto& sol : solve_family(n, l, aK, 1.0).solutions) {
                            ++o.solutions;
                            o.worstTermination = std::max(o.worstTermination, sol.residuals.termination);
                            o.worstOde = std::max(o.worstOde, sol.residuals.ode);
                            const auto check = oracle_check(sol.system(), sol.epsilon, kOracleRelTol, true);
                            if (!check.match || sol.residuals.termination >= kTerminationTol ||
                                sol.residuals.ode >= kOdeResidualTol) {
                                ++o.failures;
                                continue;
                            }
                            o.worstGap = std::max(o.worstGap, detail::rel_gap(sol.epsilon + check.match->gap, sol.epsilon));
                        }
                        return o;
                    });
        Outcome total;
        for (const auto& o : detail::parallel_map(jobs)) {
            total.solutions += o.solutions;
            total.failures += o.failures;
            total.worstTermination = std::max(total.worstTermination, o.worstTermination);
            total.worstOde = std::max(total.worstOde, o.worstOde);
            total.worstGap = std::max(total.worstGap, o.worstGap);
        }
        r.passed = total.failures == 0 && total.solutions > 0;
        r.detail = std::to_string(total.solutions) + " solutions, failures=" + std::to_string(total.failures) +
                   ", worst termination " + detail::fmt(total.worstTermination) + " (tol 1e-10), worst ODE " +
                   detail::fmt(total.worstOde) + " (tol 1e-9), worst oracle gap " + detail::fmt(total.worstGap) +
                   " (tol 1e-5)";
    });
}

/// 4: recurrence coefficients equal independent power matching.
inline CriterionResult recurrence_matches_power_matching() {
    return detail::timed(4, "recurrence vs power matching, 100 random parameter sets", [](CriterionResult& r) {
        std::mt19937_64 rng(kSeed);
        std::uniform_int_distribution<int> lDist(0, 5);
        std::uniform_real_distribution<double> bDist(-3.0, 3.0), cDist(-5.0, 12.0), dDist(-4.0, 4.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const double a = 2.0 * lDist(rng) + 1.0;
            const double b = bDist(rng), c = cDist(rng), d = dDist(rng);
            const auto seq = coefficient_sequence(HeunParameters::from_abcd(a, b, c, d), 14);
            const auto ref = testing::power_matched_coefficients(a, b, c, d, 14);
            for (std::size_t j = 0; j < 15; ++j) {
                const double denom = std::abs(ref[j]) > 0.0 ? std::abs(ref[j]) : 1.0;
                worst = std::max(worst, std::abs(seq.raw()[j] - ref[j]) / denom);
            }
        }
        r.passed = worst < kRecurrenceRelTol;
        r.detail = "worst relative difference " + detail::fmt(worst) + " (tol 1e-12)";
    });
}

/// 5: oscillator limit 2 n_r + l + 3/2.
inline CriterionResult oscillator_limit() {
    return detail::timed(5, "oscillator limit alpha=beta=0, k=1", [](CriterionResult& r) {
        double worst = 0.0;
        for (int l = 0; l <= 2; ++l) {
            const PhysicalSystem sys(0.0, 0.0, 1.0, l);
            const auto res = fd_eigensolve(sys, RadialGrid(kDefaultInnerWall, 12.0, kDefaultGridPoints), 3);
            for (int nr = 0; nr < 3; ++nr)
                worst = std::max(worst, std::abs(res.energies[static_cast<std::size_t>(nr)] - (2.0 * nr + l + 1.5)));
        }
        r.passed = worst < 1e-5;
        r.detail = "9 levels, worst |error| " + detail::fmt(worst) + " (tol 1e-5)";
    });
}

/// 6: spectra scale as K^2 between (alpha, beta, k) and (alpha/K, beta/K^3, 1).
inline CriterionResult scaling_invariance() {
    return detail::timed(6, "scaling invariance, 10 random systems", [](CriterionResult& r) {
        std::mt19937_64 rng(kSeed + 6);
        std::uniform_real_distribution<double> alphaDist(0.0, 2.0), betaDist(-2.0, 2.0), kDist(0.1, 10.0);
        std::uniform_int_distribution<int> lDist(0, 3), nDist(0, 4);
        double worstOracle = 0.0, worstFamily = 0.0;
        bool shapeMismatch = false;
        for (int trial = 0; trial < 10; ++trial) {
            const PhysicalSystem sys(alphaDist(rng), betaDist(rng), kDist(rng), lDist(rng));
            const double K = sys.K();
            const PhysicalSystem unit = sys.unit_scaled();
            const RadialGrid unitGrid(kDefaultInnerWall, 12.0, 3000);
            const auto full = fd_eigensolve(sys, unitGrid.scaled(1.0 / K), 5);
            const auto ref = fd_eigensolve(unit, unitGrid, 5);
            for (std::size_t i = 0; i < 5; ++i)
                worstOracle = std::max(worstOracle, std::abs(full.energies[i] - K * K * ref.energies[i]) /
                                                        std::abs(K * K * ref.energies[i]));

            const int n = nDist(rng);
            const auto famFull = solve_family(n, sys.l(), sys.alpha(), sys.k());
            const auto famUnit = solve_family(n, sys.l(), unit.alpha(), 1.0);
            if (famFull.solutions.size() != famUnit.solutions.size()) {
                shapeMismatch = true;
                continue;
            }
            for (std::size_t i = 0; i < famFull.solutions.size(); ++i) {
                const auto& f = famFull.solutions[i];
                const auto& u = famUnit.solutions[i];
                worstFamily = std::max({worstFamily,
                                        std::abs(f.epsilon - K * K * u.epsilon) / std::max(1.0, std::abs(K * K * u.epsilon)),
                                        std::abs(f.beta - K * K * K * u.beta) / std::max(1.0, std::abs(K * K * K * u.beta))});
            }
        }
        r.passed = !shapeMismatch && worstOracle < kScalingRelTol && worstFamily < kScalingRelTol;
        r.detail = "oracle spectra worst " + detail::fmt(worstOracle) + ", quasi-exact (eps, beta) worst " +
                   detail::fmt(worstFamily) + " (tol 1e-8)";
    });
}

/// 7: Vieta residuals of computed turning points.
inline CriterionResult vieta_relations() {
    return detail::timed(7, "Vieta residuals of turning points, 20 random pairs", [](CriterionResult& r) {
        std::mt19937_64 rng(kSeed + 7);
        std::uniform_real_distribution<double> alphaDist(0.0, 3.0), betaDist(-2.0, 2.0), kDist(0.2, 3.0),
            epsDist(-2.0, 6.0);
        std::uniform_int_distribution<int> lDist(0, 4);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const PhysicalSystem sys(alphaDist(rng), betaDist(rng), kDist(rng), lDist(rng));
            const double eps = epsDist(rng);
            const auto tp = turning_points(sys, eps);
            for (double v : tp.vietaResiduals) worst = std::max(worst, v);
        }
        r.passed = worst < kVietaTol;
        r.detail = "worst residual " + detail::fmt(worst) + " (tol 1e-9)";
    });
}

/// 8: moving beta off a root while holding eps breaks termination.
inline CriterionResult off_manifold_control() {
    return detail::timed(8, "off-manifold beta perturbation breaks termination", [](CriterionResult& r) {
        double weakest = std::numeric_limits<double>::infinity();
        int cases = 0;
        for (int n = 0; n <= 5; ++n)
            for (int l = 0; l <= 2; ++l)
                for (double alpha : {0.0, 1.0})
                    for (const auto& sol : solve_family(n, l, alpha, 1.0).solutions)
                        for (double sign : {-1.0, 1.0}) {
                            const PhysicalSystem moved(sol.alpha, sol.beta + sign * kBetaPerturbation, sol.k, sol.l);
                            const auto seq = coefficient_sequence(to_heun_params(moved, sol.epsilon), n + 2);
                            weakest = std::min(weakest, termination_residual(seq.raw(), n) / kTerminationTol);
                            ++cases;
                        }
        r.passed = cases > 0 && weakest >= kOffManifoldFactor;
        r.detail = std::to_string(cases) + " perturbations, smallest residual/tolerance " + detail::fmt(weakest) +
                   " (need >= 10)";
    });
}

inline std::vector<CriterionResult> run_all() {
    return {n0_closed_form(),  n1_closed_form(),     general_n(),       recurrence_matches_power_matching(),
            oscillator_limit(), scaling_invariance(), vieta_relations(), off_manifold_control()};
}

inline std::string format_line(const CriterionResult& r) {
    char head[64];
    std::snprintf(head, sizeof head, "[%s] criterion %d (%.2fs): ", r.passed ? "PASS" : "FAIL", r.id, r.seconds);
    return head + r.name + " -- " + r.detail;
}

}  // namespace heunqes::verify
