#pragma once

// Finite-difference eigensolver for the radial equation in f = r R:
//   -f'' + (-alpha/r + l(l+1)/r^2 + beta r + k r^2) f = 2 eps f,  f(rMin) = f(rMax) = 0,
// on a uniform grid with the three-point Laplacian. The resulting symmetric
// tridiagonal matrix is solved by Sturm-sequence bisection and inverse iteration.
// Nothing here depends on the Heun machinery.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "heunqes/errors.hpp"
#include "heunqes/model.hpp"

namespace heunqes {

inline constexpr int kDefaultGridPoints = 6000;

/// Default inner wall in units of 1/K. Moving the Dirichlet wall off the origin raises
/// s-wave levels by about |f'(0)|^2 rMin / 2, so it is kept far below the step size.
inline constexpr double kDefaultInnerWall = 1e-8;

struct RadialGrid {
    double rMin = kDefaultInnerWall;
    double rMax = 12.0;
    int points = kDefaultGridPoints;

    RadialGrid() = default;
    RadialGrid(double rMin_, double rMax_, int points_) : rMin(rMin_), rMax(rMax_), points(points_) {
        if (!(rMin > 0.0) || !(rMax > rMin) || !std::isfinite(rMax))
            throw std::invalid_argument("RadialGrid: need 0 < rMin < rMax");
        if (points < 16) throw std::invalid_argument("RadialGrid: need at least 16 points");
    }

    double spacing() const { return (rMax - rMin) / (points - 1); }
    double node(int i) const { return rMin + i * spacing(); }

    /// Same interval with the step halved.
    RadialGrid refined() const { return RadialGrid(rMin, rMax, 2 * (points - 1) + 1); }
    RadialGrid scaled(double factor) const { return RadialGrid(rMin * factor, rMax * factor, points); }
};

/// rMin = 1e-8/K; rMax = max(1.5 r4, sqrt(r4^2 + 54/K^2)) around the outer turning point at epsilon,
/// so the Gaussian factor has dropped by e^-27 past r4.
inline RadialGrid auto_grid(const PhysicalSystem& sys, double epsilon, int points = kDefaultGridPoints) {
    const double K = sys.K();
    const double gaussian = std::sqrt(54.0) / K;
    const double r4 = turning_points(sys, epsilon).outer();
    double rMax = gaussian;
    if (std::isfinite(r4)) rMax = std::max(1.5 * r4, std::sqrt(r4 * r4 + gaussian * gaussian));
    return RadialGrid(kDefaultInnerWall / K, rMax, points);
}

/// Symmetric tridiagonal matrix with a constant off-diagonal.
struct SymmetricTridiagonal {
    std::vector<double> diag;
    double offdiag = 0.0;

    std::size_t size() const { return diag.size(); }

    /// Number of eigenvalues strictly below x (Sturm count via LDL^T pivots).
    std::size_t count_below(double x) const {
        const double e2 = offdiag * offdiag;
        const double tiny = std::numeric_limits<double>::min();
        std::size_t count = 0;
        double q = 1.0;
        for (std::size_t i = 0; i < diag.size(); ++i) {
            q = diag[i] - x - (i == 0 ? 0.0 : e2 / q);
            if (q == 0.0) q = -tiny;
            if (q < 0.0) ++count;
        }
        return count;
    }

    std::pair<double, double> gershgorin() const {
        const auto [lo, hi] = std::minmax_element(diag.begin(), diag.end());
        return {*lo - 2.0 * std::abs(offdiag), *hi + 2.0 * std::abs(offdiag)};
    }

    /// The index-th smallest eigenvalue by bisection, searching upward from `floor`.
    double eigenvalue(std::size_t index, double floor) const {
        double lo = floor;
        for (int guard = 0; count_below(lo) > index; ++guard) {
            if (guard > 2100) throw SolverError("eigenvalue: lower bracket not found");
            lo -= 2.0 * (1.0 + std::abs(lo));
        }
        double step = 1.0 + std::abs(lo) * 1e-3;
        double hi = lo + step;
        for (int guard = 0; count_below(hi) <= index; ++guard) {
            if (guard > 2100 || !std::isfinite(hi)) throw SolverError("eigenvalue: upper bracket not found");
            step *= 2.0;
            hi = lo + step;
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (count_below(mid) > index)
                hi = mid;
            else
                lo = mid;
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
        }
        return 0.5 * (lo + hi);
    }

    /// Solves (T - shift I) x = rhs by Gaussian elimination with partial pivoting.
    std::vector<double> shifted_solve(double shift, std::vector<double> rhs) const {
        const std::size_t m = diag.size();
        std::vector<double> u0(m), u1(m, 0.0), u2(m, 0.0), mult(m, 0.0);
        std::vector<char> swapped(m, 0);
        const double tiny = std::numeric_limits<double>::epsilon() * (std::abs(gershgorin().first) + std::abs(gershgorin().second));
        // Current pivot-candidate row in columns (k, k+1, k+2).
        double d = diag[0] - shift, s1 = offdiag, s2 = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double a = offdiag, b = diag[k + 1] - shift, c = k + 2 < m ? offdiag : 0.0;
            if (std::abs(a) > std::abs(d)) {
                swapped[k] = 1;
                u0[k] = a;
                u1[k] = b;
                u2[k] = c;
                const double f = d / a;
                mult[k] = f;
                d = s1 - f * b;
                s1 = s2 - f * c;
            } else {
                if (d == 0.0) d = tiny;
                u0[k] = d;
                u1[k] = s1;
                u2[k] = s2;
                const double f = a / d;
                mult[k] = f;
                d = b - f * s1;
                s1 = c - f * s2;
            }
            s2 = 0.0;
        }
        u0[m - 1] = d == 0.0 ? tiny : d;

        for (std::size_t k = 0; k + 1 < m; ++k) {
            if (swapped[k]) std::swap(rhs[k], rhs[k + 1]);
            rhs[k + 1] -= mult[k] * rhs[k];
        }
        for (std::size_t k = m; k-- > 0;) {
            double v = rhs[k];
            if (k + 1 < m) v -= u1[k] * rhs[k + 1];
            if (k + 2 < m) v -= u2[k] * rhs[k + 2];
            rhs[k] = v / (u0[k] == 0.0 ? tiny : u0[k]);
        }
        return rhs;
    }

    /// ||(T - lambda) x|| / ||x||.
    double residual(double lambda, std::span<const double> x) const {
        double num = 0.0, den = 0.0;
        const std::size_t m = diag.size();
        for (std::size_t i = 0; i < m; ++i) {
            double v = (diag[i] - lambda) * x[i];
            if (i > 0) v += offdiag * x[i - 1];
            if (i + 1 < m) v += offdiag * x[i + 1];
            num += v * v;
            den += x[i] * x[i];
        }
        return std::sqrt(num / den);
    }
};

/// Interior-node operator -d^2/dr^2 + V on the grid.
inline SymmetricTridiagonal radial_operator(const PhysicalSystem& sys, const RadialGrid& grid) {
    const double h = grid.spacing();
    const double inv_h2 = 1.0 / (h * h);
    SymmetricTridiagonal t;
    t.offdiag = -inv_h2;
    t.diag.resize(static_cast<std::size_t>(grid.points - 2));
    for (int i = 1; i <= grid.points - 2; ++i) {
        const double v = 2.0 * inv_h2 + sys.effective_potential(grid.node(i));
        if (!std::isfinite(v)) throw SolverError("radial_operator: potential not finite on the grid");
        t.diag[static_cast<std::size_t>(i - 1)] = v;
    }
    return t;
}

/// Strict sign changes between consecutive samples with |f| > 1e-10.
inline int node_count(std::span<const double> f) {
    int nodes = 0;
    int lastSign = 0;
    for (double v : f) {
        if (std::abs(v) <= 1e-10) continue;
        const int s = v > 0.0 ? 1 : -1;
        if (lastSign != 0 && s != lastSign) ++nodes;
        lastSign = s;
    }
    return nodes;
}

struct EigenSolveResult {
    std::vector<double> energies;             ///< ascending eps = lambda / 2
    std::vector<std::vector<double>> vectors;  ///< f(r) at every grid node, boundary zeros included, sum f^2 h = 1
    std::vector<int> nodeCounts;
    RadialGrid gridUsed;
};

/// Number of finite-difference levels with eps below `epsilon`.
inline std::size_t levels_below(const PhysicalSystem& sys, const RadialGrid& grid, double epsilon) {
    return radial_operator(sys, grid).count_below(2.0 * epsilon);
}

/// Lowest `count` eigenpairs of the discretized radial problem.
inline EigenSolveResult fd_eigensolve(const PhysicalSystem& sys, const RadialGrid& grid, int count) {
    if (count < 1) throw std::invalid_argument("fd_eigensolve: count must be >= 1");
    if (count > grid.points - 2) throw std::invalid_argument("fd_eigensolve: count exceeds interior grid size");
    const auto op = radial_operator(sys, grid);
    const std::size_t m = op.size();
    const double h = grid.spacing();

    EigenSolveResult out;
    out.gridUsed = grid;
    double floor = op.gershgorin().first;
    const double scale = std::max(std::abs(op.gershgorin().first), std::abs(op.gershgorin().second));
    for (int idx = 0; idx < count; ++idx) {
        const double lambda = op.eigenvalue(static_cast<std::size_t>(idx), floor);
        floor = lambda;

        std::vector<double> x(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = 1.0 + 0.1 * std::sin(0.37 * static_cast<double>(i));
        double res = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 3; ++it) {
            x = op.shifted_solve(lambda, std::move(x));
            double norm = 0.0;
            for (double v : x) norm += v * v;
            norm = std::sqrt(norm);
            if (!(norm > 0.0) || !std::isfinite(norm)) throw SolverError("fd_eigensolve: inverse iteration broke down");
            for (double& v : x) v /= norm;
            res = op.residual(lambda, x);
        }
        if (!(res <= 1e-8 * scale)) throw SolverError("fd_eigensolve: inverse iteration did not converge");

        std::vector<double> f(static_cast<std::size_t>(grid.points), 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += x[i] * x[i];
        double norm = 1.0 / std::sqrt(sum * h);
        const double peak = *std::max_element(x.begin(), x.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        for (double v : x) {
            if (std::abs(v) > 1e-10 * std::abs(peak)) {
                if (v < 0.0) norm = -norm;
                break;
            }
        }
        for (std::size_t i = 0; i < m; ++i) f[i + 1] = x[i] * norm;

        out.energies.push_back(lambda / 2.0);
        out.nodeCounts.push_back(node_count(f));
        out.vectors.push_back(std::move(f));
    }
    return out;
}

/// One Richardson step: (4 E(h/2) - E(h)) / 3 for each level; vectors and grid from the refined solve.
inline EigenSolveResult fd_eigensolve_richardson(const PhysicalSystem& sys, const RadialGrid& grid, int count) {
    const auto coarse = fd_eigensolve(sys, grid, count);
    auto fine = fd_eigensolve(sys, grid.refined(), count);
    for (std::size_t i = 0; i < fine.energies.size(); ++i)
        fine.energies[i] = (4.0 * fine.energies[i] - coarse.energies[i]) / 3.0;
    return fine;
}

struct EnergyMatch {
    int index;
    double gap;  ///< oracle energy minus target
};

/// Closest oracle level to epsilon, if within relTol * max(1, |epsilon|).
inline std::optional<EnergyMatch> match_energy(const EigenSolveResult& result, double epsilon, double relTol) {
    if (result.energies.empty()) throw std::invalid_argument("match_energy: empty result");
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.energies.size(); ++i)
        if (std::abs(result.energies[i] - epsilon) < std::abs(result.energies[best] - epsilon)) best = i;
    const double gap = result.energies[best] - epsilon;
    if (std::abs(gap) > relTol * std::max(1.0, std::abs(epsilon))) return std::nullopt;
    return EnergyMatch{static_cast<int>(best), gap};
}

/// Solves enough levels to bracket epsilon on an auto-sized grid and matches it.
struct OracleCheck {
    EigenSolveResult spectrum;
    std::optional<EnergyMatch> match;
};

inline OracleCheck oracle_check(const PhysicalSystem& sys, double epsilon, double relTol, bool richardson = true,
                                int points = kDefaultGridPoints) {
    const RadialGrid grid = auto_grid(sys, epsilon, points);
    const int count = static_cast<int>(levels_below(sys, grid, epsilon + 0.5 * std::max(1.0, std::abs(epsilon)))) + 1;
    OracleCheck out;
    out.spectrum = richardson ? fd_eigensolve_richardson(sys, grid, count) : fd_eigensolve(sys, grid, count);
    out.match = match_energy(out.spectrum, epsilon, relTol);
    return out;
}

}  // namespace heunqes
