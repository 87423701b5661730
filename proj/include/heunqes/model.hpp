#pragma once

// Physical system U = -alpha/r + beta r + k r^2 in scaled units, where the
// radial function f = r R obeys
//   f'' + (2 eps + alpha/r - l(l+1)/r^2 - beta r - k r^2) f = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "heunqes/polynomial.hpp"

namespace heunqes {

class PhysicalSystem {
public:
    /// Throws std::invalid_argument unless k > 0, alpha >= 0, l >= 0 and all values are finite.
    PhysicalSystem(double alpha, double beta, double k, int l) : alpha_(alpha), beta_(beta), k_(k), l_(l) {
        if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(k))
            throw std::invalid_argument("PhysicalSystem: parameters must be finite");
        if (!(k > 0.0)) throw std::invalid_argument("PhysicalSystem: k must be positive");
        if (alpha < 0.0) throw std::invalid_argument("PhysicalSystem: alpha must be non-negative");
        if (l < 0) throw std::invalid_argument("PhysicalSystem: l must be non-negative");
        scale_ = std::sqrt(std::sqrt(k));
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double k() const noexcept { return k_; }
    int l() const noexcept { return l_; }
    /// Quartic scale K = k^(1/4).
    double K() const noexcept { return scale_; }
    double centrifugal() const noexcept { return static_cast<double>(l_) * (l_ + 1); }

    /// The system in units where K = 1: (alpha/K, beta/K^3, 1).
    PhysicalSystem unit_scaled() const {
        return PhysicalSystem(alpha_ / scale_, beta_ / (scale_ * scale_ * scale_), 1.0, l_);
    }

    /// Potential entering the operator -f'' + V f = 2 eps f.
    double effective_potential(double r) const {
        return -alpha_ / r + centrifugal() / (r * r) + beta_ * r + k_ * r * r;
    }

private:
    double alpha_;
    double beta_;
    double k_;
    int l_;
    double scale_;
};

/// P^2(r) = 2 eps + alpha/r - l(l+1)/r^2 - beta r - k r^2.
inline double effective_momentum_squared(const PhysicalSystem& sys, double epsilon, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("effective_momentum_squared: r must be positive");
    return 2.0 * epsilon - sys.effective_potential(r);
}

/// -k r^4 - beta r^3 + 2 eps r^2 + alpha r - l(l+1), ascending coefficients.
inline Polynomial turning_point_quartic(const PhysicalSystem& sys, double epsilon) {
    return Polynomial({-sys.centrifugal(), sys.alpha(), 2.0 * epsilon, -sys.beta(), -sys.k()});
}

struct TurningPointSet {
    /// Real roots ascending, then conjugate pairs by ascending real part.
    std::array<std::complex<double>, 4> roots{};
    int realCount = 0;
    std::array<double, 4> vietaResiduals{};

    /// Largest positive real root (the outer turning point), or NaN if none.
    double outer() const {
        double best = std::numeric_limits<double>::quiet_NaN();
        for (int i = 0; i < realCount; ++i) {
            const double r = roots[static_cast<std::size_t>(i)].real();
            if (r > 0.0 && !(r <= best)) best = r;
        }
        return best;
    }
};

inline constexpr double kTurningPointRealTol = 1e-9;

/// |sum r_i + beta/k|, |e2 + 2eps/k|, |e3 - alpha/k|, |e4 - l(l+1)/k|.
inline std::array<double, 4> vieta_residuals(const TurningPointSet& tp, const PhysicalSystem& sys, double epsilon) {
    using C = std::complex<double>;
    const auto& r = tp.roots;
    C e1{0}, e2{0}, e3{0}, e4{1};
    for (std::size_t i = 0; i < 4; ++i) {
        e1 += r[i];
        e4 *= r[i];
        for (std::size_t j = i + 1; j < 4; ++j) {
            e2 += r[i] * r[j];
            for (std::size_t m = j + 1; m < 4; ++m) e3 += r[i] * r[j] * r[m];
        }
    }
    const double k = sys.k();
    return {std::abs(e1 + sys.beta() / k), std::abs(e2 + 2.0 * epsilon / k), std::abs(e3 - sys.alpha() / k),
            std::abs(e4 - sys.centrifugal() / k)};
}

inline TurningPointSet turning_points(const PhysicalSystem& sys, double epsilon) {
    const Polynomial quartic = turning_point_quartic(sys, epsilon);
    const auto found = companion_roots(quartic);

    std::vector<double> real;
    std::vector<std::complex<double>> complex;
    for (const auto& z : found.roots) {
        if (is_real_root(z, kTurningPointRealTol))
            real.push_back(z.real() == 0.0 ? 0.0 : polish_real_root(quartic, z.real()));
        else
            complex.push_back(z);
    }
    std::sort(real.begin(), real.end());
    // Rebuild conjugate pairs from the upper-half-plane members.
    std::vector<std::complex<double>> upper;
    for (const auto& z : complex)
        if (z.imag() > 0.0) upper.push_back(z);
    std::sort(upper.begin(), upper.end(), [](auto x, auto y) { return x.real() < y.real(); });
    std::vector<std::complex<double>> paired;
    for (const auto& z : upper) {
        paired.push_back(std::conj(z));
        paired.push_back(z);
    }
    if (paired.size() != complex.size()) throw std::runtime_error("turning_points: unpaired complex root");

    TurningPointSet out;
    out.realCount = static_cast<int>(real.size());
    std::size_t idx = 0;
    for (double x : real) out.roots[idx++] = {x, 0.0};
    for (const auto& z : paired) out.roots[idx++] = z;
    out.vietaResiduals = vieta_residuals(out, sys, epsilon);
    return out;
}

}  // namespace heunqes
