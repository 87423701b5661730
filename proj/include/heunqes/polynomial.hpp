#pragma once

// Dense real polynomials in ascending-coefficient form and a companion-matrix
// root finder with Newton polishing.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace heunqes {

/// Evaluates sum_j coeffs[j] x^j by Horner's scheme. Works for real or complex x.
template <typename Scalar>
Scalar horner(std::span<const double> coeffs, Scalar x) {
    Scalar acc{0};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + Scalar(*it);
    return acc;
}

/// Value and first derivative in one Horner pass.
template <typename Scalar>
std::pair<Scalar, Scalar> horner_with_derivative(std::span<const double> coeffs, Scalar x) {
    Scalar p{0}, dp{0};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        dp = dp * x + p;
        p = p * x + Scalar(*it);
    }
    return {p, dp};
}

class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {}

    static Polynomial constant(double v) { return Polynomial({v}); }
    /// offset + slope * x
    static Polynomial linear(double offset, double slope) { return Polynomial({offset, slope}); }

    const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    std::size_t size() const noexcept { return coeffs_.size(); }
    double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }

    /// Degree ignoring exactly-zero leading coefficients; -1 for the zero polynomial.
    int degree() const noexcept {
        for (std::size_t i = coeffs_.size(); i-- > 0;)
            if (coeffs_[i] != 0.0) return static_cast<int>(i);
        return -1;
    }

    template <typename Scalar>
    Scalar operator()(Scalar x) const {
        return horner(std::span<const double>(coeffs_), x);
    }

    /// Sum of |p_i| |x|^i, the natural rounding scale of an evaluation at x.
    double magnitude_at(double x) const {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * std::abs(x) + std::abs(*it);
        return acc;
    }

    Polynomial derivative() const {
        if (coeffs_.size() <= 1) return constant(0.0);
        std::vector<double> d(coeffs_.size() - 1);
        for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
        return Polynomial(std::move(d));
    }

    Polynomial& operator+=(const Polynomial& rhs) {
        if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
        for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
        return *this;
    }
    Polynomial& operator*=(double s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) { return lhs += rhs; }
    friend Polynomial operator*(Polynomial p, double s) { return p *= s; }
    friend Polynomial operator*(double s, Polynomial p) { return p *= s; }
    friend Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs) {
        if (lhs.coeffs_.empty() || rhs.coeffs_.empty()) return constant(0.0);
        std::vector<double> out(lhs.coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < lhs.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) out[i + j] += lhs.coeffs_[i] * rhs.coeffs_[j];
        return Polynomial(std::move(out));
    }

private:
    std::vector<double> coeffs_;
};

/// All roots of a real polynomial, with multiplicity.
struct PolynomialRoots {
    std::vector<std::complex<double>> roots;
};

namespace detail {

inline std::complex<double> newton_polish(std::span<const double> coeffs, std::complex<double> z, int maxIter = 8) {
    auto [p, dp] = horner_with_derivative(coeffs, z);
    for (int it = 0; it < maxIter; ++it) {
        if (p == 0.0 || dp == 0.0) break;
        const std::complex<double> next = z - p / dp;
        auto [pn, dpn] = horner_with_derivative(coeffs, next);
        if (!(std::abs(pn) < std::abs(p))) break;
        z = next;
        p = pn;
        dp = dpn;
    }
    return z;
}

}  // namespace detail

/// Roots of the polynomial via eigenvalues of its companion matrix, each
/// refined by Newton iteration on the original coefficients. Exactly-zero
/// low-order coefficients are factored out so that roots at the origin are
/// returned as exact zeros.
inline PolynomialRoots companion_roots(const Polynomial& poly) {
    const int deg = poly.degree();
    if (deg < 1) throw std::invalid_argument("companion_roots: polynomial degree must be >= 1");
    const auto& all = poly.coefficients();

    PolynomialRoots out;
    std::size_t low = 0;
    while (all[low] == 0.0) {
        out.roots.emplace_back(0.0, 0.0);
        ++low;
    }
    const std::span<const double> full(all.data(), static_cast<std::size_t>(deg) + 1);
    const std::span<const double> reduced = full.subspan(low);
    const int m = static_cast<int>(reduced.size()) - 1;
    if (m == 0) return out;

    const double lead = reduced[static_cast<std::size_t>(m)];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i) companion(i, m - 1) = -reduced[static_cast<std::size_t>(i)] / lead;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("companion_roots: eigenvalue iteration failed");
    const auto ev = solver.eigenvalues();
    for (int i = 0; i < m; ++i) {
        std::complex<double> z = ev[i];
        z = detail::newton_polish(full, z);
        out.roots.push_back(z);
    }
    return out;
}

/// Newton refinement restricted to the real axis.
inline double polish_real_root(const Polynomial& poly, double x) {
    const std::span<const double> c(poly.coefficients());
    auto [p, dp] = horner_with_derivative(c, x);
    for (int it = 0; it < 8; ++it) {
        if (p == 0.0 || dp == 0.0) break;
        const double next = x - p / dp;
        auto [pn, dpn] = horner_with_derivative(c, next);
        if (!(std::abs(pn) < std::abs(p))) break;
        x = next;
        p = pn;
        dp = dpn;
    }
    return x;
}

/// Real-root test |Im| <= tol * (1 + |Re|).
inline bool is_real_root(std::complex<double> z, double tol) {
    return std::abs(z.imag()) <= tol * (1.0 + std::abs(z.real()));
}

}  // namespace heunqes
