#pragma once

// Bi-confluent Heun equation in the real variable z = K r:
//   H'' + (-2z - b + (1+a)/z) H' + (-2 - a + c + D/z) H = 0,  D = -b(a+1)/2 - d/2,
// and its power-series solution H = sum c_j z^j with c_0 = 1.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "heunqes/model.hpp"

namespace heunqes {

struct HeunParameters {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double D = 0.0;

    static double derived_D(double a, double b, double d) { return -b * (a + 1.0) / 2.0 - d / 2.0; }

    static HeunParameters from_abcd(double a, double b, double c, double d) {
        return HeunParameters{a, b, c, d, derived_D(a, b, d)};
    }
};

/// a = 2l+1, b = beta/K^3, c = 2eps/K^2 + b^2/4, d = -2 alpha/K.
inline HeunParameters to_heun_params(const PhysicalSystem& sys, double epsilon) {
    const double K = sys.K();
    const double b = sys.beta() / (K * K * K);
    return HeunParameters::from_abcd(2.0 * sys.l() + 1.0, b, 2.0 * epsilon / (K * K) + b * b / 4.0,
                                     -2.0 * sys.alpha() / K);
}

struct RecurrenceFactors {
    double E;  ///< multiplies c_{n-1}
    double A;  ///< multiplies c_n
};

/// Factors of c_{n+1} = E_{n-1} c_{n-1} + A_n c_n. With a = 2l+1 these are
///   E_{n-1} = (2(n+l) + 1 - c) / ((n+1)(2(l+1)+n)),  A_n = (n b - D) / ((n+1)(2(l+1)+n)).
/// n = 0 gives A_0 = -D/(1+a), the first-coefficient relation.
inline RecurrenceFactors recurrence_factors(const HeunParameters& hp, int n) {
    if (n < 0) throw std::invalid_argument("recurrence_factors: n must be non-negative");
    const double denom = (n + 1.0) * (hp.a + n + 1.0);
    if (denom == 0.0) throw std::domain_error("recurrence_factors: vanishing denominator");
    return {(2.0 * n + hp.a - hp.c) / denom, (n * hp.b - hp.D) / denom};
}

inline constexpr double kTerminationTol = 1e-10;

/// Degree n for which c = a + 2 + 2n, i.e. the c_{n+2} factor vanishes; nullopt if c is not on that ladder.
inline std::optional<int> termination_degree(const HeunParameters& hp) {
    const double half = (hp.c - hp.a - 2.0) / 2.0;
    const double nearest = std::round(half);
    if (nearest < 0.0 || std::abs(half - nearest) > 1e-9 * (1.0 + std::abs(half))) return std::nullopt;
    return static_cast<int>(nearest);
}

class CoefficientSequence {
public:
    CoefficientSequence(std::vector<double> raw, std::optional<int> terminatedAt, double tailResidual)
        : raw_(std::move(raw)), terminatedAt_(terminatedAt), tailResidual_(tailResidual) {}

    /// c_0..c_N exactly as produced by the recurrence.
    const std::vector<double>& raw() const noexcept { return raw_; }
    std::size_t size() const noexcept { return raw_.size(); }
    std::optional<int> terminated_at() const noexcept { return terminatedAt_; }
    /// max(|c_{n+1}|, |c_{n+2}|) / max_{j<=n} |c_j| at the detected termination; 0 when not terminated.
    double tail_residual() const noexcept { return tailResidual_; }

    /// c_j, reading exactly zero past a detected termination.
    double coefficient(std::size_t j) const {
        if (terminatedAt_ && j > static_cast<std::size_t>(*terminatedAt_)) return 0.0;
        return j < raw_.size() ? raw_[j] : 0.0;
    }

    /// The coefficients that make up H: c_0..c_n when terminated, all of them otherwise.
    std::vector<double> polynomial() const {
        if (!terminatedAt_) return raw_;
        return {raw_.begin(), raw_.begin() + *terminatedAt_ + 1};
    }

private:
    std::vector<double> raw_;
    std::optional<int> terminatedAt_;
    double tailResidual_;
};

/// max(|c_{n+1}|, |c_{n+2}|) / max_{j<=n}|c_j| on raw coefficients; requires N >= n+2.
inline double termination_residual(const std::vector<double>& coeffs, int n) {
    if (n < 0 || coeffs.size() < static_cast<std::size_t>(n) + 3)
        throw std::invalid_argument("termination_residual: sequence too short");
    double scale = 0.0;
    for (int j = 0; j <= n; ++j) scale = std::max(scale, std::abs(coeffs[static_cast<std::size_t>(j)]));
    const double tail = std::max(std::abs(coeffs[static_cast<std::size_t>(n) + 1]),
                                 std::abs(coeffs[static_cast<std::size_t>(n) + 2]));
    return tail / scale;
}

/// c_0 = 1 and c_{j+1} = E_{j-1} c_{j-1} + A_j c_j up to index N.
inline CoefficientSequence coefficient_sequence(const HeunParameters& hp, int N) {
    if (N < 0) throw std::invalid_argument("coefficient_sequence: N must be non-negative");
    std::vector<double> c(static_cast<std::size_t>(N) + 1, 0.0);
    c[0] = 1.0;
    for (int j = 0; j < N; ++j) {
        const auto f = recurrence_factors(hp, j);
        const double prev = j >= 1 ? c[static_cast<std::size_t>(j) - 1] : 0.0;
        c[static_cast<std::size_t>(j) + 1] = f.E * prev + f.A * c[static_cast<std::size_t>(j)];
    }

    std::optional<int> terminated;
    double tail = 0.0;
    if (const auto n = termination_degree(hp); n && *n + 2 <= N) {
        const double res = termination_residual(c, *n);
        if (res < kTerminationTol) {
            terminated = *n;
            tail = res;
        }
    }
    return CoefficientSequence(std::move(c), terminated, tail);
}

struct TruncationOrder {
    int order;
};
struct TailTolerance {
    double tol;
    int maxCoefficients = 4000;
};
using SeriesControl = std::variant<TruncationOrder, TailTolerance>;

/// H(z) for z >= 0 from a precomputed sequence (Horner). Terminated sequences sum exactly c_0..c_n.
inline double eval_series(const CoefficientSequence& seq, double z) {
    const auto p = seq.polynomial();
    return horner(std::span<const double>(p), z);
}

/// H(z) for z >= 0. TailTolerance stops once three consecutive terms fall below tol * |partial sum|,
/// and throws std::runtime_error if maxCoefficients is exhausted first.
inline double eval_series(const HeunParameters& hp, double z, SeriesControl control) {
    if (!(z >= 0.0)) throw std::invalid_argument("eval_series: z must be non-negative");
    if (const auto* t = std::get_if<TruncationOrder>(&control)) {
        if (t->order < 0) throw std::invalid_argument("eval_series: truncation order must be non-negative");
        const int n = termination_degree(hp).value_or(-1);
        auto p = coefficient_sequence(hp, std::max(t->order, n + 2)).polynomial();
        if (p.size() > static_cast<std::size_t>(t->order) + 1) p.resize(static_cast<std::size_t>(t->order) + 1);
        return horner(std::span<const double>(p), z);
    }
    const auto& tt = std::get<TailTolerance>(control);
    std::vector<double> c{1.0};
    double sum = 1.0;
    double zp = 1.0;
    int quiet = 0;
    for (int j = 0; j + 1 < tt.maxCoefficients; ++j) {
        const auto f = recurrence_factors(hp, j);
        const double prev = j >= 1 ? c[static_cast<std::size_t>(j) - 1] : 0.0;
        c.push_back(f.E * prev + f.A * c.back());
        zp *= z;
        const double term = c.back() * zp;
        sum += term;
        quiet = std::abs(term) <= tt.tol * std::abs(sum) ? quiet + 1 : 0;
        if (quiet >= 3) return horner(std::span<const double>(c), z);
    }
    throw std::runtime_error("eval_series: tail tolerance not reached within coefficient cap");
}

struct SeriesDerivatives {
    double H, dH, d2H;
};

inline SeriesDerivatives series_derivatives(const std::vector<double>& coeffs, double z) {
    double h = 0.0, dh = 0.0, d2h = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) {
        d2h = d2h * z + 2.0 * dh;
        dh = dh * z + h;
        h = h * z + coeffs[j];
    }
    return {h, dh, d2h};
}

struct OdeResidual {
    double absolute;
    /// Rounding scale: the same left side with every coefficient and term replaced by its magnitude.
    double scale;
    double relative() const { return scale > 0.0 ? absolute / scale : absolute; }
};

inline OdeResidual ode_residual_terms(const HeunParameters& hp, const CoefficientSequence& seq, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("ode_residual: z must be positive");
    const auto coeffs = seq.polynomial();
    const auto [H, dH, d2H] = series_derivatives(coeffs, z);
    std::vector<double> magnitudes(coeffs.size());
    std::transform(coeffs.begin(), coeffs.end(), magnitudes.begin(), [](double v) { return std::abs(v); });
    const auto [mH, mdH, md2H] = series_derivatives(magnitudes, z);
    const double p = -2.0 * z - hp.b + (1.0 + hp.a) / z;
    const double q = -2.0 - hp.a + hp.c + hp.D / z;
    // p and q are themselves sums that may cancel, so their scales are taken term by term
    const double mp = 2.0 * z + std::abs(hp.b) + std::abs(1.0 + hp.a) / z;
    const double mq = 2.0 + std::abs(hp.a) + std::abs(hp.c) + std::abs(hp.D) / z;
    return {std::abs(d2H + p * dH + q * H), md2H + mp * mdH + mq * mH};
}

/// |left side of the Heun equation| at z > 0 using term-wise derivatives of the stored series.
inline double ode_residual(const HeunParameters& hp, const CoefficientSequence& seq, double z) {
    return ode_residual_terms(hp, seq, z).absolute;
}

}  // namespace heunqes
