#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cocycle::arith {

/// 50-digit binary float used for the remainder sequence.
using Real = boost::multiprecision::cpp_bin_float_50;

/// Quadratic surd (a + b*sqrt(d)) / c with d > 0 not a perfect square.
struct Surd {
    std::int64_t a = 0;
    std::int64_t b = 1;
    std::int64_t d = 5;
    std::int64_t c = 2;

    [[nodiscard]] Real value() const;
};

/// A frequency as given by the user: decimal digits or an exact surd.
struct AlphaSpec {
    std::string text;
    std::optional<Surd> surd;
    Real value;
};

/// Parses "golden", "silver", "(a+b*sqrt(d))/c" or a decimal string.
/// Throws std::invalid_argument on malformed input.
[[nodiscard]] AlphaSpec parse_alpha(const std::string& text);

/**
 * @brief Continued-fraction data of alpha in (0,1).
 *
 * Vectors are indexed by n starting at 0: a[0] = 0 (integer part),
 * q[0] = 1, p[0] = 0, alpha_seq[0] = alpha, beta[0] = alpha.
 * Values for n = -1 are beta = 1, q = 0, p = 1 (see q_at/p_at).
 */
struct ContinuedFraction {
    Real alpha;
    std::vector<std::int64_t> a;
    std::vector<std::int64_t> p;
    std::vector<std::int64_t> q;
    std::vector<Real> alpha_seq;
    std::vector<Real> beta;
    bool terminated = false;  ///< rational input ran out before the requested depth

    [[nodiscard]] int depth() const { return static_cast<int>(a.size()) - 1; }
    [[nodiscard]] std::int64_t q_at(int n) const;
    [[nodiscard]] std::int64_t p_at(int n) const;
    [[nodiscard]] Real beta_at(int n) const;
    [[nodiscard]] double alpha_d() const { return static_cast<double>(alpha); }
    /// a_1..a_depth
    [[nodiscard]] std::vector<std::int64_t> partial_quotients() const;
    /// q_1..q_depth
    [[nodiscard]] std::vector<std::int64_t> denominators() const;
};

[[nodiscard]] ContinuedFraction cf_expand(const Real& alpha, int depth);
/// Exact integer Gauss map on the surd; remainders are evaluated from exact surds.
[[nodiscard]] ContinuedFraction cf_expand(const Surd& s, int depth);
[[nodiscard]] ContinuedFraction cf_expand(const AlphaSpec& spec, int depth);

/// Distance to the nearest integer.
[[nodiscard]] inline double dist_z(double x) { return std::abs(x - std::nearbyint(x)); }

struct DiophantineParams {
    double gamma = 3.0;
    double tau = 1.0;
};

struct DiophantineReport {
    bool ok = true;
    std::int64_t worst_k = 0;
    double worst_value = 0.0;  ///< min over k of |k alpha|_Z * |k|^tau * gamma
};

/// Checks |k alpha|_Z >= 1/(gamma |k|^tau) for 0 < k <= k_max.
[[nodiscard]] DiophantineReport is_diophantine(const Real& alpha, const DiophantineParams& params,
                                               std::int64_t k_max = 100000);

/// Indices n <= depth with G^n(alpha) passing is_diophantine.
[[nodiscard]] std::vector<int> rdc_trace(const ContinuedFraction& cf, const DiophantineParams& params,
                                         std::int64_t k_max = 100000);

/// S_n phi(x) = sum_{k<n} phi(x + k alpha).
template <class F>
[[nodiscard]] auto birkhoff_sum(const F& phi, double alpha, std::int64_t n, double x) {
    using R = decltype(phi(x));
    R acc{};
    for (std::int64_t k = 0; k < n; ++k) acc += phi(x + static_cast<double>(k) * alpha);
    return acc;
}

/// Real trigonometric polynomial sum_k c_k e^{2 i pi k x} with conjugate-symmetric c.
struct TrigPoly {
    int degree = 0;
    std::vector<std::complex<double>> coeffs;  ///< index k + degree

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double derivative(double x) const;
    /// Total variation over one period, by quadrature of |phi'| on `samples` points.
    [[nodiscard]] double variation(int samples = 1 << 15) const;
};

}  // namespace cocycle::arith
