#pragma once

#include "cocycle/arithmetic.hpp"
#include "cocycle/maps.hpp"

#include <stdexcept>

namespace cocycle::coh {

using maps::cd;
using maps::Series;

/// Raised when a divisor e^{2 i pi k alpha} - 1 falls below the allowed floor.
class SmallDivisorError : public std::runtime_error {
public:
    SmallDivisorError(int k, double divisor);
    int k;
    double divisor;
};

struct LinearSolution {
    Series psi;             ///< zero-mean solution
    cd obstruction = 0.0;   ///< the mean of phi, which no coboundary can absorb
    double min_divisor = 0.0;
    int min_divisor_k = 0;
    double bound_ratio = 0.0;  ///< |psi|_0 / (gamma |phi|_{tau + 1/2}), observed
};

/**
 * @brief Solves psi(x + alpha) - psi(x) = phi(x) - mean(phi) for a series of period P.
 * @param floor divisors below this value raise SmallDivisorError.
 */
[[nodiscard]] LinearSolution solve_linear(const Series& phi, double alpha, int period = 1,
                                          const arith::DiophantineParams& params = {}, double floor = 1e-14);

/// Sup over a grid of |psi(x + alpha) - psi(x) - phi(x) + obstruction|.
[[nodiscard]] double linear_residual(const LinearSolution& s, const Series& phi, double alpha, int period = 1,
                                     int grid = 0);

struct TwistedSolution {
    Series f;
    Series obstruction;  ///< supported in [window_lo, window_hi]
    int m = 0;
    double c = 0.0;
    int window_lo = 0;
    int window_hi = 0;
    double min_divisor = 1.0;  ///< all divisors are unimodular
    double growth_ratio = 0.0; ///< |f|_0 / |g|_3, observed
};

/**
 * @brief Solves f(x + alpha) - e^{2 i pi (m x / P + c)} f(x) = g(x) - G(x), with G supported in the
 * window {hi - |m| + 1, ..., hi}. Modes k stand for e^{2 i pi k x / P}.
 */
[[nodiscard]] TwistedSolution solve_twisted_window(const Series& g, int m, double c, double alpha, int hi,
                                                   int period = 1);

/// Window {-|m| + 1, ..., 0}.
[[nodiscard]] TwistedSolution solve_twisted(const Series& g, int m, double c, double alpha, int period = 1);

/// Window {-|m| + 1 - Nprime, ..., -Nprime}; requires 0 <= Nprime < N and g band-limited at N.
[[nodiscard]] TwistedSolution solve_twisted_translated(const Series& g, int m, double c, double alpha, int N,
                                                       int Nprime, int period = 1);

/// Sup over a grid of |f(x + alpha) - e^{2 i pi (m x / P + c)} f(x) - g(x) + G(x)|.
[[nodiscard]] double twisted_residual(const TwistedSolution& s, const Series& g, double alpha, int period = 1,
                                      int grid = 0);

}  // namespace cocycle::coh
