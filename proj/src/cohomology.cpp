#include "cocycle/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cocycle::coh {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

cd phase(double t) { return std::polar(1.0, kTwoPi * t); }

std::string divisor_message(int k, double d) {
    std::ostringstream os;
    os << "small divisor " << d << " at mode " << k;
    return os.str();
}

int default_grid(const Series& a, const Series& b, int shift) {
    int M = 8;
    for (const Series* s : {&a, &b})
        if (!s->empty()) M = std::max({M, std::abs(s->kmin), std::abs(s->kmax())});
    return 4 * (M + std::abs(shift)) + 16;
}

double sup_series(const Series& s, int period) {
    if (s.empty()) return 0.0;
    double out = 0.0;
    const int G = default_grid(s, s, 0);
    for (int j = 0; j < G; ++j) out = std::max(out, std::abs(s.eval(static_cast<double>(period) * j / G, period)));
    return out;
}

// Sobolev-type weight sum_k |c_k| (1 + |k|)^s, an upper bound for the C^s norm up to 2 pi factors.
double weighted_l1(const Series& s, double w) {
    double out = 0.0;
    for (int k = s.kmin; k <= s.kmax(); ++k) out += std::abs(s.at(k)) * std::pow(1.0 + std::abs(k), w);
    return out;
}

}  // namespace

SmallDivisorError::SmallDivisorError(int k_, double d) : std::runtime_error(divisor_message(k_, d)), k(k_), divisor(d) {}

LinearSolution solve_linear(const Series& phi, double alpha, int period, const arith::DiophantineParams& params,
                            double floor) {
    LinearSolution out;
    out.min_divisor = 2.0;
    out.obstruction = phi.at(0);
    if (phi.empty()) return out;
    out.psi = Series::zeros(phi.kmin, phi.kmax());
    const double a = alpha / period;
    for (int k = phi.kmin; k <= phi.kmax(); ++k) {
        if (k == 0) continue;
        const cd div = phase(k * a) - 1.0;
        const double d = std::abs(div);
        if (phi.at(k) == cd(0.0)) continue;
        if (d < out.min_divisor) {
            out.min_divisor = d;
            out.min_divisor_k = k;
        }
        if (d < floor) throw SmallDivisorError(k, d);
        out.psi.set(k, phi.at(k) / div);
    }
    const double rhs = params.gamma * weighted_l1(phi, params.tau + 0.5);
    out.bound_ratio = rhs > 0 ? sup_series(out.psi, period) / rhs : 0.0;
    return out;
}

double linear_residual(const LinearSolution& s, const Series& phi, double alpha, int period, int grid) {
    const int G = grid > 0 ? grid : default_grid(s.psi, phi, 0);
    double out = 0.0;
    for (int j = 0; j < G; ++j) {
        const double x = static_cast<double>(period) * j / G;
        const cd lhs = s.psi.eval(x + alpha, period) - s.psi.eval(x, period);
        out = std::max(out, std::abs(lhs - phi.eval(x, period) + s.obstruction));
    }
    return out;
}

TwistedSolution solve_twisted_window(const Series& g, int m, double c, double alpha, int hi, int period) {
    if (m == 0) throw std::invalid_argument("solve_twisted: twisted frequency must be nonzero");
    TwistedSolution out;
    out.m = m;
    out.c = c;
    const int n = std::abs(m);
    out.window_lo = hi - n + 1;
    out.window_hi = hi;
    if (g.empty()) return out;
    const double a = alpha / period;
    const cd ec = phase(c), emc = phase(-c);
    const int lo_f = std::min(g.kmin, out.window_lo) - n;
    const int hi_f = std::max(g.kmax(), out.window_hi) + n;
    Series f = Series::zeros(lo_f, hi_f);
    if (m > 0) {
        const int l = hi - m;
        // bottom chain: equation at k holds for k <= l
        for (int k = g.kmin; k <= l; ++k) f.set(k, phase(-k * a) * (g.at(k) + ec * f.at(k - m)));
        // top chain: equation at k + m holds for k + m > hi
        for (int k = g.kmax() - m; k > l; --k) f.set(k, emc * (phase((k + m) * a) * f.at(k + m) - g.at(k + m)));
    } else {
        // top chain: equation at k holds for k > hi
        for (int k = g.kmax(); k > hi; --k) f.set(k, phase(-k * a) * (g.at(k) + ec * f.at(k + n)));
        // bottom chain: equation at k - n holds for k - n <= hi - n
        for (int k = g.kmin + n; k <= hi; ++k) f.set(k, emc * (phase((k - n) * a) * f.at(k - n) - g.at(k - n)));
    }
    out.obstruction = Series::zeros(out.window_lo, out.window_hi);
    for (int k = out.window_lo; k <= out.window_hi; ++k)
        out.obstruction.set(k, g.at(k) - phase(k * a) * f.at(k) + ec * f.at(k - m));
    f.trim();
    out.f = std::move(f);
    const double rhs = weighted_l1(g, 3.0);
    out.growth_ratio = rhs > 0 ? sup_series(out.f, period) / rhs : 0.0;
    return out;
}

TwistedSolution solve_twisted(const Series& g, int m, double c, double alpha, int period) {
    return solve_twisted_window(g, m, c, alpha, 0, period);
}

TwistedSolution solve_twisted_translated(const Series& g, int m, double c, double alpha, int N, int Nprime,
                                         int period) {
    if (Nprime < 0 || Nprime >= N) throw std::invalid_argument("solve_twisted_translated: need 0 <= N' < N");
    if (!g.empty() && (g.kmin < -N || g.kmax() > N))
        throw std::invalid_argument("solve_twisted_translated: g is not band-limited at N");
    return solve_twisted_window(g, m, c, alpha, -Nprime, period);
}

double twisted_residual(const TwistedSolution& s, const Series& g, double alpha, int period, int grid) {
    const int G = grid > 0 ? grid : default_grid(s.f, g, s.m);
    double out = 0.0;
    for (int j = 0; j < G; ++j) {
        const double x = static_cast<double>(period) * j / G;
        const cd lhs = s.f.eval(x + alpha, period) - phase(s.m * x / period + s.c) * s.f.eval(x, period);
        out = std::max(out, std::abs(lhs - g.eval(x, period) + s.obstruction.eval(x, period)));
    }
    return out;
}

}  // namespace cocycle::coh
