#include "cocycle/arithmetic.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <limits>
#include <numbers>
#include <regex>
#include <stdexcept>

namespace cocycle::arith {

namespace {

using boost::multiprecision::cpp_int;

cpp_int isqrt(const cpp_int& n) {
    if (n < 0) throw std::invalid_argument("isqrt of negative");
    return boost::multiprecision::sqrt(n);
}

cpp_int floor_div(const cpp_int& num, const cpp_int& den) {
    cpp_int q = num / den;
    cpp_int r = num % den;
    if (r != 0 && ((r < 0) != (den < 0))) q -= 1;
    return q;
}

bool is_square(std::int64_t d) {
    if (d < 0) return false;
    cpp_int r = isqrt(cpp_int(d));
    return r * r == d;
}

// x = (P + sqrt(D)) / Q, D not a square, Q | D - P^2.
struct ReducedSurd {
    cpp_int P, Q, D;

    [[nodiscard]] Real value() const {
        Real sd = boost::multiprecision::sqrt(Real(D));
        return (Real(P) + sd) / Real(Q);
    }

    // floor(x), exact.
    [[nodiscard]] cpp_int floor() const {
        cpp_int s = isqrt(D);
        if (Q > 0) return floor_div(P + s, Q);
        // (P + sqrt D)/Q = (-P - sqrt D)/|Q|, and -P - sqrt D lies in (-P-s-1, -P-s).
        return floor_div(-P - s - 1, -Q);
    }
};

ReducedSurd to_reduced(const Surd& s) {
    if (s.c == 0) throw std::invalid_argument("surd with zero denominator");
    if (s.d <= 0 || is_square(s.d)) throw std::invalid_argument("surd radicand must be a positive non-square");
    if (s.b == 0) throw std::invalid_argument("surd with b = 0 is rational");
    cpp_int sigma = s.b > 0 ? 1 : -1;
    cpp_int a = sigma * s.a, b = sigma * s.b, c = sigma * s.c;
    cpp_int ac = c < 0 ? cpp_int(-c) : c;
    ReducedSurd r;
    r.P = a * ac;
    r.D = b * b * s.d * c * c;
    r.Q = c * ac;
    return r;
}

void push_convergent(ContinuedFraction& cf, std::int64_t an) {
    const int n = static_cast<int>(cf.a.size());
    cf.a.push_back(an);
    cf.q.push_back(an * cf.q_at(n - 1) + cf.q_at(n - 2));
    cf.p.push_back(an * cf.p_at(n - 1) + cf.p_at(n - 2));
}

void init(ContinuedFraction& cf, const Real& alpha) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
    cf.alpha = alpha;
    cf.a = {0};
    cf.p = {0};
    cf.q = {1};
    cf.alpha_seq = {alpha};
    cf.beta = {alpha};
}

}  // namespace

Real Surd::value() const {
    return (Real(a) + Real(b) * boost::multiprecision::sqrt(Real(d))) / Real(c);
}

AlphaSpec parse_alpha(const std::string& text) {
    AlphaSpec spec;
    spec.text = text;
    if (text == "golden") {
        spec.surd = Surd{-1, 1, 5, 2};
    } else if (text == "silver") {
        spec.surd = Surd{-1, 1, 2, 1};
    } else {
        static const std::regex surd_re(
            R"(^\s*\(\s*(-?\d+)\s*([+-])\s*(\d+)\s*\*?\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*/\s*(-?\d+)\s*$)");
        std::smatch m;
        if (std::regex_match(text, m, surd_re)) {
            Surd s;
            s.a = std::stoll(m[1]);
            s.b = std::stoll(m[3]) * (m[2] == "-" ? -1 : 1);
            s.d = std::stoll(m[4]);
            s.c = std::stoll(m[5]);
            spec.surd = s;
        } else {
            static const std::regex dec_re(R"(^\s*0?\.\d+([eE][-+]?\d+)?\s*$)");
            if (!std::regex_match(text, dec_re))
                throw std::invalid_argument("alpha must be 'golden', 'silver', '(a+b*sqrt(d))/c' or a decimal in (0,1)");
            spec.value = Real(text);
        }
    }
    if (spec.surd) {
        (void)to_reduced(*spec.surd);
        spec.value = spec.surd->value();
    }
    if (!(spec.value > 0 && spec.value < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
    return spec;
}

std::int64_t ContinuedFraction::q_at(int n) const {
    if (n == -2) return 1;
    if (n == -1) return 0;
    return q.at(static_cast<std::size_t>(n));
}

std::int64_t ContinuedFraction::p_at(int n) const {
    if (n == -2) return 0;
    if (n == -1) return 1;
    return p.at(static_cast<std::size_t>(n));
}

Real ContinuedFraction::beta_at(int n) const {
    if (n == -1) return Real(1);
    return beta.at(static_cast<std::size_t>(n));
}

std::vector<std::int64_t> ContinuedFraction::partial_quotients() const {
    return {a.begin() + 1, a.end()};
}

std::vector<std::int64_t> ContinuedFraction::denominators() const {
    return {q.begin() + 1, q.end()};
}

ContinuedFraction cf_expand(const Real& alpha, int depth) {
    if (depth < 1) throw std::invalid_argument("depth must be positive");
    ContinuedFraction cf;
    init(cf, alpha);
    Real x = alpha;
    for (int n = 1; n <= depth; ++n) {
        // remainders at the working precision are rounding residue of a rational input
        if (x < Real("1e-40")) {
            cf.terminated = true;
            break;
        }
        Real inv = 1 / x;
        if (inv >= Real(std::numeric_limits<std::int64_t>::max())) {
            cf.terminated = true;
            break;
        }
        Real an = floor(inv);
        x = inv - an;
        push_convergent(cf, static_cast<std::int64_t>(an));
        cf.alpha_seq.push_back(x);
        cf.beta.push_back(cf.beta.back() * x);
    }
    return cf;
}

ContinuedFraction cf_expand(const Surd& s, int depth) {
    if (depth < 1) throw std::invalid_argument("depth must be positive");
    ContinuedFraction cf;
    ReducedSurd x = to_reduced(s);
    init(cf, x.value());
    if (x.floor() != 0) throw std::invalid_argument("alpha must lie in (0,1)");
    // 1/alpha = (-P + sqrt D) / ((D - P^2)/Q)
    ReducedSurd y{-x.P, (x.D - x.P * x.P) / x.Q, x.D};
    for (int n = 1; n <= depth; ++n) {
        cpp_int an = y.floor();
        push_convergent(cf, static_cast<std::int64_t>(an));
        // remainder alpha_n = y - a_n; next y = 1/(y - a_n)
        ReducedSurd rem{y.P - an * y.Q, y.Q, y.D};
        Real alpha_n = rem.value();
        cf.alpha_seq.push_back(alpha_n);
        cf.beta.push_back(cf.beta.back() * alpha_n);
        cpp_int P2 = an * y.Q - y.P;
        y = ReducedSurd{P2, (y.D - P2 * P2) / y.Q, y.D};
    }
    return cf;
}

ContinuedFraction cf_expand(const AlphaSpec& spec, int depth) {
    if (spec.surd) return cf_expand(*spec.surd, depth);
    return cf_expand(spec.value, depth);
}

DiophantineReport is_diophantine(const Real& alpha, const DiophantineParams& params, std::int64_t k_max) {
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    DiophantineReport rep;
    rep.worst_value = std::numeric_limits<double>::infinity();
    // Reduce k*alpha mod 1 incrementally in extended precision to keep k_max large cheap and exact.
    const Real frac = alpha - floor(alpha);
    Real acc = 0;
    for (std::int64_t k = 1; k <= k_max; ++k) {
        acc += frac;
        if (acc >= 1) acc -= 1;
        const double d = dist_z(static_cast<double>(acc));
        const double v = d * std::pow(static_cast<double>(k), params.tau) * params.gamma;
        if (v < rep.worst_value) {
            rep.worst_value = v;
            rep.worst_k = k;
        }
    }
    rep.ok = rep.worst_value >= 1.0;
    return rep;
}

std::vector<int> rdc_trace(const ContinuedFraction& cf, const DiophantineParams& params, std::int64_t k_max) {
    std::vector<int> out;
    for (int n = 0; n <= cf.depth(); ++n) {
        const Real& an = cf.alpha_seq[static_cast<std::size_t>(n)];
        if (an <= 0) break;
        if (is_diophantine(an, params, k_max).ok) out.push_back(n);
    }
    return out;
}

double TrigPoly::operator()(double x) const {
    std::complex<double> acc = 0;
    for (int k = -degree; k <= degree; ++k)
        acc += coeffs[static_cast<std::size_t>(k + degree)] * std::polar(1.0, 2 * std::numbers::pi * k * x);
    return acc.real();
}

double TrigPoly::derivative(double x) const {
    std::complex<double> acc = 0;
    for (int k = -degree; k <= degree; ++k)
        acc += coeffs[static_cast<std::size_t>(k + degree)] * std::complex<double>(0, 2 * std::numbers::pi * k) *
               std::polar(1.0, 2 * std::numbers::pi * k * x);
    return acc.real();
}

double TrigPoly::variation(int samples) const {
    double acc = 0;
    for (int i = 0; i < samples; ++i) acc += std::abs(derivative(static_cast<double>(i) / samples));
    return acc / samples;
}

}  // namespace cocycle::arith
