#include "cocycle/cocycle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace cocycle::dyn {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads; }

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int t = std::min(threads(), n);
    if (t <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += t) fn(i);
        });
    for (auto& th : pool) th.join();
}

Cocycle iterate(const Cocycle& c, long n) {
    if (n == 0) return {0.0, GroupMap::identity(c.group())};
    return {static_cast<double>(n) * c.alpha, c.map.iterate(c.alpha, n)};
}

Cocycle conjugate(const Cocycle& c, const GroupMap& B) {
    return {c.alpha, B.translate(c.alpha) * c.map * B.inverse()};
}

FiberWalk fiber_walk(const Cocycle& c, const std::vector<double>& xs, const std::vector<long>& record_at,
                     bool keep_group) {
    FiberWalk out;
    out.ns = record_at;
    if (!std::is_sorted(record_at.begin(), record_at.end()) || (!record_at.empty() && record_at.front() < 1))
        throw std::invalid_argument("fiber_walk: record_at must be positive and ascending");
    const std::size_t R = record_at.size(), X = xs.size();
    out.a.assign(R, std::vector<Alg>(X));
    if (keep_group) out.A.assign(R, std::vector<Grp>(X));
    const long nmax = record_at.empty() ? 0 : record_at.back();
    parallel_for(static_cast<int>(X), [&](int j) {
        const double x = xs[static_cast<std::size_t>(j)];
        Alg a = lie::zero(c.group());
        Grp A = lie::identity(c.group());
        std::size_t next = 0;
        for (long k = 0; k < nmax; ++k) {
            const Jet jk = c.jet(x + static_cast<double>(k) * c.alpha);
            a = jk.s + lie::Ad(jk.S, a);
            A = jk.S * A;
            if ((k & 63) == 63) lie::reunitarize(A);
            while (next < R && record_at[next] == k + 1) {
                out.a[next][static_cast<std::size_t>(j)] = a;
                if (keep_group) out.A[next][static_cast<std::size_t>(j)] = A;
                ++next;
            }
        }
    });
    return out;
}

AlgebraMap fiber_derivative(const Cocycle& c, long n, int M) {
    if (n < 1) throw std::invalid_argument("fiber_derivative: n must be >= 1");
    const int P = c.period() > 0 ? c.period() : 1;
    const int G = std::max(4 * M, 64);
    std::vector<double> xs(static_cast<std::size_t>(G));
    for (int j = 0; j < G; ++j) xs[static_cast<std::size_t>(j)] = static_cast<double>(P) * j / G;
    const FiberWalk w = fiber_walk(c, xs, {n});
    return maps::fourier_samples(c.group(), w.a[0], M, P);
}

std::vector<Alg> transfer_apply_samples(const Cocycle& c, const std::function<Alg(double)>& b, int G) {
    std::vector<Alg> out(static_cast<std::size_t>(G));
    const int P = c.period() > 0 ? c.period() : 1;
    for (int j = 0; j < G; ++j) {
        const double x = static_cast<double>(P) * j / G;
        out[static_cast<std::size_t>(j)] = lie::Ad(lie::inverse(c(x)), b(x + c.alpha));
    }
    return out;
}

AlgebraMap transfer_apply(const Cocycle& c, const AlgebraMap& b, int M) {
    const int G = std::max(4 * M, 64);
    const int P = c.period() > 0 ? c.period() : 1;
    return maps::fourier_samples(c.group(), transfer_apply_samples(c, [&](double x) { return b.eval(x); }, G), M, P);
}

std::vector<std::pair<int, long>> convergent_schedule(const arith::ContinuedFraction& cf, long q_cap) {
    std::vector<std::pair<int, long>> out;
    long last = 0;
    for (int k = 1; k <= cf.depth(); ++k) {
        const long q = cf.q_at(k);
        if (q > q_cap) break;
        if (q != last) out.emplace_back(k, q);
        last = q;
    }
    return out;
}

EnergyReport energy_and_degree(const Cocycle& c, const arith::ContinuedFraction& cf, const EnergyOptions& opts) {
    if (opts.grid < 1024) throw std::invalid_argument("energy_and_degree: grid must be at least 1024");
    EnergyReport rep;
    rep.g = c.group();
    const auto sched = convergent_schedule(cf, opts.q_cap);
    if (sched.empty()) throw std::invalid_argument("energy_and_degree: no denominator below the cap");
    const int G = opts.grid, S = opts.nu_samples;
    std::vector<double> xs(static_cast<std::size_t>(G + 2 * S));
    for (int j = 0; j < G; ++j) xs[static_cast<std::size_t>(j)] = static_cast<double>(j) / G;
    for (int i = 0; i < S; ++i) {
        const double nu = static_cast<double>(i) / S;
        rep.nus.push_back(nu);
        xs[static_cast<std::size_t>(G + i)] = nu;
        xs[static_cast<std::size_t>(G + S + i)] = nu + c.alpha;
    }
    std::vector<long> qs;
    for (const auto& [k, q] : sched) qs.push_back(q);
    const FiberWalk w = fiber_walk(c, xs, qs);
    std::vector<Grp> A_nu(static_cast<std::size_t>(S));
    for (int i = 0; i < S; ++i) A_nu[static_cast<std::size_t>(i)] = c(rep.nus[static_cast<std::size_t>(i)]);

    for (std::size_t r = 0; r < sched.size(); ++r) {
        const auto [k, q] = sched[r];
        EnergyRow row;
        row.k = k;
        row.q = q;
        double s1 = 0, s2 = 0;
        for (int j = 0; j < G; ++j) {
            const double n = lie::norm(w.a[r][static_cast<std::size_t>(j)]);
            s1 += n;
            s2 += n * n;
        }
        row.l1 = s1 / G / static_cast<double>(q);
        row.l2 = std::sqrt(s2 / G) / static_cast<double>(q);
        double best = 1e300;
        Alg best_curve = lie::zero(c.group());
        std::vector<Alg> curve(static_cast<std::size_t>(S));
        for (int i = 0; i < S; ++i) {
            const Alg at_nu = (1.0 / static_cast<double>(q)) * w.a[r][static_cast<std::size_t>(G + i)];
            const Alg at_next = (1.0 / static_cast<double>(q)) * w.a[r][static_cast<std::size_t>(G + S + i)];
            curve[static_cast<std::size_t>(i)] = at_nu;
            const double res = lie::norm(lie::Ad(A_nu[static_cast<std::size_t>(i)], at_nu) - at_next);
            if (res < best) {
                best = res;
                best_curve = at_nu;
                row.best_nu = rep.nus[static_cast<std::size_t>(i)];
            }
        }
        row.invariance_residual = best;
        const lie::DegreeProjection dp = lie::project_degree(best_curve, opts.degree_threshold);
        row.degree_residual = dp.residual;
        rep.rows.push_back(row);
        if (r + 1 == sched.size()) {
            rep.curve = curve;
            rep.best_nu = row.best_nu;
            rep.curve_best = best_curve;
            rep.invariance_residual = best;
            rep.degree = dp;
        }
    }
    rep.energy = rep.rows.back().l2;
    const std::size_t n = rep.rows.size();
    if (n >= 3) {
        bool ok = true;
        for (std::size_t i = n - 2; i < n; ++i) {
            const double e0 = rep.rows[i - 1].l2, e1 = rep.rows[i].l2;
            if (std::abs(e1 - e0) > opts.convergence_tol * std::max(std::abs(e1), 1.0)) ok = false;
        }
        rep.converged = ok;
    }
    if (rep.converged) {
        rep.status = rep.degree.quantized ? "converged" : "converged: degree not quantized";
    } else {
        std::ostringstream os;
        os << "undetermined: last estimates";
        for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i) os << " " << rep.rows[i].l2;
        os << " differ by more than the relative tolerance " << opts.convergence_tol;
        rep.status = os.str();
    }
    return rep;
}

CurveEstimate invariant_curve(const Cocycle& c, const arith::ContinuedFraction& cf, double nu, long q_cap) {
    const auto sched = convergent_schedule(cf, q_cap);
    if (sched.empty()) throw std::invalid_argument("invariant_curve: no denominator below the cap");
    const long q = sched.back().second;
    const FiberWalk w = fiber_walk(c, {nu, nu + c.alpha}, {q});
    CurveEstimate out;
    out.q = q;
    out.value = (1.0 / static_cast<double>(q)) * w.a[0][0];
    const Alg next = (1.0 / static_cast<double>(q)) * w.a[0][1];
    out.residual = lie::norm(lie::Ad(c(nu), out.value) - next);
    return out;
}

std::vector<BracketRow> bracket_sum_trace(const Cocycle& c, const arith::ContinuedFraction& cf, int grid, long q_cap) {
    const auto sched = convergent_schedule(cf, q_cap);
    std::vector<BracketRow> rows(sched.size());
    if (sched.empty()) return rows;
    const long nmax = sched.back().second;
    std::vector<std::vector<double>> norms(sched.size(), std::vector<double>(static_cast<std::size_t>(grid)));
    parallel_for(grid, [&](int j) {
        const double x = static_cast<double>(j) / grid;
        Grp A = lie::identity(c.group());
        Alg prefix = lie::zero(c.group()), sum = lie::zero(c.group());
        std::size_t next = 0;
        for (long k = 0; k <= nmax; ++k) {
            const Jet jk = c.jet(x + static_cast<double>(k) * c.alpha);
            const Grp Ak1 = jk.S * A;
            // U^k u (x) = -Ad(A_{k+1}(x)^{-1}) a(x + k alpha)
            const Alg v = -lie::Ad(lie::inverse(Ak1), jk.s);
            prefix += v;
            sum += lie::bracket(v, prefix);
            A = Ak1;
            if ((k & 63) == 63) lie::reunitarize(A);
            while (next < sched.size() && sched[next].second == k) {
                norms[next][static_cast<std::size_t>(j)] = lie::norm(sum);
                ++next;
            }
        }
    });
    for (std::size_t r = 0; r < sched.size(); ++r) {
        double s = 0;
        for (double v : norms[r]) s += v;
        const double q = static_cast<double>(sched[r].second);
        rows[r] = {sched[r].first, sched[r].second, s / grid / (q * q)};
    }
    return rows;
}

}  // namespace cocycle::dyn
