#include "cocycle/kam.hpp"

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace cocycle::kam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * kPi;

using maps::cd;
using maps::Series;
using Rational = boost::rational<long long>;

cd phase(double t) { return std::polar(1.0, kTwoPi * t); }

double reduce_mod1(double a) { return a - std::nearbyint(a); }

double btilde(GroupId g) { return 2.0 * lie::info(g).b; }

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::vector<int> all_roots(GroupId g) {
    std::vector<int> r(static_cast<std::size_t>(lie::info(g).pos_roots));
    std::iota(r.begin(), r.end(), 0);
    return r;
}

int working_grid(const KamParams& p, int period = 1) { return 4 * p.M * period; }

// Samples of x -> f(x) on [0, period) projected to bandwidth M * period.
AlgebraMap project(GroupId g, const std::function<Alg(double)>& f, const KamParams& p, int period,
                   maps::FourierReport* rep) {
    const int G = working_grid(p, period);
    std::vector<Alg> samples(static_cast<std::size_t>(G));
    dyn::parallel_for(G, [&](int j) {
        samples[static_cast<std::size_t>(j)] = f(static_cast<double>(period) * j / G);
    });
    return maps::fourier_samples(g, samples, p.M * period, period, rep);
}

Series restrict_modes(const Series& s, int lo, int hi) {
    Series out;
    for (int k = std::max(lo, s.kmin); k <= std::min(hi, s.kmax()); ++k)
        if (s.at(k) != cd(0.0)) out.set(k, s.at(k));
    return out;
}

GroupMap torus_morphism(const Alg& H, int period) {
    if (lie::norm(H) == 0.0) return GroupMap::identity(H.g);
    return GroupMap::linear(-1.0 * H, period);
}

double sup_dist(const std::function<Grp(double)>& a, const std::function<Grp(double)>& b, double span, int grid) {
    std::vector<double> d(static_cast<std::size_t>(grid));
    dyn::parallel_for(grid, [&](int j) {
        const double x = span * j / grid;
        d[static_cast<std::size_t>(j)] = lie::dist(a(x), b(x));
    });
    return *std::max_element(d.begin(), d.end());
}

std::vector<int> window_modes(int m) {
    std::vector<int> w{0};
    if (m > 0)
        for (int k = -m + 1; k <= -1; ++k) w.push_back(k);
    else
        for (int k = 1; k <= -m - 1; ++k) w.push_back(k);
    return w;
}

}  // namespace

int schedule_N(const KamParams& p, int step) {
    return static_cast<int>(std::lround(std::pow(static_cast<double>(p.N), std::pow(1.0 + p.sigma, step))));
}

double schedule_K(const KamParams& p, int step) {
    return std::pow(static_cast<double>(schedule_N(p, step)), p.tau + p.nu_exp);
}

double resonance_floor(GroupId g, const KamParams& p, int N) {
    const int q = lie::info(g).pos_roots;
    return std::pow(2.0, p.tau + 1) * p.gamma * std::pow(btilde(g), q + 1) * std::pow(static_cast<double>(N), p.tau);
}

ResonancePartition detect_resonances(const Grp& A, double alpha, int N, double K, const KamParams& p,
                                     const std::vector<int>& only_roots) {
    const GroupId g = A.g;
    if (K < resonance_floor(g, p, N)) {
        std::ostringstream os;
        os << "detect_resonances: K = " << K << " is below the required " << resonance_floor(g, p, N);
        throw std::invalid_argument(os.str());
    }
    const Alg h = lie::log(A, lie::LogBranch::Any);
    if (!lie::is_toral(h, 1e-9)) throw std::invalid_argument("detect_resonances: A must lie in the standard torus");
    ResonancePartition part;
    part.g = g;
    part.K = K;
    part.roots_considered = only_roots;
    for (double v : lie::root_values(h)) part.root_values.push_back(reduce_mod1(v));
    const std::vector<int> roots = only_roots.empty() ? all_roots(g) : only_roots;
    const int q = lie::info(g).pos_roots;
    for (int i = 0; i <= q + 1; ++i)
        part.levels.push_back(static_cast<int>(std::lround(std::pow(btilde(g), i) * N)));
    const double thr = 1.0 / K;
    auto closest = [&](double a, int Ni) {
        int best_k = 0;
        double best = 1e300;
        for (int k = -Ni; k <= Ni; ++k) {
            if (k == 0) continue;
            const double d = arith::dist_z(a - k * alpha);
            if (d < best) {
                best = d;
                best_k = k;
            }
        }
        return std::pair<int, double>{best_k, best};
    };
    auto resonant_at = [&](int Ni) {
        std::vector<int> out;
        for (int r : roots)
            if (closest(part.root_values[static_cast<std::size_t>(r)], Ni).second < thr) out.push_back(r);
        return out;
    };
    part.level = q;
    for (int i = 0; i <= q; ++i) {
        if (resonant_at(part.levels[static_cast<std::size_t>(i)]) ==
            resonant_at(part.levels[static_cast<std::size_t>(i + 1)])) {
            part.level = i;
            break;
        }
    }
    part.k.assign(static_cast<std::size_t>(q), std::nullopt);
    part.resonant = resonant_at(part.N_level());
    const int scan = 2 * part.levels[static_cast<std::size_t>(part.level + 1)];
    for (int r : part.resonant) {
        const double a = part.root_values[static_cast<std::size_t>(r)];
        const int kr = closest(a, part.N_level()).first;
        part.k[static_cast<std::size_t>(r)] = kr;
        for (int k = -scan; k <= scan; ++k)
            if (k != 0 && k != kr && arith::dist_z(a - k * alpha) < thr) part.unique = false;
    }
    for (int r : roots) {
        if (contains(part.resonant, r)) continue;
        if (arith::dist_z(part.root_values[static_cast<std::size_t>(r)]) < thr)
            part.zero.push_back(r);
        else
            part.diophantine.push_back(r);
    }
    return part;
}

ObstructionData reduction_vector(const ResonancePartition& part) {
    const GroupId g = part.g;
    const lie::RootSystem& rs = lie::roots(g);
    const int w = lie::info(g).rank;
    ObstructionData out;
    out.H = lie::zero(g);
    out.numerators.assign(static_cast<std::size_t>(w), 0);
    out.ob = AlgebraMap::zero(g);
    std::vector<std::vector<Rational>> rows;
    for (int r : part.resonant) {
        std::vector<Rational> row;
        for (int c : rs.combination[static_cast<std::size_t>(r)]) row.emplace_back(c);
        row.emplace_back(*part.k[static_cast<std::size_t>(r)]);
        rows.push_back(row);
    }
    for (int r : part.zero) {
        std::vector<Rational> row;
        for (int c : rs.combination[static_cast<std::size_t>(r)]) row.emplace_back(c);
        row.emplace_back(0);
        rows.push_back(row);
    }
    if (rows.empty()) return out;
    // reduced row echelon form over Q
    std::vector<int> pivot_col;
    std::size_t rank = 0;
    for (int col = 0; col < w && rank < rows.size(); ++col) {
        std::size_t piv = rank;
        while (piv < rows.size() && rows[piv][static_cast<std::size_t>(col)].numerator() == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[rank], rows[piv]);
        const Rational lead = rows[rank][static_cast<std::size_t>(col)];
        for (auto& v : rows[rank]) v /= lead;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == rank) continue;
            const Rational f = rows[i][static_cast<std::size_t>(col)];
            if (f.numerator() == 0) continue;
            for (std::size_t j = 0; j < rows[i].size(); ++j) rows[i][j] -= f * rows[rank][j];
        }
        pivot_col.push_back(col);
        ++rank;
    }
    for (std::size_t i = rank; i < rows.size(); ++i)
        if (rows[i].back().numerator() != 0)
            throw std::runtime_error("reduction_vector: inconsistent resonance data; check the root classification");
    std::vector<Rational> x(static_cast<std::size_t>(w), Rational(0));
    for (std::size_t i = 0; i < rank; ++i) x[static_cast<std::size_t>(pivot_col[i])] = rows[i].back();
    long long D = 1;
    for (const Rational& v : x) D = std::lcm(D, v.denominator());
    out.D = static_cast<long>(D);
    for (int i = 0; i < w; ++i) {
        const Rational scaled = x[static_cast<std::size_t>(i)] * Rational(D);
        out.numerators[static_cast<std::size_t>(i)] = static_cast<long>(scaled.numerator());
        out.H += boost::rational_cast<double>(x[static_cast<std::size_t>(i)]) * rs.dual_basis[static_cast<std::size_t>(i)];
    }
    if (lie::norm(out.H) > 0) {
        out.period = lie::closing_period(out.H, 64);
        if (out.period == 0) throw std::runtime_error("reduction_vector: exp(-H x) does not close within 64 periods");
    }
    return out;
}

Grp torus_frame(const Grp& A) {
    const GroupId g = A.g;
    const Alg h = lie::log(A, lie::LogBranch::Any);
    if (lie::is_toral(h, 1e-14)) return lie::identity(g);
    const Eigen::MatrixXcd X = lie::matrix(h);
    const Eigen::MatrixXcd herm = cd(0, -1) * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (herm + herm.adjoint()));
    Eigen::MatrixXcd P = es.eigenvectors().adjoint();
    const cd det = P.determinant();
    P.row(0) *= std::conj(det) / std::abs(det);
    return lie::from_matrix_grp(g, P);
}

AlgebraMap adjoint_map(const Grp& P, const AlgebraMap& u) {
    const int M = std::max(1, u.bandwidth());
    const int G = 4 * M + 8;
    std::vector<Alg> s = maps::sample(u, G);
    for (Alg& v : s) v = lie::Ad(P, v);
    return maps::fourier_samples(u.g, s, M, u.period);
}

Cocycle NearConstant::cocycle() const { return {alpha, GroupMap::constant(A) * GroupMap::exp(U)}; }

KamStep kam_step_constant(const NearConstant& c, int N, double K, const KamParams& p) {
    const GroupId g = c.A.g;
    const int w = lie::info(g).rank;
    const int q = lie::info(g).pos_roots;
    KamStep st;
    st.N = N;
    st.K = K;
    st.eps_in = maps::norm(c.U, 0);
    st.part = detect_resonances(c.A, c.alpha, N, K, p);
    st.ob = reduction_vector(st.part);
    st.smallness_product = K * std::pow(std::pow(btilde(g), q) * N, 2) * st.eps_in;

    // obstruction: toral means, resonant modes, near-zero root means
    AlgebraMap Ob = AlgebraMap::zero(g);
    for (int i = 0; i < w; ++i) Ob.comps[static_cast<std::size_t>(i)].set(0, c.U.comps[static_cast<std::size_t>(i)].at(0));
    for (int r : st.part.resonant) {
        const int kr = *st.part.k[static_cast<std::size_t>(r)];
        Ob.comps[static_cast<std::size_t>(w + r)].set(kr, c.U.comps[static_cast<std::size_t>(w + r)].at(kr));
    }
    for (int r : st.part.zero) Ob.comps[static_cast<std::size_t>(w + r)].set(0, c.U.comps[static_cast<std::size_t>(w + r)].at(0));
    st.ob.ob = Ob;

    // linearized conjugation Y - Ad(A^{-1}) Y(. + alpha) = U - Ob on the truncated spectrum |k| <= N_level
    const int T = st.part.N_level();
    AlgebraMap Y = AlgebraMap::zero(g);
    st.min_divisor = 2.0;
    for (int i = 0; i < w; ++i) {
        const Series phi = restrict_modes(c.U.comps[static_cast<std::size_t>(i)], -T, T);
        const coh::LinearSolution sol = coh::solve_linear(phi, c.alpha);
        if (!phi.empty() && sol.min_divisor_k != 0) st.min_divisor = std::min(st.min_divisor, sol.min_divisor);
        Y.comps[static_cast<std::size_t>(i)] = cd(-1.0) * sol.psi;
    }
    for (int r = 0; r < q; ++r) {
        const Series& u = c.U.comps[static_cast<std::size_t>(w + r)];
        const bool res = contains(st.part.resonant, r), zer = contains(st.part.zero, r);
        const int center = res ? *st.part.k[static_cast<std::size_t>(r)] : 0;
        const double a = st.part.root_values[static_cast<std::size_t>(r)];
        Series y;
        for (int k = -T; k <= T; ++k) {
            if ((res || zer) && k == center) continue;
            const cd uk = u.at(k);
            if (uk == cd(0.0)) continue;
            const cd div = phase(k * c.alpha - a) - 1.0;
            st.min_divisor = std::min(st.min_divisor, std::abs(div));
            y.set(k, -uk / div);
        }
        Y.comps[static_cast<std::size_t>(w + r)] = y;
    }
    st.Y = Y;
    st.Y_norm = maps::norm(Y, 0);
    if (st.Y_norm > p.max_linear) {
        std::ostringstream os;
        os << "kam step: conjugation size " << st.Y_norm << " exceeds " << p.max_linear << " (smallness lost)";
        throw SmallnessError(os.str());
    }

    const Alg H = st.ob.H;
    const double alpha = c.alpha;
    const Grp A = c.A;
    const AlgebraMap U = c.U;
    auto reduced = [=](double x) {
        return lie::exp(-(x + alpha) * H) * lie::exp(Y.eval(x + alpha)) * A * lie::exp(U.eval(x)) *
               lie::exp(-1.0 * Y.eval(x)) * lie::exp(x * H);
    };
    const Grp A1 = lie::exp(-alpha * H) * A * lie::exp(Ob.eval(0.0));
    for (double x : {0.1, 0.37, 0.71}) {
        const Grp Ax = lie::exp(-alpha * H) * A * lie::exp(lie::Ad(lie::exp(-x * H), Ob.eval(x)));
        st.constancy_defect = std::max(st.constancy_defect, lie::dist(Ax, A1));
    }
    const Grp P = torus_frame(A1);
    st.rediagonalized = lie::dist(P, lie::identity(g)) > 0;
    Grp A2 = P * A1 * lie::inverse(P);
    lie::reunitarize(A2);
    const Grp A1inv = lie::inverse(A1);
    maps::FourierReport rep;
    AlgebraMap U2 = project(
        g, [&](double x) { return lie::Ad(P, lie::log(A1inv * reduced(x), lie::LogBranch::Strict)); }, p, 1, &rep);
    st.tail_ratio = rep.tail_ratio;
    st.next = {alpha, A2, U2};
    st.eps_out = maps::norm(U2, 0);
    st.G = GroupMap::constant(P) * torus_morphism(H, st.ob.period) * GroupMap::exp(Y);
    return st;
}

KamRun kam_run_constant(const NearConstant& c, const KamParams& p) {
    KamRun run;
    const GroupId g = c.A.g;
    const Cocycle orig = c.cocycle();
    run.L = GroupMap::identity(g);
    NearConstant cur = c;
    auto row_for = [&](int n, int N, double K, int resonant, double roundtrip) {
        KamRow row;
        row.n = n;
        row.N = N;
        row.K = K;
        row.A = cur.A;
        row.eps0 = maps::norm(cur.U, 0);
        row.eps_s = maps::norm(cur.U, p.report_s);
        const int span = std::max(1, run.L.period());
        const int grid = 256 * span;
        double lmax = 0.0;
        for (int j = 0; j < grid; ++j) lmax = std::max(lmax, lie::norm(run.L.jet(static_cast<double>(span) * j / grid).s));
        row.L_norm = lmax;
        const GroupMap L = run.L;
        const Grp An = cur.A;
        const double alpha = cur.alpha;
        row.approx_dist = sup_dist([&](double x) { return orig(x); },
                                   [&](double x) { return L(x + alpha) * An * lie::inverse(L(x)); }, span, grid);
        row.resonant = resonant;
        row.roundtrip = roundtrip;
        return row;
    };
    run.rows.push_back(row_for(0, schedule_N(p, 0), schedule_K(p, 0), 0, 0.0));
    for (int n = 0; n < p.max_steps && run.rows.back().eps0 > p.tol; ++n) {
        const int N = schedule_N(p, n);
        const double K = schedule_K(p, n);
        if (K < resonance_floor(g, p, N)) {
            run.stopped = true;
            run.status = "schedule contract violated: K below the resonance floor";
            break;
        }
        KamStep st;
        try {
            st = kam_step_constant(cur, N, K, p);
        } catch (const SmallnessError& e) {
            run.stopped = true;
            run.status = e.what();
            break;
        } catch (const lie::LogBranchError& e) {
            run.stopped = true;
            run.status = std::string("log branch failure: ") + e.what();
            break;
        }
        const Cocycle before = cur.cocycle();
        const Cocycle after = st.next.cocycle();
        const GroupMap G = st.G;
        const double alpha = cur.alpha;
        const double roundtrip = sup_dist([&](double x) { return before(x); },
                                          [&](double x) { return lie::inverse(G(x + alpha)) * after(x) * G(x); },
                                          std::max(1, G.period()), 64);
        run.L = run.L * G.inverse();
        cur = st.next;
        run.rows.push_back(row_for(n + 1, N, K, static_cast<int>(st.part.resonant.size()), roundtrip));
    }
    run.last = cur;
    const double final_eps = run.rows.back().eps0;
    run.converged = final_eps <= p.tol;
    for (std::size_t i = 0; i + 1 < run.rows.size(); ++i) {
        const double e0 = run.rows[i].eps0, e1 = run.rows[i + 1].eps0;
        if (e0 <= 0 || e1 <= 0 || e0 >= 1 || e1 < 1e-14) continue;
        run.decay_ratios.push_back(std::log(e1) / std::log(e0));
    }
    run.superexponential = !run.decay_ratios.empty() &&
                           std::all_of(run.decay_ratios.begin(), run.decay_ratios.end(), [](double r) { return r >= 1.5; });
    if (run.status.empty()) {
        std::ostringstream os;
        os << (run.converged ? "converged" : "not converged") << " after " << run.rows.size() - 1 << " steps";
        run.status = os.str();
    }
    return run;
}

Cocycle NearGeodesic::cocycle() const { return {alpha, GroupMap::geodesic(E) * GroupMap::exp(U)}; }

std::vector<int> twists(const lie::Geodesic& e) {
    std::vector<int> out;
    for (double v : lie::root_values(e.slope())) out.push_back(static_cast<int>(std::lround(v)));
    return out;
}

AlgebraMap obstruction_part(const AlgebraMap& u, const std::vector<int>& tw) {
    const int w = u.rank();
    AlgebraMap out = AlgebraMap::zero(u.g, u.period);
    const int P = u.period;
    for (int i = 0; i < w; ++i) out.comps[static_cast<std::size_t>(i)].set(0, u.comps[static_cast<std::size_t>(i)].at(0));
    for (std::size_t r = 0; r < tw.size(); ++r) {
        const Series& s = u.comps[static_cast<std::size_t>(w) + r];
        for (int k : window_modes(tw[r])) {
            const cd v = s.at(k * P);
            if (v != cd(0.0)) out.comps[static_cast<std::size_t>(w) + r].set(k * P, v);
        }
    }
    return out;
}

GeodesicStep geodesic_step(const NearGeodesic& c, const KamParams& p) {
    const GroupId g = c.E.g;
    const int w = lie::info(g).rank;
    const std::vector<int> m = twists(c.E);
    for (int v : m)
        if (v == 0) throw std::invalid_argument("geodesic_step: the geodesic is singular; use singular_step");
    const std::vector<double> at = lie::root_values(c.E.offset());
    GeodesicStep st;
    st.off_norm = maps::norm(c.U - obstruction_part(c.U, m), 0);
    st.ob = AlgebraMap::zero(g);
    AlgebraMap B = AlgebraMap::zero(g);
    for (int i = 0; i < w; ++i) {
        const coh::LinearSolution sol = coh::solve_linear(c.U.comps[static_cast<std::size_t>(i)], c.alpha);
        B.comps[static_cast<std::size_t>(i)] = cd(-1.0) * sol.psi;
    }
    for (std::size_t r = 0; r < m.size(); ++r) {
        const Series& u = c.U.comps[static_cast<std::size_t>(w) + r];
        if (u.empty()) continue;
        const Series gser = -phase(at[r]) * maps::shift(u, m[r]);
        const int hi = m[r] > 0 ? m[r] : -1;
        const coh::TwistedSolution sol = coh::solve_twisted_window(gser, m[r], at[r], c.alpha, hi);
        B.comps[static_cast<std::size_t>(w) + r] = sol.f;
        st.ob.comps[static_cast<std::size_t>(w) + r] = -phase(-at[r]) * maps::shift(sol.obstruction, -m[r]);
    }
    st.B = B;
    st.B_norm = maps::norm(B, 0);
    if (st.B_norm > p.max_linear) throw SmallnessError("geodesic step: conjugation too large (smallness lost)");
    const lie::Geodesic E = c.E;
    const AlgebraMap U = c.U;
    const double alpha = c.alpha;
    auto f = [&](double x) {
        const Grp c1 = lie::exp(B.eval(x + alpha)) * E(x) * lie::exp(U.eval(x)) * lie::exp(-1.0 * B.eval(x));
        return lie::log(lie::inverse(E(x)) * c1, lie::LogBranch::Strict);
    };
    st.next = {alpha, E, project(g, f, p, 1, nullptr)};
    return st;
}

NormalForm geodesic_run(const NearGeodesic& c, const KamParams& p) {
    NormalForm nf;
    const GroupId g = c.E.g;
    const std::vector<int> m = twists(c.E);
    nf.B = GroupMap::identity(g);
    NearGeodesic cur = c;
    auto p_part = [&](const AlgebraMap& u) {
        AlgebraMap ob = obstruction_part(u, m);
        for (int i = 0; i < ob.rank(); ++i) ob.comps[static_cast<std::size_t>(i)] = Series{};
        return ob;
    };
    for (int n = 0;; ++n) {
        NormalFormRow row;
        row.n = n;
        row.U_norm = maps::norm(cur.U, 0);
        row.off_norm = maps::norm(cur.U - obstruction_part(cur.U, m), 0);
        row.P_norm = maps::norm(p_part(cur.U), 0);
        if (row.off_norm <= p.tol || n >= p.max_steps) {
            nf.rows.push_back(row);
            nf.converged = row.off_norm <= p.tol;
            break;
        }
        GeodesicStep st;
        try {
            st = geodesic_step(cur, p);
        } catch (const std::exception& e) {
            nf.rows.push_back(row);
            nf.status = e.what();
            break;
        }
        row.B_norm = st.B_norm;
        nf.rows.push_back(row);
        nf.B = GroupMap::exp(st.B) * nf.B;
        cur = st.next;
    }
    nf.lambda = cur.U.mean();
    for (int i = nf.lambda.g == GroupId::SU3 ? 2 : 1; i < lie::info(g).dim; ++i) nf.lambda[i] = 0.0;
    nf.P = p_part(cur.U);
    nf.P_norm = maps::norm(nf.P, 0);
    if (nf.status.empty()) nf.status = nf.converged ? "converged" : "not converged within the step budget";
    return nf;
}

Cocycle NearSingular::cocycle() const {
    return {alpha, GroupMap::geodesic(E) * GroupMap::constant(A) * GroupMap::exp(U)};
}

SingularStep singular_step(const NearSingular& c, int N, double K, const KamParams& p) {
    const GroupId g = c.E.g;
    const int w = lie::info(g).rank;
    const int q = lie::info(g).pos_roots;
    SingularStep st;
    st.eps_in = maps::norm(c.U, 0);
    const std::vector<int> m = twists(c.E);
    for (int r = 0; r < q; ++r) (m[static_cast<std::size_t>(r)] == 0 ? st.zero_roots : st.nonzero_roots).push_back(r);
    if (st.zero_roots.empty()) throw std::invalid_argument("singular_step: the geodesic is regular; use geodesic_step");
    const Alg hA = lie::log(c.A, lie::LogBranch::Any);
    if (!lie::is_toral(hA, 1e-9)) throw std::invalid_argument("singular_step: A must lie in the standard torus");
    const std::vector<double> at = lie::root_values(c.E.offset());
    const std::vector<double> aA = lie::root_values(hA);
    const Grp Aeff = lie::exp(c.E.offset()) * c.A;
    st.part = detect_resonances(Aeff, c.alpha, N, K, p, st.zero_roots);

    // reduction vector in the span of the coroots of the zero roots
    const lie::RootSystem& rs = lie::roots(g);
    std::vector<int> constrained = st.part.resonant;
    constrained.insert(constrained.end(), st.part.zero.begin(), st.part.zero.end());
    Alg H = lie::zero(g);
    if (!st.part.resonant.empty()) {
        const int nz = static_cast<int>(st.zero_roots.size());
        Eigen::MatrixXd Mx(static_cast<int>(constrained.size()), nz);
        Eigen::VectorXd rhs(static_cast<int>(constrained.size()));
        for (std::size_t i = 0; i < constrained.size(); ++i) {
            const int r = constrained[i];
            for (int j = 0; j < nz; ++j)
                Mx(static_cast<int>(i), j) =
                    lie::root_values(rs.coroots[static_cast<std::size_t>(st.zero_roots[static_cast<std::size_t>(j)])])[static_cast<std::size_t>(r)];
            rhs(static_cast<int>(i)) = st.part.k[static_cast<std::size_t>(r)].value_or(0);
        }
        const Eigen::VectorXd y = Mx.colPivHouseholderQr().solve(rhs);
        if ((Mx * y - rhs).norm() > 1e-9) throw std::runtime_error("singular_step: inconsistent resonance data");
        for (int j = 0; j < nz; ++j) H += y(j) * rs.coroots[static_cast<std::size_t>(st.zero_roots[static_cast<std::size_t>(j)])];
    }
    const std::vector<double> hv = lie::root_values(H);
    int P = 1;
    for (; P <= 12; ++P) {
        bool ok = true;
        for (double v : hv) ok = ok && std::abs(P * v - std::nearbyint(P * v)) < 1e-9;
        if (ok) break;
    }
    if (P > 12) throw std::runtime_error("singular_step: reduction vector has no small common denominator");
    st.period = P;
    st.ob.H = H;
    st.ob.period = lie::norm(H) > 0 ? lie::closing_period(H, 64) : 1;
    st.ob.D = P;

    const AlgebraMap U = c.U.with_period(P);
    AlgebraMap Y = AlgebraMap::zero(g, P), Ob = AlgebraMap::zero(g, P);
    for (int i = 0; i < w; ++i) {
        const Series& s = U.comps[static_cast<std::size_t>(i)];
        Ob.comps[static_cast<std::size_t>(i)].set(0, s.at(0));
        Y.comps[static_cast<std::size_t>(i)] = cd(-1.0) * coh::solve_linear(s, c.alpha, P).psi;
    }
    for (int r : st.zero_roots) {
        const Series& u = U.comps[static_cast<std::size_t>(w + r)];
        const bool res = contains(st.part.resonant, r), zer = contains(st.part.zero, r);
        const int center = res ? P * *st.part.k[static_cast<std::size_t>(r)] : 0;
        const double a = st.part.root_values[static_cast<std::size_t>(r)];
        Series y;
        for (int k = u.kmin; k <= u.kmax(); ++k) {
            const cd uk = u.at(k);
            if (uk == cd(0.0)) continue;
            if ((res || zer) && k == center) {
                Ob.comps[static_cast<std::size_t>(w + r)].set(k, uk);
                continue;
            }
            y.set(k, -uk / (phase(k * c.alpha / P - a) - 1.0));
        }
        Y.comps[static_cast<std::size_t>(w + r)] = y;
    }
    for (int r : st.nonzero_roots) {
        const Series& u = U.comps[static_cast<std::size_t>(w + r)];
        if (u.empty()) continue;
        const int mr = m[static_cast<std::size_t>(r)];
        const double cr = at[static_cast<std::size_t>(r)] + aA[static_cast<std::size_t>(r)];
        const int hshift = static_cast<int>(std::lround(P * hv[static_cast<std::size_t>(r)]));
        const int hi = mr > 0 ? P * mr + hshift : hshift - 1;
        const Series gser = -phase(cr) * maps::shift(u, P * mr);
        const coh::TwistedSolution sol = coh::solve_twisted_window(gser, P * mr, cr, c.alpha, hi, P);
        Y.comps[static_cast<std::size_t>(w + r)] = sol.f;
    }
    if (maps::norm(Y, 0) > p.max_linear) throw SmallnessError("singular step: conjugation too large (smallness lost)");

    const double alpha = c.alpha;
    const lie::Geodesic E = c.E;
    const Grp A = c.A;
    const AlgebraMap U1 = c.U;
    auto reduced = [=](double x) {
        return lie::exp(-(x + alpha) * H) * lie::exp(Y.eval(x + alpha)) * E(x) * A * lie::exp(U1.eval(x)) *
               lie::exp(-1.0 * Y.eval(x)) * lie::exp(x * H);
    };
    const Grp A1 = lie::exp(-alpha * H) * A * lie::exp(Ob.eval(0.0));
    const Grp A1inv = lie::inverse(A1);
    auto f = [&](double x) { return lie::log(A1inv * lie::inverse(E(x)) * reduced(x), lie::LogBranch::Strict); };
    st.next = {alpha, E, A1, project(g, f, p, P, nullptr)};
    st.eps_out = maps::norm(st.next.U, 0);
    st.commutant_defect = lie::norm(lie::Ad(A1, E.slope()) - E.slope());
    const Cocycle before = c.cocycle(), after = st.next.cocycle();
    auto G = [=](double x) { return lie::exp(-x * H) * lie::exp(Y.eval(x)); };
    st.roundtrip = sup_dist([&](double x) { return before(x); },
                            [&](double x) { return lie::inverse(G(x + alpha)) * after(x) * G(x); }, P, 64);
    return st;
}

AprioriReport apriori_check(const NearGeodesic& c, int grid) {
    AprioriReport rep;
    const GroupId g = c.E.g;
    const int w = lie::info(g).rank;
    const std::vector<int> m = twists(c.E);
    rep.lambda0_norm = maps::l2_norm(obstruction_part(c.U, m));
    AlgebraMap dU = AlgebraMap::zero(g, c.U.period);
    for (int i = 0; i < c.U.ncomps(); ++i) {
        const Series& s = c.U.comps[static_cast<std::size_t>(i)];
        Series d;
        for (int k = s.kmin; k <= s.kmax(); ++k)
            if (k != 0) d.set(k, cd(0, kTwoPi * k / c.U.period) * s.at(k));
        dU.comps[static_cast<std::size_t>(i)] = d;
    }
    rep.derivative_norm = maps::l2_norm(dU - obstruction_part(dU, m));
    const Alg er = c.E.slope();
    const double ern = lie::norm(er);
    const Cocycle cc = c.cocycle();
    std::vector<double> xs(static_cast<std::size_t>(grid));
    for (int j = 0; j < grid; ++j) xs[static_cast<std::size_t>(j)] = static_cast<double>(j) / grid;
    const dyn::FiberWalk walk = dyn::fiber_walk(cc, xs, {2});
    double s2 = 0, sa = 0, se = 0, su = 0;
    Alg mean_root = lie::zero(g);
    for (int j = 0; j < grid; ++j) {
        const double x = xs[static_cast<std::size_t>(j)];
        const double n2 = lie::norm(walk.a[0][static_cast<std::size_t>(j)]);
        s2 += n2 * n2;
        const double na = lie::norm(cc.jet(x).s);
        sa += na * na;
        const Alg u = lie::Ad(c.E(x), lie::dexp(c.U.eval(x), c.U.deriv(x, 1)));
        se += lie::killing(er, u);
        su += lie::killing(u, u);
        Alg v = c.U.eval(x);
        for (int i = 0; i < w; ++i) v[i] = 0.0;
        mean_root += v;
    }
    mean_root *= 1.0 / grid;
    rep.a2_sq = s2 / grid;
    rep.bound_sq = 4 * ern * ern;
    rep.margin = rep.bound_sq - rep.a2_sq;
    rep.predicted_margin = std::pow(2 * ern * lie::norm(mean_root), 2);
    rep.a_sq = sa / grid;
    rep.a_sq_expansion = ern * ern + 2 * se / grid + su / grid;
    rep.verdict = std::sqrt(rep.a2_sq) / 2 < ern * (1 - 1e-9) ? "energy strictly below |e_r|" : "consistent with degree r";
    return rep;
}

ResonanceDemo resonance_demo(double alpha, int k, double eps, const KamParams& p) {
    const GroupId g = GroupId::SU2;
    NearConstant c;
    c.alpha = alpha;
    c.A = lie::exp(lie::toral(g, {kPi * k * alpha}));
    c.U = AlgebraMap::zero(g);
    c.U.comps[1].set(k, eps);
    ResonanceDemo demo;
    demo.step = kam_step_constant(c, p.N, schedule_K(p, 0), p);
    const Cocycle orig = c.cocycle();
    const GroupMap G = demo.step.G;
    const Grp An = demo.step.next.A;
    const int span = std::max(1, G.period());
    demo.residual = sup_dist([&](double x) { return G(x + alpha) * orig(x) * lie::inverse(G(x)); },
                             [&](double) { return An; }, span, 256);
    const Alg H = demo.step.ob.H;
    demo.geodesic_defect =
        sup_dist([&](double x) { return lie::exp(-x * H); },
                 [&](double x) { return lie::exp(lie::toral(g, {kTwoPi * (-0.5 * k) * x})); }, span, 256);
    return demo;
}

}  // namespace cocycle::kam
