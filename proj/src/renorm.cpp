#include "cocycle/renorm.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cocycle::renorm {

namespace {

using GL = boost::math::quadrature::gauss<double, 64>;

// Flat smooth step: 0 for t <= 0, 1 for t >= 1, all derivatives vanish at both ends.
double smooth_step(double t) {
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

bool is_identity(const GroupMap& m) { return m.is_constant() && lie::dist(m(0.0), lie::identity(m.group())) < 1e-15; }

// Integral over [0, len] of an algebra-valued function by 64-point Gauss-Legendre.
Alg integrate(GroupId g, const std::function<Alg(double)>& f, double len) {
    Alg acc = lie::zero(g);
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int s : {-1, 1}) {
            if (i == 0 && s == -1 && x.size() % 2 == 1) continue;
            const double t = 0.5 * len * (1.0 + s * x[i]);
            acc += (0.5 * len * w[i]) * f(t);
        }
    }
    return acc;
}

double integrate_scalar(const std::function<double(double)>& f, double len) {
    return GL::integrate([&](double t) { return f(t); }, 0.0, len);
}

// L-derivative by a symmetric difference quotient of the group values.
Alg numeric_L(const std::function<Grp(double)>& f, double x, double h = 1e-5) {
    const Grp c = lie::inverse(f(x));
    const Alg up = lie::log(f(x + h) * c, lie::LogBranch::Any);
    const Alg dn = lie::log(f(x - h) * c, lie::LogBranch::Any);
    return (0.5 / h) * (up - dn);
}

// Max over orders 0..4 of the fitted derivatives of log(left^{-1} right) at s.
double seam_defect(const std::function<Grp(double)>& left, const std::function<Grp(double)>& right, double s,
                   double h) {
    constexpr int P = 201, D = 6;
    const GroupId g = left(s).g;
    const int dim = lie::info(g).dim;
    Eigen::MatrixXd V(P, D + 1);
    Eigen::MatrixXd Y(P, dim);
    for (int i = 0; i < P; ++i) {
        const double t = -1.0 + 2.0 * i / (P - 1);
        for (int d = 0; d <= D; ++d) V(i, d) = std::pow(t, d);
        const Alg z = lie::log(lie::inverse(left(s + h * t)) * right(s + h * t), lie::LogBranch::Any);
        for (int c = 0; c < dim; ++c) Y(i, c) = z[c];
    }
    const Eigen::MatrixXd coef = V.colPivHouseholderQr().solve(Y);
    double out = 0.0, fact = 1.0;
    for (int d = 0; d <= 4; ++d) {
        if (d > 0) fact *= d;
        for (int c = 0; c < dim; ++c) out = std::max(out, std::abs(coef(d, c)) * fact / std::pow(h, d));
    }
    return out;
}

GroupMap custom_with_numeric_jet(GroupId g, int period, std::function<Grp(double)> f) {
    return GroupMap::custom(g, period, [f = std::move(f)](double x) { return maps::Jet{f(x), numeric_L(f, x)}; });
}

}  // namespace

double commutation_residual(const ZSquareAction& act, double span, int grid) {
    double out = 0.0;
    for (int j = 0; j < grid; ++j) {
        const double x = span * j / grid;
        const Grp lhs = act.gen1.map(x + act.gen2.freq) * act.gen2.map(x);
        const Grp rhs = act.gen2.map(x + act.gen1.freq) * act.gen1.map(x);
        out = std::max(out, lie::dist(lhs, rhs));
    }
    return out;
}

ZSquareAction action_of(const Cocycle& c) {
    if (c.period() != 1)
        throw std::invalid_argument("action_of: the cocycle must be 1-periodic; pass a sublattice form instead");
    return {{1.0, GroupMap::identity(c.group())}, {c.alpha, c.map}};
}

Generator element(const ZSquareAction& act, long k, long l) {
    const GroupId g = act.gen1.map.group();
    const double freq = static_cast<double>(k) * act.gen1.freq + static_cast<double>(l) * act.gen2.freq;
    GroupMap Al = l == 0 ? GroupMap::identity(g) : act.gen2.map.iterate(act.gen2.freq, l);
    if (k == 0 || is_identity(act.gen1.map)) return {freq, Al};
    GroupMap Ck = act.gen1.map.iterate(act.gen1.freq, k);
    if (l == 0) return {freq, Ck};
    return {freq, Ck.translate(static_cast<double>(l) * act.gen2.freq) * Al};
}

ZSquareAction sublattice(const ZSquareAction& act, int chi) {
    if (chi < 1) throw std::invalid_argument("sublattice: index must be positive");
    if (chi == 1) return act;
    const Generator g1 = element(act, chi, 0);
    const double s = static_cast<double>(chi);
    return {{g1.freq / s, g1.map.rescale(s)}, {act.gen2.freq / s, act.gen2.map.rescale(s)}};
}

RenormState renormalize(const ZSquareAction& act, const arith::ContinuedFraction& cf, int n, double nu,
                        const RenormOptions& opts) {
    if (n < 1 || n > cf.depth()) throw std::invalid_argument("renormalize: n must lie in [1, depth]");
    if (std::abs(act.gen1.freq - 1.0) > 1e-12 || std::abs(act.gen2.freq - cf.alpha_d()) > 1e-12)
        throw std::invalid_argument("renormalize: action frequencies must be (1, alpha)");
    const long qn = cf.q_at(n), qp = cf.q_at(n - 1), pn = cf.p_at(n), pp = cf.p_at(n - 1);
    if (qn > opts.q_cap) {
        std::ostringstream os;
        os << "renormalize: q_" << n << " = " << qn << " exceeds the iterate cap " << opts.q_cap
           << "; use a smaller n";
        throw IterateCapError(os.str());
    }
    const long sn = (n % 2 == 0) ? 1 : -1;
    RenormState st;
    st.n = n;
    st.nu = nu;
    st.group = act.gen1.map.group();
    st.Q = {qn, qp, pn, pp};
    st.q_n = qn;
    st.q_prev = qp;
    st.beta_prev = static_cast<double>(cf.beta_at(n - 1));
    st.alpha_n = static_cast<double>(cf.beta_at(n) / cf.beta_at(n - 1));
    const Generator C = element(act, sn * pp, -sn * qp);
    const Generator A = element(act, -sn * pn, sn * qn);
    st.c_tilde = {1.0, C.map.translate(nu).rescale(st.beta_prev)};
    st.a_tilde = {st.alpha_n, A.map.translate(nu).rescale(st.beta_prev)};
    if (opts.compute_norms && is_identity(act.gen1.map) && act.gen2.map.period() == 1) {
        const Cocycle c{act.gen2.freq, act.gen2.map};
        const int G = opts.norm_grid;
        std::vector<double> xs(static_cast<std::size_t>(G));
        for (int j = 0; j < G; ++j) xs[static_cast<std::size_t>(j)] = static_cast<double>(j) / G;
        std::vector<long> rec;
        if (qp > 0 && qp != qn) rec.push_back(qp);
        rec.push_back(qn);
        const dyn::FiberWalk w = dyn::fiber_walk(c, xs, rec);
        auto norms = [&](long q) {
            if (q == 0) return std::pair<double, double>{0.0, 0.0};
            const std::size_t r = static_cast<std::size_t>(std::find(rec.begin(), rec.end(), q) - rec.begin());
            double s1 = 0, s2 = 0;
            for (const Alg& v : w.a[r]) {
                const double t = lie::norm(v);
                s1 += t;
                s2 += t * t;
            }
            return std::pair<double, double>{s1 / G, std::sqrt(s2 / G)};
        };
        const auto [n1p, n2p] = norms(qp);
        const auto [n1, n2] = norms(qn);
        const double bn = static_cast<double>(cf.beta_at(n));
        st.d1 = bn * n1p + st.beta_prev * n1;
        st.d2 = bn * n2p + st.beta_prev * n2;
    }
    return st;
}

Functionals functionals(const RenormState& st) {
    Functionals f;
    const GroupId g = st.group;
    auto la = [&](double x) { return st.a_tilde.map.jet(x).s; };
    auto lc = [&](double x) { return st.c_tilde.map.jet(x).s; };
    f.J1 = integrate_scalar([&](double x) { return lie::norm(la(x)); }, 1.0) +
           integrate_scalar([&](double x) { return lie::norm(lc(x)); }, st.alpha_n);
    f.u = integrate(g, la, 1.0) - integrate(g, lc, st.alpha_n);
    f.d1 = st.d1;
    f.d2 = st.d2;
    return f;
}

std::vector<DRow> d_trace(const Cocycle& c, const arith::ContinuedFraction& cf, int grid, long q_cap) {
    std::vector<long> rec;
    std::vector<int> idx;
    for (int n = 0; n <= cf.depth(); ++n) {
        const long q = cf.q_at(n);
        if (q > q_cap) break;
        if (rec.empty() || rec.back() != q) rec.push_back(q);
        idx.push_back(static_cast<int>(rec.size()) - 1);
    }
    std::vector<double> xs(static_cast<std::size_t>(grid));
    for (int j = 0; j < grid; ++j) xs[static_cast<std::size_t>(j)] = static_cast<double>(j) / grid;
    const dyn::FiberWalk w = dyn::fiber_walk(c, xs, rec);
    std::vector<double> l1(rec.size()), l2(rec.size());
    for (std::size_t r = 0; r < rec.size(); ++r) {
        double s1 = 0, s2 = 0;
        for (const Alg& v : w.a[r]) {
            const double t = lie::norm(v);
            s1 += t;
            s2 += t * t;
        }
        l1[r] = s1 / grid;
        l2[r] = std::sqrt(s2 / grid);
    }
    std::vector<DRow> out;
    for (int n = 1; n < static_cast<int>(idx.size()); ++n) {
        const double bn = static_cast<double>(cf.beta_at(n)), bp = static_cast<double>(cf.beta_at(n - 1));
        const auto rp = static_cast<std::size_t>(idx[static_cast<std::size_t>(n - 1)]);
        const auto rn = static_cast<std::size_t>(idx[static_cast<std::size_t>(n)]);
        out.push_back({n, cf.q_at(n), bn * l1[rp] + bp * l1[rn], bn * l2[rp] + bp * l2[rn]});
    }
    return out;
}

Normalized normalize(const ZSquareAction& act) {
    if (std::abs(act.gen1.freq - 1.0) > 1e-12) throw std::invalid_argument("normalize: first generator must have frequency 1");
    const GroupId g = act.gen1.map.group();
    Normalized out;
    if (is_identity(act.gen1.map)) {
        out.act = act;
        out.B = GroupMap::identity(g);
        return out;
    }
    const double alpha = act.gen2.freq;
    if (act.gen1.map.is_constant() && act.gen2.map.is_constant()) {
        const Grp C = act.gen1.map(0.0), A = act.gen2.map(0.0);
        const Alg H = lie::log(C, lie::LogBranch::Any);
        out.B = GroupMap::custom(g, 0, [H](double x) { return maps::Jet{lie::exp(-x * H), -H}; });
        const bool commuting = lie::norm(lie::Ad(A, H) - H) <= 1e-10 * std::max(1.0, lie::norm(H));
        if (commuting) {
            out.act = {{1.0, GroupMap::identity(g)}, {alpha, GroupMap::constant(lie::exp(-alpha * H) * A)}};
        } else {
            out.geodesic_form = true;
            auto f = [H, A, alpha](double x) {
                const Grp S = lie::exp(-(x + alpha) * H) * A * lie::exp(x * H);
                return maps::Jet{S, -H + lie::Ad(lie::exp(-(x + alpha) * H) * A, H)};
            };
            out.act = {{1.0, GroupMap::identity(g)}, {alpha, GroupMap::custom(g, 1, f)}};
        }
        return out;
    }

    const GroupMap C = act.gen1.map;
    const Alg l0 = lie::log(C(0.0), lie::LogBranch::Any);
    const Alg cbar = integrate(g, [&](double x) { return C.jet(x).s; }, 1.0);
    constexpr double eps = 0.05, width = 0.2;
    auto Bquad = [=](double x) { return lie::exp(-0.5 * x * (x - 1.0) * cbar - x * l0); };
    auto T = [=](double x) { return Bquad(x - 1.0) * lie::inverse(C(x - 1.0)); };
    auto B0 = [=](double y) {
        if (y <= 1.0 - eps - width) return Bquad(y);
        if (y >= 1.0 - eps) return T(y);
        const double phi = smooth_step((y - (1.0 - eps - width)) / width);
        const Grp q = Bquad(y);
        return q * lie::exp(phi * lie::log(lie::inverse(q) * T(y), lie::LogBranch::Any));
    };
    auto B = [=](double x) {
        const double j = std::floor(x);
        const double y = x - j;
        Grp S = B0(y);
        if (j > 0) {
            Grp P = lie::identity(g);
            for (long i = 0; i < static_cast<long>(j); ++i) P = C(y + static_cast<double>(i)) * P;
            S = S * lie::inverse(P);
        } else {
            for (long i = 1; i <= static_cast<long>(-j); ++i) S = S * C(y - static_cast<double>(i));
        }
        return S;
    };
    out.B = custom_with_numeric_jet(g, 0, B);
    const GroupMap A = act.gen2.map;
    auto normalized = [=](double x) { return B(x + alpha) * A(x) * lie::inverse(B(x)); };
    out.act = {{1.0, GroupMap::identity(g)}, {alpha, custom_with_numeric_jet(g, 1, normalized)}};
    constexpr double h = 0.04;
    const double s1 = seam_defect(T, [=](double x) { return Bquad(x - 1.0) * lie::inverse(C(x - 1.0)); }, 1.0, h);
    const double s0 = seam_defect([=](double x) { return T(x + 1.0) * C(x); }, Bquad, 0.0, h);
    out.seam_mismatch = std::max(s0, s1);
    return out;
}

Grp commutant_fit(const Alg& h, const std::vector<Grp>& samples) {
    if (samples.empty()) throw std::invalid_argument("commutant_fit: no samples");
    const GroupId g = h.g;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(lie::matrix(samples[0]).rows(), lie::matrix(samples[0]).cols());
    for (const Grp& s : samples) M += lie::matrix(s);
    M /= static_cast<double>(samples.size());
    const double hn = lie::norm(h);
    if (hn > 1e-9) {
        const Eigen::MatrixXcd X = lie::matrix(h);
        const Eigen::MatrixXcd herm = std::complex<double>(0, -1) * X;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (herm + herm.adjoint()));
        const Eigen::MatrixXcd V = es.eigenvectors();
        const Eigen::VectorXd ev = es.eigenvalues();
        Eigen::MatrixXcd Mv = V.adjoint() * M * V;
        for (int i = 0; i < Mv.rows(); ++i)
            for (int j = 0; j < Mv.cols(); ++j)
                if (std::abs(ev(i) - ev(j)) > 1e-6 * hn) Mv(i, j) = 0.0;
        M = V * Mv * V.adjoint();
    }
    return lie::from_matrix_grp(g, M);
}

Representative representative(const RenormState& state, int grid) {
    Representative rep;
    const Functionals fn = functionals(state);
    Normalized N;
    int chi = 1;
    bool ok = false;
    try {
        N = normalize(state.action());
        ok = !N.geodesic_form;
    } catch (const lie::LogBranchError&) {
        ok = false;
    }
    if (!ok) {
        chi = 2;
        N = normalize(sublattice(state.action(), chi));
    }
    rep.chi = chi;
    rep.geodesic_form = N.geodesic_form;
    rep.cocycle = {N.act.gen2.freq, N.act.gen2.map};
    const GroupId g = state.group;
    if (chi == 1) {
        rep.slope = fn.u;
    } else {
        rep.slope = integrate(g, [&](double x) { return rep.cocycle.jet(x).s; }, 1.0);
    }
    std::vector<Grp> vals(static_cast<std::size_t>(grid)), W(static_cast<std::size_t>(grid));
    std::vector<Alg> ders(static_cast<std::size_t>(grid));
    dyn::parallel_for(grid, [&](int j) {
        const double x = static_cast<double>(j) / grid;
        const maps::Jet jt = rep.cocycle.jet(x);
        vals[static_cast<std::size_t>(j)] = jt.S;
        ders[static_cast<std::size_t>(j)] = jt.s;
        W[static_cast<std::size_t>(j)] = jt.S * lie::exp(-x * rep.slope);
    });
    rep.constant = commutant_fit(rep.slope, W);
    for (int j = 0; j < grid; ++j) {
        const double x = static_cast<double>(j) / grid;
        rep.dist_c0 = std::max(rep.dist_c0, lie::dist(vals[static_cast<std::size_t>(j)], rep.constant * lie::exp(x * rep.slope)));
        rep.dist_c1 = std::max(rep.dist_c1, lie::norm(ders[static_cast<std::size_t>(j)] - rep.slope));
    }
    return rep;
}

}  // namespace cocycle::renorm
