#include "cocycle/liegroup.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cocycle::lie {

namespace {

constexpr double kPi = std::numbers::pi;

const GroupInfo kInfo[3] = {
    {"SU2", 1, 1, 3, 2, 1, 1, 1.0},
    {"SO3", 1, 1, 3, 1, 2, 1, 1.0},
    // Inverses of square submatrices of [[1,0],[0,1],[1,1]] have operator norm at most the golden ratio.
    {"SU3", 2, 3, 8, 3, 1, 1, 1.6180339887498949},
};

bool is_su2_like(GroupId g) { return g != GroupId::SU3; }

void check_same(GroupId a, GroupId b) {
    if (a != b) throw GroupMismatch("operands belong to different groups");
}

// Root rho of su(3) sits at matrix entry (i, j).
constexpr int kRootRow[3] = {0, 1, 0};
constexpr int kRootCol[3] = {1, 2, 2};

Eigen::Matrix3cd su3_matrix(const Alg& x) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 0) = cd(0, x[0]);
    m(1, 1) = cd(0, x[1] - x[0]);
    m(2, 2) = cd(0, -x[1]);
    for (int r = 0; r < 3; ++r) {
        const cd z(x[2 + 2 * r], x[3 + 2 * r]);
        m(kRootRow[r], kRootCol[r]) = z;
        m(kRootCol[r], kRootRow[r]) = -std::conj(z);
    }
    return m;
}

Alg su3_from_matrix(const Eigen::Matrix3cd& m) {
    Alg x;
    x.g = GroupId::SU3;
    // Project onto anti-Hermitian traceless part first.
    Eigen::Matrix3cd a = 0.5 * (m - m.adjoint());
    const cd tr = a.trace() / 3.0;
    a -= tr * Eigen::Matrix3cd::Identity();
    x[0] = a(0, 0).imag();
    x[1] = -a(2, 2).imag();
    for (int r = 0; r < 3; ++r) {
        const cd z = a(kRootRow[r], kRootCol[r]);
        x[2 + 2 * r] = z.real();
        x[3 + 2 * r] = z.imag();
    }
    return x;
}

Eigen::Matrix3cd su3_exp(const Alg& x) {
    const Eigen::Matrix3cd h = cd(0, -1) * su3_matrix(x);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(0.5 * (h + h.adjoint()));
    const Eigen::Vector3d lam = es.eigenvalues();
    Eigen::Vector3cd ph;
    for (int i = 0; i < 3; ++i) ph(i) = std::polar(1.0, lam(i));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

const GroupInfo& info(GroupId g) { return kInfo[static_cast<int>(g)]; }

GroupId parse_group(std::string_view s) {
    if (s == "SU2" || s == "su2") return GroupId::SU2;
    if (s == "SO3" || s == "so3") return GroupId::SO3;
    if (s == "SU3" || s == "su3") return GroupId::SU3;
    throw std::invalid_argument("unknown group '" + std::string(s) + "' (expected SU2, SO3 or SU3)");
}

std::string_view group_name(GroupId g) { return info(g).name; }

Alg& Alg::operator+=(const Alg& o) {
    check_same(g, o.g);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
}

Alg& Alg::operator-=(const Alg& o) {
    check_same(g, o.g);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    return *this;
}

Alg& Alg::operator*=(double s) {
    for (double& v : c) v *= s;
    return *this;
}

Alg operator+(Alg a, const Alg& b) { return a += b; }
Alg operator-(Alg a, const Alg& b) { return a -= b; }
Alg operator-(Alg a) { return a *= -1.0; }
Alg operator*(double s, Alg a) { return a *= s; }
Alg operator*(Alg a, double s) { return a *= s; }

Alg zero(GroupId g) {
    Alg x;
    x.g = g;
    return x;
}

Alg toral(GroupId g, const std::vector<double>& coeffs) {
    Alg x = zero(g);
    const int w = info(g).rank;
    if (static_cast<int>(coeffs.size()) != w) throw std::invalid_argument("toral: wrong number of coefficients");
    for (int i = 0; i < w; ++i) x[i] = coeffs[static_cast<std::size_t>(i)];
    return x;
}

Alg root_vector(GroupId g, int rho, cd z) {
    Alg x = zero(g);
    set_root_coord(x, rho, z);
    return x;
}

cd root_coord(const Alg& x, int rho) {
    const int w = info(x.g).rank;
    return {x[w + 2 * rho], x[w + 2 * rho + 1]};
}

void set_root_coord(Alg& x, int rho, cd z) {
    const GroupInfo& gi = info(x.g);
    if (rho < 0 || rho >= gi.pos_roots) throw std::out_of_range("root index");
    x[gi.rank + 2 * rho] = z.real();
    x[gi.rank + 2 * rho + 1] = z.imag();
}

double toral_coord(const Alg& x, int i) { return x[i]; }

Eigen::MatrixXcd matrix(const Alg& x) {
    if (x.g == GroupId::SU3) return su3_matrix(x);
    Eigen::Matrix2cd m;
    const cd u(x[1], x[2]);
    m << cd(0, x[0]), u, -std::conj(u), cd(0, -x[0]);
    return m;
}

Alg from_matrix(GroupId g, const Eigen::MatrixXcd& m) {
    if (g == GroupId::SU3) return su3_from_matrix(m);
    Alg x = zero(g);
    const cd d = 0.5 * (m(0, 0) - m(1, 1));
    x[0] = d.imag();
    const cd u = 0.5 * (m(0, 1) - std::conj(m(1, 0)));
    x[1] = u.real();
    x[2] = u.imag();
    return x;
}

Alg bracket(const Alg& x, const Alg& y) {
    check_same(x.g, y.g);
    if (is_su2_like(x.g)) {
        Alg r = zero(x.g);
        r[0] = 2 * (x[1] * y[2] - x[2] * y[1]);
        r[1] = 2 * (x[2] * y[0] - x[0] * y[2]);
        r[2] = 2 * (x[0] * y[1] - x[1] * y[0]);
        return r;
    }
    const Eigen::Matrix3cd a = su3_matrix(x), b = su3_matrix(y);
    return su3_from_matrix(a * b - b * a);
}

double killing(const Alg& x, const Alg& y) {
    check_same(x.g, y.g);
    if (is_su2_like(x.g)) return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    double s = x[0] * y[0] + x[1] * y[1] - 0.5 * (x[0] * y[1] + x[1] * y[0]);
    for (int i = 2; i < 8; ++i) s += x[i] * y[i];
    return s;
}

double norm(const Alg& x) { return std::sqrt(std::max(0.0, killing(x, x))); }

Grp identity(GroupId g) {
    Grp s;
    s.g = g;
    return s;
}

Grp operator*(const Grp& x, const Grp& y) {
    check_same(x.g, y.g);
    Grp r;
    r.g = x.g;
    if (is_su2_like(x.g)) {
        r.a = x.a * y.a - x.b * std::conj(y.b);
        r.b = x.a * y.b + x.b * std::conj(y.a);
    } else {
        r.m.noalias() = x.m * y.m;
    }
    return r;
}

Grp inverse(const Grp& x) {
    Grp r;
    r.g = x.g;
    if (is_su2_like(x.g)) {
        r.a = std::conj(x.a);
        r.b = -x.b;
    } else {
        r.m = x.m.adjoint();
    }
    return r;
}

Grp exp(const Alg& x) {
    Grp r;
    r.g = x.g;
    if (is_su2_like(x.g)) {
        const double th = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        const double s = th < 1e-8 ? 1.0 - th * th / 6.0 : std::sin(th) / th;
        r.a = cd(std::cos(th), x[0] * s);
        r.b = cd(x[1] * s, x[2] * s);
    } else {
        r.m = su3_exp(x);
    }
    return r;
}

Alg log(const Grp& s, LogBranch branch) {
    if (is_su2_like(s.g)) {
        cd a = s.a, b = s.b;
        if (s.g == GroupId::SO3) {
            if (std::abs(a.real()) < 1e-8 && branch == LogBranch::Strict) {
                std::ostringstream os;
                os << "SO3 log: rotation by pi, eigenpair (-1,-1) of the rotation is degenerate (Re a = " << a.real()
                   << ")";
                throw LogBranchError(os.str());
            }
            if (a.real() < 0) {
                a = -a;
                b = -b;
            }
        }
        const double v = std::sqrt(a.imag() * a.imag() + std::norm(b));
        const double th = std::atan2(v, a.real());
        Alg x = zero(s.g);
        if (v < 1e-300) {
            if (a.real() < 0) {
                if (branch == LogBranch::Strict)
                    throw LogBranchError("SU2 log: element is -Id, eigenpair (-1,-1) is degenerate");
                x[0] = kPi;
            }
            return x;
        }
        if (branch == LogBranch::Strict && a.real() < 0 && v < 1e-8) {
            std::ostringstream os;
            os << "SU2 log: eigenvalues e^{+-i theta} within " << v << " of the degenerate pair (-1,-1)";
            throw LogBranchError(os.str());
        }
        const double f = th / v;
        x[0] = f * a.imag();
        x[1] = f * b.real();
        x[2] = f * b.imag();
        return x;
    }
    Eigen::ComplexSchur<Eigen::Matrix3cd> schur(s.m);
    const Eigen::Matrix3cd& T = schur.matrixT();
    const Eigen::Matrix3cd& Q = schur.matrixU();
    std::array<double, 3> th{};
    for (int i = 0; i < 3; ++i) {
        const cd lam = T(i, i);
        if (branch == LogBranch::Strict && std::abs(lam + 1.0) < 1e-8) {
            std::ostringstream os;
            os << "SU3 log: eigenvalue " << lam << " (index " << i << ") lies on the branch cut at -1";
            throw LogBranchError(os.str());
        }
        th[static_cast<std::size_t>(i)] = std::arg(lam);
    }
    // Eigen-arguments are principal; restore tracelessness by moving one argument across the cut.
    const double sum = th[0] + th[1] + th[2];
    const long wrap = std::lround(sum / (2 * kPi));
    if (wrap > 0) {
        *std::max_element(th.begin(), th.end()) -= 2 * kPi * static_cast<double>(wrap);
    } else if (wrap < 0) {
        *std::min_element(th.begin(), th.end()) -= 2 * kPi * static_cast<double>(wrap);
    }
    Eigen::Vector3cd d;
    for (int i = 0; i < 3; ++i) d(i) = cd(0, th[static_cast<std::size_t>(i)]);
    return su3_from_matrix(Q * d.asDiagonal() * Q.adjoint());
}

Alg Ad(const Grp& s, const Alg& x) {
    check_same(s.g, x.g);
    if (is_su2_like(s.g)) {
        const cd a = s.a, b = s.b;
        const double t = x[0];
        const cd u(x[1], x[2]);
        Alg r = zero(s.g);
        r[0] = t * (std::norm(a) - std::norm(b)) + 2 * (a * std::conj(b) * u).imag();
        const cd up = a * a * u + b * b * std::conj(u) - cd(0, 2 * t) * a * b;
        r[1] = up.real();
        r[2] = up.imag();
        return r;
    }
    return su3_from_matrix(s.m * su3_matrix(x) * s.m.adjoint());
}

double dist(const Grp& x, const Grp& y) {
    check_same(x.g, y.g);
    if (is_su2_like(x.g)) {
        const double d1 = std::sqrt(std::norm(x.a - y.a) + std::norm(x.b - y.b));
        if (x.g == GroupId::SU2) return d1;
        const double d2 = std::sqrt(std::norm(x.a + y.a) + std::norm(x.b + y.b));
        return std::min(d1, d2);
    }
    return (x.m - y.m).norm() / std::sqrt(2.0);
}

double constraint_defect(const Grp& x) {
    if (is_su2_like(x.g)) return std::abs(std::norm(x.a) + std::norm(x.b) - 1.0);
    const double u = (x.m * x.m.adjoint() - Eigen::Matrix3cd::Identity()).norm();
    return std::max(u, std::abs(x.m.determinant() - 1.0));
}

void reunitarize(Grp& x) {
    if (is_su2_like(x.g)) {
        const double n = std::sqrt(std::norm(x.a) + std::norm(x.b));
        x.a /= n;
        x.b /= n;
        return;
    }
    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(x.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3cd u = svd.matrixU() * svd.matrixV().adjoint();
    const cd det = u.determinant();
    u *= std::polar(1.0, -std::arg(det) / 3.0);
    x.m = u;
}

Eigen::MatrixXcd matrix(const Grp& s) {
    if (!is_su2_like(s.g)) return s.m;
    Eigen::Matrix2cd m;
    m << s.a, s.b, -std::conj(s.b), std::conj(s.a);
    return m;
}

Eigen::Matrix3d rotation(const Grp& s) {
    if (!is_su2_like(s.g)) throw GroupMismatch("rotation() is defined for SU2/SO3 only");
    Eigen::Matrix3d r;
    for (int j = 0; j < 3; ++j) {
        Alg e = zero(s.g);
        e[j] = 1.0;
        const Alg v = Ad(s, e);
        for (int i = 0; i < 3; ++i) r(i, j) = v[i];
    }
    return r;
}

Grp from_matrix_grp(GroupId g, const Eigen::MatrixXcd& m) {
    Grp s = identity(g);
    if (is_su2_like(g)) {
        s.a = 0.5 * (m(0, 0) + std::conj(m(1, 1)));
        s.b = 0.5 * (m(0, 1) - std::conj(m(1, 0)));
    } else {
        s.m = m;
    }
    reunitarize(s);
    return s;
}

bool is_toral(const Alg& h, double tol) {
    const GroupInfo& gi = info(h.g);
    double off = 0;
    for (int i = gi.rank; i < gi.dim; ++i) off = std::max(off, std::abs(h[i]));
    return off <= tol * std::max(1.0, norm(h));
}

std::vector<double> root_values(const Alg& h) {
    if (!is_toral(h, 1e-9)) throw std::invalid_argument("root_values: vector is not in the standard toral algebra");
    if (is_su2_like(h.g)) return {h[0] / kPi};
    const double c0 = h[0], c1 = h[1];
    return {(2 * c0 - c1) / (2 * kPi), (2 * c1 - c0) / (2 * kPi), (c0 + c1) / (2 * kPi)};
}

const RootSystem& roots(GroupId g) {
    static const std::array<RootSystem, 3> table = [] {
        std::array<RootSystem, 3> out;
        for (GroupId id : {GroupId::SU2, GroupId::SO3, GroupId::SU3}) {
            RootSystem rs;
            rs.g = id;
            const GroupInfo& gi = info(id);
            for (int i = 0; i < gi.rank; ++i) {
                std::vector<double> e(static_cast<std::size_t>(gi.rank), 0.0);
                e[static_cast<std::size_t>(i)] = 1.0;
                rs.toral_basis.push_back(toral(id, e));
            }
            if (id == GroupId::SU3) {
                rs.dual_basis = {toral(id, {4 * kPi / 3, 2 * kPi / 3}), toral(id, {2 * kPi / 3, 4 * kPi / 3})};
                rs.combination = {{1, 0}, {0, 1}, {1, 1}};
                rs.id_lattice = {toral(id, {2 * kPi, 0}), toral(id, {0, 2 * kPi})};
            } else {
                rs.dual_basis = {toral(id, {kPi})};
                rs.combination = {{1}};
                rs.id_lattice = {toral(id, {id == GroupId::SU2 ? 2 * kPi : kPi})};
            }
            for (int r = 0; r < gi.pos_roots; ++r) {
                Alg c = bracket(root_vector(id, r, 1.0), root_vector(id, r, cd(0, 1)));
                c *= 1.0 / norm(c);
                rs.coroots.push_back(c);
            }
            out[static_cast<std::size_t>(id)] = rs;
        }
        return out;
    }();
    return table[static_cast<std::size_t>(g)];
}

Classification classify(const Alg& h, double tol) {
    const std::vector<double> rv = root_values(h);
    const double scale = norm(h);
    const RootSystem& rs = roots(h.g);
    Classification out;
    Splitting& sp = out.splitting;
    sp.base = h;
    for (int r = 0; r < static_cast<int>(rv.size()); ++r) {
        if (std::abs(rv[static_cast<std::size_t>(r)]) <= tol * scale)
            sp.zero_roots.push_back(r);
        else
            sp.nonzero_roots.push_back(r);
    }
    out.regular = sp.zero_roots.empty();
    if (out.regular) return out;
    // g0: coroots and root vectors of the vanishing roots; g+: orthocomplement of those coroots in t.
    std::vector<Alg> toral0;
    for (int r : sp.zero_roots) {
        Alg c = rs.coroots[static_cast<std::size_t>(r)];
        for (const Alg& e : toral0) c -= killing(c, e) * e;
        if (norm(c) > 1e-9) toral0.push_back((1.0 / norm(c)) * c);
    }
    sp.g0_basis = toral0;
    for (int r : sp.zero_roots) {
        sp.g0_basis.push_back(root_vector(h.g, r, 1.0));
        sp.g0_basis.push_back(root_vector(h.g, r, cd(0, 1)));
    }
    std::vector<Alg> ortho = toral0;
    for (const Alg& b : rs.toral_basis) {
        Alg c = b;
        for (const Alg& e : ortho) c -= killing(c, e) * e;
        if (norm(c) > 1e-9) {
            c *= 1.0 / norm(c);
            ortho.push_back(c);
            sp.gplus_basis.push_back(c);
        }
    }
    return out;
}

Alg Geodesic::slope() const {
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = 2 * kPi * r[i];
    return toral(g, v);
}

Alg Geodesic::offset() const {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = 2 * kPi * a[i];
    return toral(g, v);
}

Grp Geodesic::operator()(double x) const {
    if (is_su2_like(g)) {
        Grp s = identity(g);
        s.a = std::polar(1.0, 2 * kPi * (r[0] * x + a[0]));
        return s;
    }
    Grp s = identity(g);
    const double t1 = 2 * kPi * (r[0] * x + a[0]);
    const double t2 = 2 * kPi * (r[1] * x + a[1]);
    s.m = Eigen::Matrix3cd::Zero();
    s.m(0, 0) = std::polar(1.0, t1);
    s.m(1, 1) = std::polar(1.0, t2 - t1);
    s.m(2, 2) = std::polar(1.0, -t2);
    return s;
}

int closing_period(const Alg& h, int max_period, double tol) {
    const Grp id = identity(h.g);
    for (int p = 1; p <= max_period; ++p)
        if (dist(exp(static_cast<double>(p) * h), id) < tol) return p;
    return 0;
}

Geodesic geodesic(GroupId g, std::vector<double> r, std::vector<double> a) {
    const int w = info(g).rank;
    if (a.empty()) a.assign(static_cast<std::size_t>(w), 0.0);
    if (static_cast<int>(r.size()) != w || static_cast<int>(a.size()) != w)
        throw std::invalid_argument("geodesic: r and a must have rank-many entries");
    Geodesic e{g, std::move(r), std::move(a), 1};
    if (dist(exp(e.slope()), identity(g)) > 1e-10) {
        std::ostringstream os;
        os << "geodesic: r = (";
        for (std::size_t i = 0; i < e.r.size(); ++i) os << (i ? "," : "") << e.r[i];
        os << ") does not close up with period 1 in " << group_name(g);
        throw std::invalid_argument(os.str());
    }
    return e;
}

DegreeProjection project_degree(const Alg& h, double threshold) {
    DegreeProjection out;
    if (is_su2_like(h.g)) {
        const double n = norm(h);
        const double unit = h.g == GroupId::SU2 ? 2 * kPi : kPi;
        const double k = std::nearbyint(n / unit);
        out.r = {h.g == GroupId::SU2 ? k : k / 2};
        out.residual = std::abs(n - k * unit);
        out.quantized = out.residual <= threshold * 2 * kPi;
        return out;
    }
    const Eigen::Matrix3cd herm = cd(0, -1) * su3_matrix(h);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(0.5 * (herm + herm.adjoint()));
    std::array<double, 3> t{};
    for (int i = 0; i < 3; ++i) t[static_cast<std::size_t>(i)] = es.eigenvalues()(i) / (2 * kPi);
    std::sort(t.begin(), t.end(), std::greater<>());
    std::array<double, 3> n{};
    for (std::size_t i = 0; i < 3; ++i) n[i] = std::nearbyint(t[i]);
    // Nearest point of {n in Z^3 : sum n = 0}: fix the sum on the coordinates with largest rounding error.
    long s = std::lround(n[0] + n[1] + n[2]);
    while (s != 0) {
        std::size_t best = 0;
        double best_err = -1e300;
        for (std::size_t i = 0; i < 3; ++i) {
            const double err = s > 0 ? n[i] - t[i] : t[i] - n[i];
            if (err > best_err) {
                best_err = err;
                best = i;
            }
        }
        n[best] += s > 0 ? -1.0 : 1.0;
        s += s > 0 ? -1 : 1;
    }
    double d2 = 0;
    for (std::size_t i = 0; i < 3; ++i) d2 += (t[i] - n[i]) * (t[i] - n[i]);
    out.r = {n[0], -n[2]};
    out.residual = kPi * std::sqrt(2 * d2);
    out.quantized = out.residual <= threshold * 2 * kPi;
    return out;
}

Alg dexp(const Alg& u, const Alg& v) {
    check_same(u.g, v.g);
    if (is_su2_like(u.g)) {
        const double th = 2 * norm(u);
        const Alg av = bracket(u, v);
        const Alg aav = bracket(u, av);
        double c1, c2;
        if (th < 1e-3) {
            const double t2 = th * th;
            c1 = 0.5 - t2 / 24 + t2 * t2 / 720;
            c2 = 1.0 / 6 - t2 / 120 + t2 * t2 / 5040;
        } else {
            c1 = (1 - std::cos(th)) / (th * th);
            c2 = (th - std::sin(th)) / (th * th * th);
        }
        return v + c1 * av + c2 * aav;
    }
    Alg acc = v, term = v;
    const double vn = std::max(norm(v), 1e-300);
    for (int n = 1; n < 120; ++n) {
        term = (1.0 / (n + 1)) * bracket(u, term);
        acc += term;
        if (norm(term) < 1e-18 * vn) break;
    }
    return acc;
}

}  // namespace cocycle::lie
