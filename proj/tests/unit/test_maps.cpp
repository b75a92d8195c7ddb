#include <doctest.h>

#include "cocycle/maps.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cocycle;
using namespace cocycle::maps;

namespace {

constexpr double kPi = std::numbers::pi;

AlgebraMap random_map(GroupId g, std::mt19937_64& rng, int degree, double scale) {
    std::normal_distribution<double> nd;
    AlgebraMap u = AlgebraMap::zero(g);
    const int w = u.rank();
    for (int i = 0; i < u.ncomps(); ++i) {
        for (int k = (i < w ? 1 : -degree); k <= degree; ++k) {
            const cd z(nd(rng), nd(rng));
            if (i < w) {
                u.comps[static_cast<std::size_t>(i)].set(k, scale * z);
                u.comps[static_cast<std::size_t>(i)].set(-k, scale * std::conj(z));
            } else {
                u.comps[static_cast<std::size_t>(i)].set(k, scale * z);
            }
        }
    }
    return u;
}

double max_coeff_diff(const AlgebraMap& a, const AlgebraMap& b) {
    double m = 0.0;
    for (int i = 0; i < a.ncomps(); ++i) {
        const auto& s = a.comps[static_cast<std::size_t>(i)];
        const auto& t = b.comps[static_cast<std::size_t>(i)];
        for (int k = std::min(s.kmin, t.kmin); k <= std::max(s.kmax(), t.kmax()); ++k) m = std::max(m, std::abs(s.at(k) - t.at(k)));
    }
    return m;
}

}  // namespace

TEST_CASE("series arithmetic and shifts") {
    Series s;
    s.set(2, cd(1.0, 0.0));
    s.set(-1, cd(0.0, 3.0));
    CHECK(s.kmin == -1);
    CHECK(s.kmax() == 2);
    CHECK(s.bandwidth() == 2);
    const Series t = shift(s, 3);
    CHECK(t.at(5) == cd(1.0, 0.0));
    CHECK(t.at(2) == cd(0.0, 3.0));
    const double x = 0.23;
    CHECK(std::abs(t.eval(x) - std::exp(cd(0, 2 * kPi * 3 * x)) * s.eval(x)) < 1e-14);
    CHECK(std::abs(s.deriv(x, 1) - (cd(0, 4 * kPi) * std::exp(cd(0, 4 * kPi * x)) +
                                    cd(0, 3) * cd(0, -2 * kPi) * std::exp(cd(0, -2 * kPi * x)))) < 1e-12);
}

TEST_CASE("fourier projection recovers a band-limited map exactly") {
    std::mt19937_64 rng(1);
    for (GroupId g : {GroupId::SU2, GroupId::SU3}) {
        const AlgebraMap u = random_map(g, rng, 6, 0.2);
        const AlgebraMap v = fourier(g, [&](double x) { return u.eval(x); }, 16);
        CHECK(max_coeff_diff(u, v) < 1e-13);
        const auto samples = sample(u, 64);
        CHECK(max_coeff_diff(u, fourier_samples(g, samples, 16)) < 1e-13);
    }
}

TEST_CASE("property: truncations reassemble the identity") {
    std::mt19937_64 rng(2);
    const AlgebraMap u = random_map(GroupId::SU3, rng, 10, 1.0);
    for (int N : {0, 3, 7}) {
        const AlgebraMap t = truncate(u, {TruncKind::T, N, {}, {}});
        const AlgebraMap r = truncate(u, {TruncKind::R, N, {}, {}});
        CHECK(max_coeff_diff(t + r, u) == 0.0);
        const AlgebraMap td = truncate(u, {TruncKind::Tdot, N, {}, {}});
        CHECK(max_coeff_diff(td + AlgebraMap::constant(u.mean()), t) < 1e-15);
    }
}

TEST_CASE("obstruction windows") {
    CHECK(obstruction_window(3) == std::vector<int>{-2, -1});
    CHECK(obstruction_window(-3) == std::vector<int>{1, 2});
    CHECK(obstruction_window(1).empty());
    TruncationSpec lam{TruncKind::Lambda, 0, {}, {3}};
    CHECK(lam.keeps(GroupId::SU2, 1, -2));
    CHECK_FALSE(lam.keeps(GroupId::SU2, 1, 0));
    CHECK_FALSE(lam.keeps(GroupId::SU2, 1, 1));
    TruncationSpec lam0{TruncKind::Lambda0, 0, {}, {3}};
    CHECK(lam0.keeps(GroupId::SU2, 1, 0));
    CHECK(lam0.keeps(GroupId::SU2, 0, 0));
    CHECK_FALSE(lam0.keeps(GroupId::SU2, 0, 1));
}

TEST_CASE("norms of a single mode") {
    AlgebraMap u = AlgebraMap::zero(GroupId::SU2);
    u.comps[1].set(2, cd(0.5, 0.0));
    CHECK(norm(u, 0) == doctest::Approx(0.5));
    CHECK(norm(u, 1) == doctest::Approx(0.5 * 4 * kPi));
    CHECK(l2_norm(u) == doctest::Approx(0.5));
}

TEST_CASE("group maps: products, inverses and translations") {
    std::mt19937_64 rng(3);
    const GroupMap B = GroupMap::exp(random_map(GroupId::SU2, rng, 3, 0.2));
    const GroupMap E = GroupMap::geodesic(lie::geodesic(GroupId::SU2, {1.0}));
    const GroupMap C = B * E * B.inverse();
    for (double x : {0.0, 0.4, 0.9}) {
        CHECK(lie::dist(C(x), B(x) * E(x) * lie::inverse(B(x))) < 1e-14);
        CHECK(lie::dist(B.translate(0.25)(x), B(x + 0.25)) < 1e-14);
        CHECK(lie::dist(C(x), C(x + 1.0)) < 1e-12);
    }
    CHECK(C.period() == 1);
}

TEST_CASE("iterates follow the cocycle rule") {
    std::mt19937_64 rng(4);
    const GroupMap A = GroupMap::exp(random_map(GroupId::SU3, rng, 2, 0.3));
    const double alpha = 0.381966;
    const GroupMap A3 = A.iterate(alpha, 3);
    const GroupMap Am2 = A.iterate(alpha, -2);
    for (double x : {0.1, 0.6}) {
        CHECK(lie::dist(A3(x), A(x + 2 * alpha) * A(x + alpha) * A(x)) < 1e-13);
        CHECK(lie::dist(Am2(x), lie::inverse(A(x - alpha) * A(x - 2 * alpha))) < 1e-13);
    }
}

TEST_CASE("L-derivative of a geodesic is its slope") {
    const lie::Geodesic e = lie::geodesic(GroupId::SU2, {2.0});
    const AlgebraMap a = L_derivative(GroupMap::geodesic(e), 8);
    CHECK(lie::norm(a.mean() - e.slope()) < 1e-12);
    CHECK(norm(a - AlgebraMap::constant(e.slope()), 0) < 1e-12);
}

TEST_CASE("jets agree with finite differences") {
    std::mt19937_64 rng(5);
    const GroupMap A = GroupMap::exp(random_map(GroupId::SU2, rng, 3, 0.4)) *
                       GroupMap::geodesic(lie::geodesic(GroupId::SU2, {1.0}));
    const double x = 0.37, h = 1e-6;
    const Jet j = A.jet(x);
    const Eigen::MatrixXcd d = (lie::matrix(A(x + h)) - lie::matrix(A(x - h))) / (2 * h) * lie::matrix(lie::inverse(A(x)));
    CHECK((d - lie::matrix(j.s)).norm() < 1e-7);
}

TEST_CASE("log map inverts exp on the principal branch") {
    std::mt19937_64 rng(6);
    const AlgebraMap u = random_map(GroupId::SU2, rng, 4, 0.1);
    const AlgebraMap v = log_map(GroupMap::exp(u), 32);
    CHECK(max_coeff_diff(u, v) < 1e-12);
}
