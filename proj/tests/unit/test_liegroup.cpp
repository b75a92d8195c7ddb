#include <doctest.h>

#include "cocycle/liegroup.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cocycle::lie;

namespace {

constexpr double kPi = std::numbers::pi;

Alg random_alg(GroupId g, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd;
    Alg x = zero(g);
    for (int i = 0; i < x.dim(); ++i) x[i] = scale * nd(rng);
    return x;
}

Alg random_toral(GroupId g, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> c(static_cast<std::size_t>(info(g).rank));
    for (auto& v : c) v = nd(rng);
    return toral(g, c);
}

/// e^{ad X} Y by its power series.
Alg exp_ad(const Alg& x, const Alg& y) {
    Alg term = y, sum = y;
    for (int n = 1; n < 40; ++n) {
        term = (1.0 / n) * bracket(x, term);
        sum += term;
    }
    return sum;
}

double alg_dist(const Alg& a, const Alg& b) { return norm(a - b); }

}  // namespace

TEST_CASE("group constants") {
    CHECK(info(GroupId::SU2).dim == 3);
    CHECK(info(GroupId::SU3).dim == 8);
    CHECK(info(GroupId::SU3).pos_roots == 3);
    CHECK(parse_group("SO3") == GroupId::SO3);
    CHECK_THROWS((void)parse_group("SU4"));
}

TEST_CASE("property: exp/log roundtrip near the identity") {
    std::mt19937_64 rng(1);
    for (GroupId g : {GroupId::SU2, GroupId::SO3, GroupId::SU3}) {
        for (int t = 0; t < 50; ++t) {
            const Alg x = random_alg(g, rng, 0.3);
            CHECK(alg_dist(log(exp(x)), x) < 1e-10);
            CHECK(constraint_defect(exp(x)) < 1e-12);
        }
    }
}

TEST_CASE("property: Ad(exp X) equals exp(ad X)") {
    std::mt19937_64 rng(2);
    for (GroupId g : {GroupId::SU2, GroupId::SU3}) {
        for (int t = 0; t < 30; ++t) {
            const Alg x = random_alg(g, rng, 0.7), y = random_alg(g, rng);
            CHECK(alg_dist(Ad(exp(x), y), exp_ad(x, y)) < 1e-8);
        }
    }
}

TEST_CASE("property: bracket antisymmetric, Killing form invariant and nonnegative") {
    std::mt19937_64 rng(3);
    for (GroupId g : {GroupId::SU2, GroupId::SU3}) {
        for (int t = 0; t < 30; ++t) {
            const Alg x = random_alg(g, rng), y = random_alg(g, rng), z = random_alg(g, rng);
            CHECK(norm(bracket(x, x)) < 1e-14);
            CHECK(alg_dist(bracket(x, y), -bracket(y, x)) < 1e-13);
            CHECK(killing(bracket(x, y), z) == doctest::Approx(killing(x, bracket(y, z))).epsilon(1e-10));
            CHECK(killing(x, x) >= 0.0);
            // Ad preserves the form
            const Grp s = exp(z);
            CHECK(killing(Ad(s, x), Ad(s, y)) == doctest::Approx(killing(x, y)).epsilon(1e-10));
        }
    }
}

TEST_CASE("property: root vectors are eigenvectors of toral brackets") {
    std::mt19937_64 rng(4);
    for (GroupId g : {GroupId::SU2, GroupId::SU3}) {
        for (int t = 0; t < 20; ++t) {
            const Alg h = random_toral(g, rng);
            const auto rv = root_values(h);
            for (int rho = 0; rho < info(g).pos_roots; ++rho) {
                const cd z(0.3, -1.1);
                const Alg lhs = bracket(h, root_vector(g, rho, z));
                const Alg rhs = root_vector(g, rho, cd(0.0, 2.0 * kPi * rv[static_cast<std::size_t>(rho)]) * z);
                CHECK(alg_dist(lhs, rhs) < 1e-10);
            }
        }
    }
}

TEST_CASE("matrix representation is a Lie algebra morphism") {
    std::mt19937_64 rng(5);
    for (GroupId g : {GroupId::SU2, GroupId::SU3}) {
        const Alg x = random_alg(g, rng), y = random_alg(g, rng);
        const Eigen::MatrixXcd mx = matrix(x), my = matrix(y);
        CHECK((matrix(bracket(x, y)) - (mx * my - my * mx)).norm() < 1e-12);
        CHECK(alg_dist(from_matrix(g, mx), x) < 1e-14);
    }
}

TEST_CASE("SO(3) identifies antipodal unit quaternions") {
    Grp s = exp(toral(GroupId::SO3, {0.4}));
    Grp t = s;
    t.a = -t.a;
    t.b = -t.b;
    CHECK(dist(s, t) < 1e-14);
    CHECK(dist(exp(toral(GroupId::SU2, {kPi})), identity(GroupId::SU2)) > 1.0);
    CHECK(dist(exp(toral(GroupId::SO3, {kPi})), identity(GroupId::SO3)) < 1e-14);
}

TEST_CASE("strict logarithm refuses the cut locus") {
    CHECK_THROWS_AS((void)log(exp(toral(GroupId::SU2, {kPi}))), LogBranchError);
    CHECK_NOTHROW((void)log(exp(toral(GroupId::SU2, {kPi})), LogBranch::Any));
}

TEST_CASE("closed geodesics and their slopes") {
    const Geodesic e = geodesic(GroupId::SU2, {1.0});
    CHECK(norm(e.slope()) == doctest::Approx(2 * kPi));
    CHECK(dist(e(0.0), e(1.0)) < 1e-14);
    CHECK(dist(e(0.3), exp(0.3 * e.slope())) < 1e-14);
    const Geodesic e3 = geodesic(GroupId::SU3, {1.0, 1.0});
    CHECK(dist(e3(0.0), e3(1.0)) < 1e-13);
    CHECK(closing_period(toral(GroupId::SU2, {kPi / 3})) == 6);
    CHECK(closing_period(toral(GroupId::SO3, {kPi / 3})) == 3);
}

TEST_CASE("degree projection recovers the lattice vector of a conjugated slope") {
    std::mt19937_64 rng(6);
    const Alg h = geodesic(GroupId::SU2, {3.0}).slope();
    const Grp s = exp(random_alg(GroupId::SU2, rng));
    const DegreeProjection d = project_degree(Ad(s, h));
    CHECK(d.quantized);
    CHECK(d.residual < 1e-10);
    REQUIRE(d.r.size() == 1);
    CHECK(std::abs(d.r[0]) == doctest::Approx(3.0));
}

TEST_CASE("classification of toral vectors") {
    CHECK(classify(toral(GroupId::SU3, {1.0, 0.37})).regular);
    const Classification c = classify(toral(GroupId::SU3, {1.0, 0.5}));
    CHECK_FALSE(c.regular);
    CHECK(c.splitting.zero_roots.size() == 1);
}

TEST_CASE("dexp is the derivative of the exponential") {
    std::mt19937_64 rng(7);
    const Alg u = random_alg(GroupId::SU3, rng, 0.5), v = random_alg(GroupId::SU3, rng);
    const double h = 1e-6;
    // (d/dt) e^{u + t v} e^{-u} at t = 0
    const Eigen::MatrixXcd d = (matrix(exp(u + h * v)) - matrix(exp(u - h * v))) / (2 * h) * matrix(inverse(exp(u)));
    CHECK((d - matrix(dexp(u, v))).norm() < 1e-8);
}
