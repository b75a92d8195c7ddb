#include <doctest.h>

#include "cocycle/renorm.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cocycle;
using maps::AlgebraMap;
using maps::cd;
using maps::GroupMap;

namespace {

constexpr double kPi = std::numbers::pi;

dyn::Cocycle mixed_cocycle(double alpha, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    AlgebraMap b = AlgebraMap::zero(lie::GroupId::SU2);
    for (int k = -3; k <= 3; ++k) b.comps[1].set(k, scale * std::exp(-0.3 * std::abs(k)) * cd(nd(rng), nd(rng)));
    return dyn::conjugate({alpha, GroupMap::geodesic(lie::geodesic(lie::GroupId::SU2, {1.0}))}, GroupMap::exp(b));
}

}  // namespace

TEST_CASE("d functionals of a geodesic equal 2 pi r at every step") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    for (double r : {1.0, 2.0}) {
        const dyn::Cocycle c{cf.alpha_d(), GroupMap::geodesic(lie::geodesic(lie::GroupId::SU2, {r}))};
        const auto rows = renorm::d_trace(c, cf, 128, 2000);
        REQUIRE(rows.size() > 5);
        for (const auto& row : rows) {
            CHECK(row.d1 == doctest::Approx(2 * kPi * r).epsilon(1e-9));
            CHECK(row.d2 == doctest::Approx(2 * kPi * r).epsilon(1e-9));
        }
    }
}

TEST_CASE("J1 of a geodesic is 2 pi r for every n and base point") {
    const auto cf = arith::cf_expand(arith::parse_alpha("silver"), 30);
    const dyn::Cocycle c{cf.alpha_d(), GroupMap::geodesic(lie::geodesic(lie::GroupId::SU2, {3.0}))};
    const renorm::ZSquareAction act = renorm::action_of(c);
    for (int n : {1, 3, 6})
        for (double nu : {0.0, 0.4}) {
            const renorm::RenormState st = renorm::renormalize(act, cf, n, nu);
            CHECK(renorm::functionals(st).J1 == doctest::Approx(6 * kPi).epsilon(1e-9));
        }
}

TEST_CASE("renormalized actions still commute") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    const renorm::ZSquareAction act = renorm::action_of(mixed_cocycle(cf.alpha_d(), 1, 0.2));
    CHECK(renorm::commutation_residual(act) < 1e-12);
    for (int n : {2, 5}) {
        const renorm::RenormState st = renorm::renormalize(act, cf, n, 0.1);
        CHECK(st.c_tilde.freq == doctest::Approx(1.0));
        CHECK(renorm::commutation_residual(st.action(), 1.0, 64) < 1e-9);
    }
}

TEST_CASE("property: functionals are nonincreasing on mixed cocycles") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    for (std::uint64_t seed : {2u, 3u}) {
        const renorm::ZSquareAction act = renorm::action_of(mixed_cocycle(cf.alpha_d(), seed, 0.3));
        double prev_j = 1e300, prev_d1 = 1e300;
        for (int n = 1; cf.q_at(n) <= 600; ++n) {
            const renorm::Functionals f = renorm::functionals(renorm::renormalize(act, cf, n, 0.1));
            CHECK(f.J1 <= prev_j + 1e-12);
            REQUIRE(f.d1.has_value());
            CHECK(*f.d1 <= prev_d1 + 1e-12);
            prev_j = f.J1;
            prev_d1 = *f.d1;
        }
        CHECK(prev_j == doctest::Approx(2 * kPi).epsilon(1e-2));
    }
}

TEST_CASE("iterate cap raises a guard error") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    const renorm::ZSquareAction act = renorm::action_of(mixed_cocycle(cf.alpha_d(), 4, 0.1));
    renorm::RenormOptions opts;
    opts.q_cap = 50;
    CHECK_THROWS_AS((void)renorm::renormalize(act, cf, 12, 0.0, opts), renorm::IterateCapError);
}

TEST_CASE("normalization turns the first generator into (1, Id)") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    const renorm::ZSquareAction act = renorm::action_of(mixed_cocycle(cf.alpha_d(), 5, 0.2));
    const renorm::RenormState st = renorm::renormalize(act, cf, 4, 0.2);
    const renorm::Normalized nz = renorm::normalize(st.action());
    for (double x : {0.0, 0.3, 0.8})
        CHECK(lie::dist(nz.act.gen1.map(x), lie::identity(lie::GroupId::SU2)) < 1e-10);
    CHECK(nz.act.gen1.freq == doctest::Approx(1.0));
}
