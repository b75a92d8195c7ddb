#include <doctest.h>

#include "cocycle/cocycle.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cocycle;
using maps::AlgebraMap;
using maps::cd;
using maps::GroupMap;

namespace {

constexpr double kPi = std::numbers::pi;

AlgebraMap small_root_map(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd;
    AlgebraMap u = AlgebraMap::zero(lie::GroupId::SU2);
    for (int k = -3; k <= 3; ++k) u.comps[1].set(k, scale * cd(nd(rng), nd(rng)));
    return u;
}

}  // namespace

TEST_CASE("iterate of a geodesic cocycle") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    const lie::Geodesic e = lie::geodesic(lie::GroupId::SU2, {1.0});
    const dyn::Cocycle c{cf.alpha_d(), GroupMap::geodesic(e)};
    const dyn::Cocycle c5 = dyn::iterate(c, 5);
    CHECK(c5.alpha == doctest::Approx(5 * cf.alpha_d()));
    // E_r commutes with itself, so A_n(x) = exp(e_r (n x + n(n-1) alpha / 2))
    const double x = 0.2;
    CHECK(lie::dist(c5(x), lie::exp((5 * x + 10 * cf.alpha_d()) * e.slope())) < 1e-12);
}

TEST_CASE("fiber derivative of a geodesic grows linearly") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    const lie::Geodesic e = lie::geodesic(lie::GroupId::SU2, {2.0});
    const dyn::Cocycle c{cf.alpha_d(), GroupMap::geodesic(e)};
    const AlgebraMap a = dyn::fiber_derivative(c, 13, 8);
    CHECK(lie::norm(a.mean() - 13.0 * e.slope()) < 1e-10);
}

TEST_CASE("energy of constant and geodesic cocycles") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    dyn::EnergyOptions opts;
    opts.grid = 1024;
    opts.q_cap = 1000;
    const dyn::EnergyReport zero =
        dyn::energy_and_degree({cf.alpha_d(), GroupMap::constant(lie::exp(lie::toral(lie::GroupId::SU2, {0.7})))}, cf,
                               opts);
    CHECK(zero.energy < 1e-10);
    for (double r : {1.0, 3.0}) {
        const dyn::EnergyReport rep = dyn::energy_and_degree(
            {cf.alpha_d(), GroupMap::geodesic(lie::geodesic(lie::GroupId::SU2, {r}))}, cf, opts);
        CHECK(rep.converged);
        CHECK(rep.energy == doctest::Approx(2 * kPi * r).epsilon(1e-10));
        CHECK(rep.degree.quantized);
    }
}

TEST_CASE("property: energy is a conjugacy invariant") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    std::mt19937_64 rng(2);
    dyn::EnergyOptions opts;
    opts.grid = 1024;
    opts.q_cap = 3000;
    for (int t = 0; t < 3; ++t) {
        const dyn::Cocycle c = dyn::conjugate({cf.alpha_d(), GroupMap::geodesic(lie::geodesic(lie::GroupId::SU2, {1.0}))},
                                              GroupMap::exp(small_root_map(rng, 0.05)));
        const dyn::EnergyReport rep = dyn::energy_and_degree(c, cf, opts);
        CHECK(std::abs(rep.energy - 2 * kPi) < 1e-2);
    }
}

TEST_CASE("conjugation is undone by the inverse conjugation") {
    std::mt19937_64 rng(3);
    const dyn::Cocycle c{0.3819, GroupMap::exp(small_root_map(rng, 0.3))};
    const GroupMap B = GroupMap::exp(small_root_map(rng, 0.4));
    const dyn::Cocycle back = dyn::conjugate(dyn::conjugate(c, B), B.inverse());
    CHECK(maps::sup_distance(back.map, c.map) < 1e-12);
}

TEST_CASE("transfer operator fixes the slope of a geodesic") {
    const lie::Geodesic e = lie::geodesic(lie::GroupId::SU2, {1.0});
    const dyn::Cocycle c{0.618, GroupMap::geodesic(e)};
    const AlgebraMap b = dyn::transfer_apply(c, AlgebraMap::constant(e.slope()), 8);
    CHECK(maps::norm(b - AlgebraMap::constant(e.slope()), 0) < 1e-12);
}

TEST_CASE("convergent schedule stops at the cap") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    const auto s = dyn::convergent_schedule(cf, 100);
    REQUIRE_FALSE(s.empty());
    CHECK(s.back().second == 89);
    for (const auto& [k, q] : s) CHECK(cf.q_at(k) == q);
}

TEST_CASE("threads do not change grid results") {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    std::mt19937_64 rng(4);
    const dyn::Cocycle c = dyn::conjugate({cf.alpha_d(), GroupMap::geodesic(lie::geodesic(lie::GroupId::SU2, {1.0}))},
                                          GroupMap::exp(small_root_map(rng, 0.1)));
    dyn::EnergyOptions opts;
    opts.grid = 1024;
    opts.q_cap = 500;
    dyn::set_threads(1);
    const double e1 = dyn::energy_and_degree(c, cf, opts).rows.back().l2;
    dyn::set_threads(3);
    const double e3 = dyn::energy_and_degree(c, cf, opts).rows.back().l2;
    dyn::set_threads(1);
    CHECK(e1 == e3);
}
