#include <doctest.h>

#include "cocycle/kam.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cocycle;
using namespace cocycle::kam;
using maps::cd;

namespace {

constexpr double kPi = std::numbers::pi;
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

AlgebraMap random_map(GroupId g, std::mt19937_64& rng, int degree, double target) {
    std::normal_distribution<double> nd;
    AlgebraMap u = AlgebraMap::zero(g);
    const int w = u.rank();
    for (int i = 0; i < u.ncomps(); ++i)
        for (int k = (i < w ? 1 : -degree); k <= degree; ++k) {
            const cd z(nd(rng), nd(rng));
            u.comps[static_cast<std::size_t>(i)].set(k, z);
            if (i < w) u.comps[static_cast<std::size_t>(i)].set(-k, std::conj(z));
        }
    return (target / maps::norm(u, 0)) * u;
}

}  // namespace

TEST_CASE("truncation schedule") {
    KamParams p;
    CHECK(schedule_N(p, 0) == 48);
    CHECK(schedule_N(p, 1) == static_cast<int>(std::lround(std::pow(48.0, 1.1))));
    CHECK(schedule_K(p, 0) == doctest::Approx(48.0 * 48.0));
    // 2^{tau+1} gamma btilde^{q+1} N^tau with btilde = 2, q = 1 for SU(2)
    CHECK(resonance_floor(GroupId::SU2, p, 48) == doctest::Approx(4.0 * 3.0 * 4.0 * 48.0));
}

TEST_CASE("resonance detection and reduction vector in SU(2)") {
    KamParams p;
    const Grp A = lie::exp(lie::toral(GroupId::SU2, {kPi * 3 * kGolden}));
    const ResonancePartition part = detect_resonances(A, kGolden, p.N, schedule_K(p, 0), p);
    REQUIRE(part.resonant.size() == 1);
    CHECK(part.k[0].value() == 3);
    const ObstructionData ob = reduction_vector(part);
    // rho(H) = 3 with rho(h) = t / pi
    CHECK(lie::toral_coord(ob.H, 0) == doctest::Approx(3 * kPi));
    const ResonancePartition far = detect_resonances(lie::exp(lie::toral(GroupId::SU2, {1.3})), kGolden, p.N,
                                                     schedule_K(p, 0), p);
    CHECK(far.resonant.empty());
    CHECK(far.diophantine.size() == 1);
}

TEST_CASE("torus frame diagonalizes a conjugated toral element") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    Alg x = lie::zero(GroupId::SU3);
    for (int i = 0; i < 8; ++i) x[i] = nd(rng);
    const Grp S = lie::exp(x);
    const Grp A = S * lie::exp(lie::toral(GroupId::SU3, {0.4, 1.1})) * lie::inverse(S);
    const Grp P = torus_frame(A);
    CHECK(lie::is_toral(lie::log(P * A * lie::inverse(P), lie::LogBranch::Any), 1e-9));
}

TEST_CASE("resonant example becomes constant after one step") {
    const ResonanceDemo d = resonance_demo(kGolden, 3, 1e-3, KamParams{});
    CHECK(d.residual < 1e-12);
    CHECK(d.geodesic_defect < 1e-12);
}

TEST_CASE("property: local reduction converges super-exponentially") {
    KamParams p;
    for (std::uint64_t seed : {1u, 2u}) {
        std::mt19937_64 rng(seed);
        const NearConstant c{kGolden, lie::exp(lie::toral(GroupId::SU2, {1.3})), random_map(GroupId::SU2, rng, 4, 1e-4)};
        const KamRun run = kam_run_constant(c, p);
        CHECK(run.converged);
        CHECK(run.rows.back().eps0 < 1e-12);
        CHECK(run.rows.size() <= 9);
        CHECK(run.rows.back().approx_dist < 1e-8);
        // the accumulated conjugation maps the reduced cocycle back onto the original one
        CHECK(run.rows.back().roundtrip < 1e-10);
    }
}

TEST_CASE("smallness guard stops large steps") {
    KamParams p;
    p.max_linear = 1e-3;
    std::mt19937_64 rng(3);
    const NearConstant c{kGolden, lie::exp(lie::toral(GroupId::SU2, {1.3})), random_map(GroupId::SU2, rng, 4, 0.2)};
    const KamRun run = kam_run_constant(c, p);
    CHECK(run.stopped);
    CHECK_FALSE(run.converged);
}

TEST_CASE("normal form of a geodesic cocycle") {
    const lie::Geodesic E = lie::geodesic(GroupId::SU2, {1.0});
    CHECK(twists(E) == std::vector<int>{2});
    KamParams p;
    p.max_steps = 10;
    AlgebraMap U = AlgebraMap::zero(GroupId::SU2);
    U.comps[1].set(0, 1e-3);
    const NormalForm nf = geodesic_run({kGolden, E, U}, p);
    CHECK(nf.converged);
    // the mode-0 obstruction survives to first order
    CHECK(nf.P_norm == doctest::Approx(1e-3).epsilon(1e-2));
    const GeodesicStep st = geodesic_step({kGolden, E, U}, p);
    CHECK(maps::norm(nf.P - st.ob, 0) < 1e-5);
}

TEST_CASE("obstruction part keeps the windows only") {
    AlgebraMap U = AlgebraMap::zero(GroupId::SU2);
    U.comps[0].set(0, 1.0);
    U.comps[0].set(1, 2.0);
    U.comps[0].set(-1, 2.0);
    U.comps[1].set(-1, 3.0);
    U.comps[1].set(0, 4.0);
    U.comps[1].set(2, 5.0);
    const AlgebraMap ob = obstruction_part(U, {2});
    CHECK(ob.comps[0].at(0) == cd(1.0));
    CHECK(ob.comps[0].at(1) == cd(0.0));
    CHECK(ob.comps[1].at(-1) == cd(3.0));
    CHECK(ob.comps[1].at(0) == cd(4.0));
    CHECK(ob.comps[1].at(2) == cd(0.0));
}

TEST_CASE("a priori margin matches the quadratic prediction") {
    NearGeodesic c{kGolden, lie::geodesic(GroupId::SU2, {1.0}), AlgebraMap::zero(GroupId::SU2)};
    c.U.comps[1].set(0, 0.05);
    const AprioriReport r = apriori_check(c, 2048);
    CHECK(r.margin > 0);
    CHECK(std::abs(r.margin - r.predicted_margin) <= 0.2 * r.predicted_margin);
    CHECK(r.a_sq == doctest::Approx(r.a_sq_expansion).epsilon(1e-6));
}
