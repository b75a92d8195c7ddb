#pragma once

#include "cocycle/arithmetic.hpp"
#include "cocycle/liegroup.hpp"
#include "cocycle/maps.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cocycle::dyn {

using lie::Alg;
using lie::Grp;
using lie::GroupId;
using maps::AlgebraMap;
using maps::GroupMap;
using maps::Jet;

/// Number of worker threads used by grid evaluations (default 1).
void set_threads(int n);
[[nodiscard]] int threads();
/// Runs fn(i) for i in [0, n) over the configured worker threads.
void parallel_for(int n, const std::function<void(int)>& fn);

/// (alpha, A(.)) acting on T x G by (x, S) -> (x + alpha, A(x) S).
struct Cocycle {
    double alpha = 0.0;
    GroupMap map;

    [[nodiscard]] GroupId group() const { return map.group(); }
    [[nodiscard]] int period() const { return map.period(); }
    [[nodiscard]] Grp operator()(double x) const { return map(x); }
    [[nodiscard]] Jet jet(double x) const { return map.jet(x); }
};

/// (n alpha, A_n(.)); negative n gives inverse iterates.
[[nodiscard]] Cocycle iterate(const Cocycle& c, long n);
/// (alpha, B(. + alpha) A(.) B^{-1}(.))
[[nodiscard]] Cocycle conjugate(const Cocycle& c, const GroupMap& B);

/// Fiber derivatives a_n(x) at the points xs, recorded for each n in record_at (ascending, positive).
struct FiberWalk {
    std::vector<long> ns;
    std::vector<std::vector<Alg>> a;  ///< a[i][j] = a_{ns[i]}(xs[j])
    std::vector<std::vector<Grp>> A;  ///< A_{ns[i]}(xs[j]) when requested
};

[[nodiscard]] FiberWalk fiber_walk(const Cocycle& c, const std::vector<double>& xs, const std::vector<long>& record_at,
                                   bool keep_group = false);

/// a_n = L A_n, sampled and projected to bandwidth M.
[[nodiscard]] AlgebraMap fiber_derivative(const Cocycle& c, long n, int M);

/// Transfer operator U b(x) = Ad(A^{-1}(x)) b(x + alpha), evaluated on a grid of G points.
[[nodiscard]] std::vector<Alg> transfer_apply_samples(const Cocycle& c, const std::function<Alg(double)>& b, int G);
[[nodiscard]] AlgebraMap transfer_apply(const Cocycle& c, const AlgebraMap& b, int M);

struct EnergyOptions {
    int grid = 4096;
    long q_cap = 20000;
    int nu_samples = 16;
    double degree_threshold = 0.05;
    double convergence_tol = 1e-3;
};

struct EnergyRow {
    int k = 0;          ///< continued-fraction index
    long q = 0;         ///< q_k
    double l2 = 0.0;    ///< (1/q)|a_q|_{L2}
    double l1 = 0.0;    ///< (1/q)|a_q|_{L1}
    double degree_residual = 0.0;
    double best_nu = 0.0;
    double invariance_residual = 0.0;
};

struct EnergyReport {
    GroupId g = GroupId::SU2;
    std::vector<EnergyRow> rows;
    double energy = 0.0;
    bool converged = false;
    std::string status;  ///< "converged" or "undetermined: ..."
    std::vector<double> nus;
    std::vector<Alg> curve;  ///< invariant-curve estimates at nus from the last row
    double best_nu = 0.0;
    Alg curve_best;
    double invariance_residual = 0.0;
    lie::DegreeProjection degree;
};

[[nodiscard]] EnergyReport energy_and_degree(const Cocycle& c, const arith::ContinuedFraction& cf,
                                             const EnergyOptions& opts = {});

struct CurveEstimate {
    Alg value;
    double residual = 0.0;
    long q = 0;
};

/// a(nu) ~ a_{q_k}(nu)/q_k at the largest q_k <= q_cap, with |Ad(A(nu)) a(nu) - a(nu + alpha)|.
[[nodiscard]] CurveEstimate invariant_curve(const Cocycle& c, const arith::ContinuedFraction& cf, double nu,
                                            long q_cap = 20000);

/// Denominators q_k (k >= 1) up to the cap, with their indices.
[[nodiscard]] std::vector<std::pair<int, long>> convergent_schedule(const arith::ContinuedFraction& cf, long q_cap);

struct BracketRow {
    int k = 0;
    long q = 0;
    double value = 0.0;  ///< (1/q^2) | sum_{k<=q} sum_{l<=k} [U^k u, U^l u] |_{L1}
};

/// Trace of the antisymmetric bracket sum with u = L(A^{-1}) along the denominators.
[[nodiscard]] std::vector<BracketRow> bracket_sum_trace(const Cocycle& c, const arith::ContinuedFraction& cf, int grid,
                                                        long q_cap);

}  // namespace cocycle::dyn
