#pragma once

#include "cocycle/cocycle.hpp"
#include "cocycle/cohomology.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocycle::kam {

using dyn::Cocycle;
using lie::Alg;
using lie::Grp;
using lie::GroupId;
using maps::AlgebraMap;
using maps::GroupMap;

/// Raised when a step's linearized conjugation is too large for the quadratic remainder to be trusted.
class SmallnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KamParams {
    int N = 48;             ///< initial truncation order
    double sigma = 0.1;     ///< N_n = N^{(1 + sigma)^n}
    double nu_exp = 1.0;    ///< K_n = N_n^{tau + nu_exp}
    double gamma = 3.0;
    double tau = 1.0;
    double s0 = 40.0;       ///< loss-of-derivatives index, reported only
    int max_steps = 8;
    int M = 256;            ///< working bandwidth for extracted perturbations
    double tol = 1e-13;     ///< stop once the perturbation sup norm is below this
    double max_linear = 0.5;  ///< largest admissible sup norm of a step's conjugation
    int report_s = 2;       ///< derivative order of the reported C^s norm
};

[[nodiscard]] int schedule_N(const KamParams& p, int step);
[[nodiscard]] double schedule_K(const KamParams& p, int step);
/// Lower bound 2^{tau+1} gamma btilde^{q+1} N^tau that K must exceed.
[[nodiscard]] double resonance_floor(GroupId g, const KamParams& p, int N);

struct ResonancePartition {
    GroupId g = GroupId::SU2;
    std::vector<double> root_values;      ///< a_rho mod 1, in (-1/2, 1/2]
    int level = 0;                        ///< chosen index i
    std::vector<int> levels;              ///< N_0, ..., N_{q+1}
    double K = 0.0;
    std::vector<int> resonant;            ///< I_r
    std::vector<int> zero;                ///< I_0
    std::vector<int> diophantine;         ///< I_d
    std::vector<std::optional<int>> k;    ///< k_rho for rho in I_r
    bool unique = true;                   ///< no second resonant mode in 0 < |k| <= 2 N_{i+1}
    std::vector<int> roots_considered;    ///< empty means all positive roots

    [[nodiscard]] int N_level() const { return levels[static_cast<std::size_t>(level)]; }
};

/// Partition of the positive roots of a toral constant A by resonance with alpha.
[[nodiscard]] ResonancePartition detect_resonances(const Grp& A, double alpha, int N, double K, const KamParams& p,
                                                   const std::vector<int>& only_roots = {});

struct ObstructionData {
    Alg H;                          ///< reduction vector in t
    std::vector<long> numerators;   ///< coordinates of H in the dual basis, times D
    long D = 1;
    int period = 1;                 ///< period of x -> exp(-H x)
    AlgebraMap ob;                  ///< obstruction part of the perturbation, filled by the steps
};

/// Exact rational solve of rho(H) = k_rho on I_r and rho(H) = 0 on I_0.
[[nodiscard]] ObstructionData reduction_vector(const ResonancePartition& part);

/// Constant P with P A P^{-1} in the standard torus.
[[nodiscard]] Grp torus_frame(const Grp& A);

/// Applies Ad(P) to every value of a perturbation.
[[nodiscard]] AlgebraMap adjoint_map(const Grp& P, const AlgebraMap& u);

/// (alpha, A e^{U(.)}) with A constant.
struct NearConstant {
    double alpha = 0.0;
    Grp A;
    AlgebraMap U;

    [[nodiscard]] Cocycle cocycle() const;
};

struct KamStep {
    int N = 0;
    double K = 0.0;
    ResonancePartition part;
    ObstructionData ob;
    AlgebraMap Y;
    GroupMap G;                 ///< c_next = Conj_G(c)
    NearConstant next;
    double eps_in = 0.0;
    double eps_out = 0.0;
    double Y_norm = 0.0;
    double min_divisor = 0.0;
    double smallness_product = 0.0;  ///< K (btilde^q N)^2 eps_in
    double tail_ratio = 0.0;
    double constancy_defect = 0.0;   ///< variation of the reduced obstruction over x
    bool rediagonalized = false;
};

/// One reduction step near the constant cocycle (alpha, A), A toral.
[[nodiscard]] KamStep kam_step_constant(const NearConstant& c, int N, double K, const KamParams& p);

struct KamRow {
    int n = 0;
    int N = 0;
    double K = 0.0;
    Grp A;
    double eps0 = 0.0;
    double eps_s = 0.0;
    double L_norm = 0.0;       ///< C^1 size of the accumulated conjugation
    double approx_dist = 0.0;  ///< sup distance between c and the reducible approximant
    int resonant = 0;
    double roundtrip = 0.0;
};

struct KamRun {
    std::vector<KamRow> rows;
    bool converged = false;
    bool stopped = false;      ///< guard stop (smallness lost)
    std::string status;
    std::vector<double> decay_ratios;  ///< log eps_{n+1} / log eps_n
    bool superexponential = false;
    GroupMap L;                ///< c = Conj_L(c_n)
    NearConstant last;
};

[[nodiscard]] KamRun kam_run_constant(const NearConstant& c, const KamParams& p);

/// (alpha, E(.) e^{U(.)}) with E a closed geodesic.
struct NearGeodesic {
    double alpha = 0.0;
    lie::Geodesic E;
    AlgebraMap U;

    [[nodiscard]] Cocycle cocycle() const;
};

/// Lambda^0 support: toral mean plus, on each root, mode 0 and the obstruction window of its twist.
[[nodiscard]] AlgebraMap obstruction_part(const AlgebraMap& u, const std::vector<int>& twists);
/// Twisted frequencies rho(e_r) of a geodesic.
[[nodiscard]] std::vector<int> twists(const lie::Geodesic& e);

struct GeodesicStep {
    AlgebraMap B;
    NearGeodesic next;
    double B_norm = 0.0;
    double off_norm = 0.0;  ///< |U - Lambda^0 U|_0 before the step
    AlgebraMap ob;          ///< first-order obstruction of U on the roots, in the Lambda^0 windows
};

[[nodiscard]] GeodesicStep geodesic_step(const NearGeodesic& c, const KamParams& p);

struct NormalFormRow {
    int n = 0;
    double U_norm = 0.0;
    double off_norm = 0.0;
    double B_norm = 0.0;
    double P_norm = 0.0;
};

struct NormalForm {
    std::vector<NormalFormRow> rows;
    Alg lambda;        ///< toral shift
    AlgebraMap P;      ///< obstruction part on the roots
    double P_norm = 0.0;
    GroupMap B;        ///< accumulated conjugation
    bool converged = false;
    std::string status;
};

[[nodiscard]] NormalForm geodesic_run(const NearGeodesic& c, const KamParams& p);

/// (alpha, E(.) A e^{U(.)}) with e_r singular and A toral.
struct NearSingular {
    double alpha = 0.0;
    lie::Geodesic E;
    Grp A;
    AlgebraMap U;

    [[nodiscard]] Cocycle cocycle() const;
};

struct SingularStep {
    std::vector<int> zero_roots;
    std::vector<int> nonzero_roots;
    ResonancePartition part;    ///< over the zero roots only
    ObstructionData ob;
    int period = 1;             ///< period of the reduced cocycle
    NearSingular next;
    double eps_in = 0.0;
    double eps_out = 0.0;
    double commutant_defect = 0.0;  ///< |Ad(A') e_r - e_r|
    double roundtrip = 0.0;
};

[[nodiscard]] SingularStep singular_step(const NearSingular& c, int N, double K, const KamParams& p);

struct AprioriReport {
    double lambda0_norm = 0.0;     ///< |Lambda^0 U|_{L2}
    double derivative_norm = 0.0;  ///< |(Id - Lambda) dU|_{L2}
    double a2_sq = 0.0;            ///< |a_2|^2_{L2}
    double bound_sq = 0.0;         ///< (2 |e_r|)^2
    double margin = 0.0;           ///< bound_sq - a2_sq
    double predicted_margin = 0.0; ///< (2 |e_r| |mean root part of U|)^2
    double a_sq = 0.0;             ///< |a|^2_{L2} by quadrature
    double a_sq_expansion = 0.0;   ///< |e_r|^2 + 2 <e_r, u> + |u|^2
    std::string verdict;           ///< "consistent with degree r" or "energy strictly below |e_r|"
};

[[nodiscard]] AprioriReport apriori_check(const NearGeodesic& c, int grid = 4096);

struct ResonanceDemo {
    KamStep step;
    double residual = 0.0;        ///< sup distance of the reduced cocycle to its constant
    double geodesic_defect = 0.0; ///< sup distance between exp(-H x) and E_{-k/2}
};

/// SU(2) example A = exp(pi k alpha h), U = eps e^{2 i pi k x} j.
[[nodiscard]] ResonanceDemo resonance_demo(double alpha, int k, double eps, const KamParams& p);

}  // namespace cocycle::kam
