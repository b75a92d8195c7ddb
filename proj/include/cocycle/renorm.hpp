#pragma once

#include "cocycle/arithmetic.hpp"
#include "cocycle/cocycle.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cocycle::renorm {

using dyn::Cocycle;
using lie::Alg;
using lie::Grp;
using lie::GroupId;
using maps::GroupMap;

/// One generator (x, S) -> (x + freq, map(x) S) of a Z^2 action on R x G.
struct Generator {
    double freq = 0.0;
    GroupMap map;
};

struct ZSquareAction {
    Generator gen1;  ///< usually (1, Id) before renormalization
    Generator gen2;  ///< (alpha, A)
};

/// Raised when an iterate would need more group products than the configured cap.
class IterateCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sup over grid points of dist(gen1(x + f2) gen2(x), gen2(x + f1) gen1(x)) for x in [0, span].
[[nodiscard]] double commutation_residual(const ZSquareAction& act, double span = 1.0, int grid = 512);

/// Action generated by (1, Id) and (alpha, A); throws if the cocycle is not 1-periodic.
[[nodiscard]] ZSquareAction action_of(const Cocycle& c);

/// The element e1^k e2^l of the action.
[[nodiscard]] Generator element(const ZSquareAction& act, long k, long l);

/// Sublattice generated by (chi e1, e2), rescaled so that the first generator has frequency 1.
[[nodiscard]] ZSquareAction sublattice(const ZSquareAction& act, int chi);

struct RenormOptions {
    long q_cap = 20000;
    bool compute_norms = true;  ///< fill d1, d2 from grid norms of the base iterates
    int norm_grid = 1024;
};

struct RenormState {
    int n = 0;
    std::array<long, 4> Q{};  ///< [[q_n, q_{n-1}], [p_n, p_{n-1}]], row-major
    double nu = 0.0;
    double alpha_n = 0.0;     ///< frequency of the rescaled second generator
    double beta_prev = 0.0;   ///< beta_{n-1}, the rescaling factor
    long q_n = 0;
    long q_prev = 0;
    Generator c_tilde;        ///< frequency 1
    Generator a_tilde;        ///< frequency alpha_n
    std::optional<double> d1, d2;
    GroupId group = GroupId::SU2;

    [[nodiscard]] ZSquareAction action() const { return {c_tilde, a_tilde}; }
};

/// n-th renormalization of the action, localized at nu and rescaled by beta_{n-1}.
[[nodiscard]] RenormState renormalize(const ZSquareAction& act, const arith::ContinuedFraction& cf, int n, double nu,
                                      const RenormOptions& opts = {});

struct Functionals {
    double J1 = 0.0;  ///< length functional at nu
    Alg u;            ///< u_n(nu)
    std::optional<double> d1, d2;
};

[[nodiscard]] Functionals functionals(const RenormState& state);

struct DRow {
    int n = 0;
    long q = 0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// d_n^i = beta_n |a_{q_{n-1}}|_{L^i} + beta_{n-1} |a_{q_n}|_{L^i} along the denominators below the cap.
[[nodiscard]] std::vector<DRow> d_trace(const Cocycle& c, const arith::ContinuedFraction& cf, int grid, long q_cap);

struct Normalized {
    ZSquareAction act;
    GroupMap B;
    bool geodesic_form = false;  ///< constant pair not on a common torus
    double seam_mismatch = 0.0;  ///< max over seams of derivative mismatch, orders 0..4
};

/// Conjugates the action so that its first generator becomes (1, Id).
[[nodiscard]] Normalized normalize(const ZSquareAction& act);

struct Representative {
    Cocycle cocycle;        ///< normalized second generator, 1-periodic
    Alg slope;              ///< model slope
    Grp constant;           ///< best constant in the commutant of the slope
    double dist_c0 = 0.0;   ///< sup distance to constant * exp(slope x)
    double dist_c1 = 0.0;   ///< sup |L-derivative - slope|
    int chi = 1;            ///< sublattice index used
    bool geodesic_form = false;
};

/// Renormalization representative at the state's base point, compared with its abelian model.
[[nodiscard]] Representative representative(const RenormState& state, int grid = 128);

/// Least-squares constant commuting with h that best matches the samples W_j.
[[nodiscard]] Grp commutant_fit(const Alg& h, const std::vector<Grp>& samples);

}  // namespace cocycle::renorm
