#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cocycle::lie {

using cd = std::complex<double>;

enum class GroupId { SU2, SO3, SU3 };

struct GroupInfo {
    const char* name;
    int rank;       ///< w
    int pos_roots;  ///< q
    int dim;        ///< f
    int center;     ///< c_G
    int chi;        ///< chi_G
    int denom;      ///< D
    double b;       ///< bound on inverses of square submatrices of the root-combination matrix
};

[[nodiscard]] const GroupInfo& info(GroupId g);
[[nodiscard]] GroupId parse_group(std::string_view s);
[[nodiscard]] std::string_view group_name(GroupId g);

class GroupMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LogBranchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Element of the Lie algebra in the fixed real basis.
 *
 * su(2)/so(3): (t, Re u, Im u) for [[it, u], [-conj(u), -it]].
 * su(3): (c1, c2) toral coefficients of h1 = diag(i,-i,0), h2 = diag(0,i,-i), then
 * (Re, Im) of the root coordinates at (1,2), (2,3), (1,3).
 */
struct Alg {
    GroupId g = GroupId::SU2;
    std::array<double, 8> c{};

    [[nodiscard]] int dim() const { return info(g).dim; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Alg& operator+=(const Alg& o);
    Alg& operator-=(const Alg& o);
    Alg& operator*=(double s);
};

[[nodiscard]] Alg operator+(Alg a, const Alg& b);
[[nodiscard]] Alg operator-(Alg a, const Alg& b);
[[nodiscard]] Alg operator-(Alg a);
[[nodiscard]] Alg operator*(double s, Alg a);
[[nodiscard]] Alg operator*(Alg a, double s);

[[nodiscard]] Alg zero(GroupId g);
/// Toral element sum_i coeffs[i] * h_i.
[[nodiscard]] Alg toral(GroupId g, const std::vector<double>& coeffs);
/// z * j_rho in the real embedding.
[[nodiscard]] Alg root_vector(GroupId g, int rho, cd z);
[[nodiscard]] cd root_coord(const Alg& x, int rho);
void set_root_coord(Alg& x, int rho, cd z);
[[nodiscard]] double toral_coord(const Alg& x, int i);

/// Matrix of X in the defining representation (2x2 for su(2)/so(3), 3x3 for su(3)).
[[nodiscard]] Eigen::MatrixXcd matrix(const Alg& x);
[[nodiscard]] Alg from_matrix(GroupId g, const Eigen::MatrixXcd& m);

[[nodiscard]] Alg bracket(const Alg& x, const Alg& y);
[[nodiscard]] double killing(const Alg& x, const Alg& y);
[[nodiscard]] double norm(const Alg& x);

/**
 * @brief Group element. SU(2) and SO(3) use the pair (a, b) of [[a, b], [-conj(b), conj(a)]],
 * a unit quaternion; SO(3) identifies (a, b) with (-a, -b). SU(3) uses a 3x3 matrix.
 */
struct Grp {
    GroupId g = GroupId::SU2;
    cd a{1.0, 0.0};
    cd b{0.0, 0.0};
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Identity();
};

[[nodiscard]] Grp identity(GroupId g);
[[nodiscard]] Grp operator*(const Grp& x, const Grp& y);
[[nodiscard]] Grp inverse(const Grp& x);
[[nodiscard]] Grp exp(const Alg& x);

enum class LogBranch { Strict, Any };
/// Principal logarithm. Strict throws LogBranchError at branch ambiguities.
[[nodiscard]] Alg log(const Grp& s, LogBranch branch = LogBranch::Strict);

[[nodiscard]] Alg Ad(const Grp& s, const Alg& x);
/// Distance in the defining representation, Frobenius norm / sqrt(2); modulo sign for SO(3).
[[nodiscard]] double dist(const Grp& x, const Grp& y);
/// Deviation from the defining constraints (unit norm / unitarity and det 1).
[[nodiscard]] double constraint_defect(const Grp& x);
/// Projects back onto the group (normalization / polar projection).
void reunitarize(Grp& x);
[[nodiscard]] Eigen::MatrixXcd matrix(const Grp& s);
/// SO(3) rotation matrix acting on algebra coordinates (SU(2)/SO(3) only).
[[nodiscard]] Eigen::Matrix3d rotation(const Grp& s);
/// Builds a group element from a matrix of the defining representation.
[[nodiscard]] Grp from_matrix_grp(GroupId g, const Eigen::MatrixXcd& m);

/// (e^{-i a_rho ...}) helpers on toral data.
/// rho(h) for positive roots, h toral: su(2) -> {t/pi}; su(3) -> (t1-t2, t2-t3, t1-t3).
[[nodiscard]] std::vector<double> root_values(const Alg& h);
/// Tests whether all non-toral coordinates vanish (relative tolerance).
[[nodiscard]] bool is_toral(const Alg& h, double tol = 1e-12);

struct RootSystem {
    GroupId g;
    std::vector<Alg> toral_basis;   ///< h_rho for rho in the Weyl basis
    std::vector<Alg> dual_basis;    ///< H_rho with rho'(H_rho) = delta
    std::vector<Alg> coroots;       ///< toral vector spanned by [j_rho, i j_rho], one per positive root
    std::vector<std::vector<int>> combination;  ///< m_{rho', rho}: positive roots in the Weyl basis
    std::vector<Alg> id_lattice;    ///< generators of exp^{-1}(Id) in t
};

[[nodiscard]] const RootSystem& roots(GroupId g);

struct Splitting {
    Alg base;
    std::vector<Alg> g0_basis;
    std::vector<Alg> gplus_basis;
    std::vector<int> zero_roots;     ///< I^(0)
    std::vector<int> nonzero_roots;  ///< I^(+)
};

struct Classification {
    bool regular = false;
    Splitting splitting;  ///< filled for singular vectors
};

inline constexpr double kSingularTol = 1e-9;

[[nodiscard]] Classification classify(const Alg& h, double tol = kSingularTol);

/// Closed geodesic E_{r,a}(x) = exp(sum_i 2 pi (r_i x + a_i) h_i).
struct Geodesic {
    GroupId g;
    std::vector<double> r;
    std::vector<double> a;
    int period = 1;

    [[nodiscard]] Alg slope() const;   ///< e_r
    [[nodiscard]] Alg offset() const;  ///< e_a
    [[nodiscard]] Grp operator()(double x) const;
};

/// Builds E_{r,a}; throws std::invalid_argument if r does not close up with period 1.
[[nodiscard]] Geodesic geodesic(GroupId g, std::vector<double> r, std::vector<double> a = {});
/// Smallest positive integer P (<= max_period) with exp(P h) = Id, or 0 if none.
[[nodiscard]] int closing_period(const Alg& h, int max_period = 64, double tol = 1e-10);

struct DegreeProjection {
    std::vector<double> r;  ///< Weyl-normalized degree vector (half-integers in SO(3))
    double residual = 0.0;
    bool quantized = true;
};

/// Nearest lattice vector to h after conjugating into the standard torus.
[[nodiscard]] DegreeProjection project_degree(const Alg& h, double threshold = 0.05);

/// K(U) V = sum_n ad(U)^n V / (n+1)!, the L-derivative of e^U along V.
[[nodiscard]] Alg dexp(const Alg& u, const Alg& v);

}  // namespace cocycle::lie
