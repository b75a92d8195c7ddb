#pragma once

#include "cocycle/liegroup.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace cocycle::maps {

using lie::Alg;
using lie::cd;
using lie::GroupId;
using lie::Grp;

/// Scalar Fourier series sum_k c_k e^{2 i pi k x / P}, k in [kmin, kmin + c.size()).
struct Series {
    int kmin = 0;
    std::vector<cd> c;

    [[nodiscard]] static Series zeros(int kmin, int kmax);
    [[nodiscard]] bool empty() const { return c.empty(); }
    [[nodiscard]] int kmax() const { return kmin + static_cast<int>(c.size()) - 1; }
    [[nodiscard]] cd at(int k) const;
    /// Sets coefficient k, growing the range if needed.
    void set(int k, cd v);
    void add(int k, cd v) { set(k, at(k) + v); }
    [[nodiscard]] cd eval(double x, int period = 1) const;
    /// d^order/dx^order of the series at x.
    [[nodiscard]] cd deriv(double x, int order, int period = 1) const;
    /// Largest |k| carrying a coefficient above tol.
    [[nodiscard]] int bandwidth(double tol = 0.0) const;
    /// Drops leading/trailing coefficients with modulus <= tol.
    void trim(double tol = 0.0);
};

[[nodiscard]] Series operator+(const Series& a, const Series& b);
[[nodiscard]] Series operator-(const Series& a, const Series& b);
[[nodiscard]] Series operator*(cd s, const Series& a);
/// Multiplies by e^{2 i pi shift x / P}: coefficient k moves to k + shift.
[[nodiscard]] Series shift(const Series& a, int shift);

/**
 * @brief Band-limited map from R/PZ to the Lie algebra.
 *
 * comps[i] for i < rank are toral coordinates (real-valued, conjugate-symmetric data);
 * comps[rank + rho] is the complex coordinate along j_rho.
 */
struct AlgebraMap {
    GroupId g = GroupId::SU2;
    int period = 1;
    std::vector<Series> comps;

    [[nodiscard]] static AlgebraMap zero(GroupId g, int period = 1);
    [[nodiscard]] static AlgebraMap constant(const Alg& x, int period = 1);

    [[nodiscard]] int rank() const { return lie::info(g).rank; }
    [[nodiscard]] int ncomps() const { return static_cast<int>(comps.size()); }
    [[nodiscard]] bool is_toral_comp(int i) const { return i < rank(); }

    [[nodiscard]] Alg eval(double x) const;
    [[nodiscard]] Alg deriv(double x, int order = 1) const;
    [[nodiscard]] int bandwidth(double tol = 0.0) const;
    /// Mean value (constant Fourier mode).
    [[nodiscard]] Alg mean() const;
    /// Spectrum as (component, mode) pairs with coefficient above tol.
    [[nodiscard]] std::vector<std::pair<int, int>> spectrum(double tol = 0.0) const;
    /// Restates the map on the period k*P (modes scale by k).
    [[nodiscard]] AlgebraMap with_period(int new_period) const;

    AlgebraMap& operator+=(const AlgebraMap& o);
    AlgebraMap& operator-=(const AlgebraMap& o);
    AlgebraMap& operator*=(double s);
};

[[nodiscard]] AlgebraMap operator+(AlgebraMap a, const AlgebraMap& b);
[[nodiscard]] AlgebraMap operator-(AlgebraMap a, const AlgebraMap& b);
[[nodiscard]] AlgebraMap operator*(double s, AlgebraMap a);

struct FourierReport {
    int samples = 0;
    double tail_ratio = 0.0;  ///< energy in M/2 < |k| <= M over total energy
    bool aliasing_warning = false;
};

/// Fourier coefficients |k| <= M of samples f(j P / G), j < G, with G = samples.size() >= 2M+1.
[[nodiscard]] AlgebraMap fourier_samples(GroupId g, const std::vector<Alg>& samples, int M, int period = 1,
                                         FourierReport* report = nullptr);
/// Samples f on max(4M, min_samples) points and projects to bandwidth M.
[[nodiscard]] AlgebraMap fourier(GroupId g, const std::function<Alg(double)>& f, int M, int period = 1,
                                 FourierReport* report = nullptr, int min_samples = 0);
/// Values of U on the uniform grid of G points over one period.
[[nodiscard]] std::vector<Alg> sample(const AlgebraMap& u, int G, int order = 0);

/// Spectral truncation operators, all acting by coefficient selection.
enum class TruncKind {
    T,         ///< |k| <= N
    Tdot,      ///< 0 < |k| <= N
    R,         ///< |k| > N
    Centered,  ///< toral 0 < |k| <= N, root rho: 0 < |k - center_rho| <= N (root skipped if no center)
    Lambda,    ///< root rho: obstruction window of twisted frequency m_rho, without mode 0
    Lambda0,   ///< Lambda plus mode 0 on every root and the toral mean
    ObBox,     ///< toral mean plus root rho at center_rho (roots without center skipped)
};

struct TruncationSpec {
    TruncKind kind = TruncKind::T;
    int N = 0;
    std::vector<std::optional<int>> centers;  ///< per positive root
    std::vector<int> twist;                   ///< per positive root, twisted frequency m_rho

    [[nodiscard]] bool keeps(GroupId g, int comp, int k) const;
};

/// Obstruction window in U-modes for twisted frequency m (excluding mode 0): {-m+1..-1} or {1..-m-1}.
[[nodiscard]] std::vector<int> obstruction_window(int m);

[[nodiscard]] AlgebraMap truncate(const AlgebraMap& u, const TruncationSpec& spec);

/// C^s norm: max over sigma <= s of the sup over a grid of |d^sigma U|.
[[nodiscard]] double norm(const AlgebraMap& u, int s = 0, int grid = 0);
/// L^2 norm over one period (normalized measure).
[[nodiscard]] double l2_norm(const AlgebraMap& u, int grid = 0);

/// Value and L-derivative (d/dx S(x)) S(x)^{-1} of a group-valued map.
struct Jet {
    Grp S;
    Alg s;
};

class GroupMapNode;

/**
 * @brief Map R -> G as an expression tree. Period 0 means "not periodic / defined on R only".
 */
class GroupMap {
public:
    GroupMap() = default;
    explicit GroupMap(std::shared_ptr<const GroupMapNode> node) : node_(std::move(node)) {}

    [[nodiscard]] static GroupMap constant(const Grp& s);
    [[nodiscard]] static GroupMap identity(GroupId g) { return constant(lie::identity(g)); }
    [[nodiscard]] static GroupMap geodesic(const lie::Geodesic& e);
    /// exp(x H + offset); the declared period must close the curve.
    [[nodiscard]] static GroupMap linear(const Alg& H, int period, const Alg& offset);
    [[nodiscard]] static GroupMap linear(const Alg& H, int period);
    [[nodiscard]] static GroupMap exp(AlgebraMap u);
    [[nodiscard]] static GroupMap custom(GroupId g, int period, std::function<Jet(double)> f);

    [[nodiscard]] GroupMap operator*(const GroupMap& o) const;
    [[nodiscard]] GroupMap inverse() const;
    /// x -> A(x + theta)
    [[nodiscard]] GroupMap translate(double theta) const;
    /// x -> A(lambda x)
    [[nodiscard]] GroupMap rescale(double lambda) const;
    /// x -> A_n(x) for the rotation alpha (negative n gives inverse iterates).
    [[nodiscard]] GroupMap iterate(double alpha, long n) const;

    [[nodiscard]] Grp operator()(double x) const;
    [[nodiscard]] Jet jet(double x) const;
    [[nodiscard]] GroupId group() const;
    [[nodiscard]] int period() const;
    [[nodiscard]] bool valid() const { return static_cast<bool>(node_); }
    /// True if the tree contains only constant leaves.
    [[nodiscard]] bool is_constant() const;

private:
    std::shared_ptr<const GroupMapNode> node_;
};

class GroupMapNode {
public:
    GroupMapNode(GroupId g, int period) : g_(g), period_(period) {}
    virtual ~GroupMapNode() = default;
    [[nodiscard]] virtual Jet jet(double x) const = 0;
    [[nodiscard]] virtual bool is_constant() const { return false; }
    [[nodiscard]] GroupId group() const { return g_; }
    [[nodiscard]] int period() const { return period_; }

private:
    GroupId g_;
    int period_;
};

/// L-derivative of A, sampled on max(4M, 64) points and projected to bandwidth M.
[[nodiscard]] AlgebraMap L_derivative(const GroupMap& a, int M, FourierReport* report = nullptr);

/// log(A(x)) sampled and projected to bandwidth M (requires A near a single log branch).
[[nodiscard]] AlgebraMap log_map(const GroupMap& a, int M, FourierReport* report = nullptr, int min_samples = 0);

/// Sup over a grid of dist(A(x), B(x)) on [0, span).
[[nodiscard]] double sup_distance(const GroupMap& a, const GroupMap& b, double span = 1.0, int grid = 512);

[[nodiscard]] int lcm_period(int p, int q);

}  // namespace cocycle::maps
