#include "cocycle/maps.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace cocycle::maps {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place complex DFT of length n; sign = FFTW_FORWARD or FFTW_BACKWARD.
void dft(std::vector<cd>& data, int sign) {
    const int n = static_cast<int>(data.size());
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

int wrap(int k, int n) { return ((k % n) + n) % n; }

// Values of a component series on a G-point grid (derivative of given order).
std::vector<cd> synthesize(const Series& s, int G, int order, int period) {
    std::vector<cd> buf(static_cast<std::size_t>(G), 0.0);
    if (s.empty()) return buf;
    if (2 * s.bandwidth() >= G)
        throw std::invalid_argument("synthesize: grid too coarse for the series bandwidth");
    for (int k = s.kmin; k <= s.kmax(); ++k) {
        cd c = s.at(k);
        if (order > 0) c *= std::pow(cd(0, kTwoPi * k / period), order);
        buf[static_cast<std::size_t>(wrap(k, G))] += c;
    }
    dft(buf, FFTW_BACKWARD);
    return buf;
}

class ConstantNode final : public GroupMapNode {
public:
    explicit ConstantNode(const Grp& s) : GroupMapNode(s.g, 1), s_(s) {}
    Jet jet(double) const override { return {s_, lie::zero(s_.g)}; }
    bool is_constant() const override { return true; }

private:
    Grp s_;
};

class LinearNode final : public GroupMapNode {
public:
    LinearNode(const Alg& h, const Alg& offset, int period) : GroupMapNode(h.g, period), h_(h), off_(offset) {}
    Jet jet(double x) const override { return {lie::exp(x * h_ + off_), h_}; }

private:
    Alg h_, off_;
};

class GeodesicNode final : public GroupMapNode {
public:
    explicit GeodesicNode(const lie::Geodesic& e) : GroupMapNode(e.g, e.period), e_(e), slope_(e.slope()) {}
    Jet jet(double x) const override { return {e_(x), slope_}; }

private:
    lie::Geodesic e_;
    Alg slope_;
};

class ExpNode final : public GroupMapNode {
public:
    explicit ExpNode(AlgebraMap u) : GroupMapNode(u.g, u.period), u_(std::move(u)) {}
    Jet jet(double x) const override {
        const Alg v = u_.eval(x);
        const Alg dv = u_.deriv(x, 1);
        return {lie::exp(v), lie::dexp(v, dv)};
    }

private:
    AlgebraMap u_;
};

class CustomNode final : public GroupMapNode {
public:
    CustomNode(GroupId g, int period, std::function<Jet(double)> f) : GroupMapNode(g, period), f_(std::move(f)) {}
    Jet jet(double x) const override { return f_(x); }

private:
    std::function<Jet(double)> f_;
};

class ProductNode final : public GroupMapNode {
public:
    ProductNode(std::shared_ptr<const GroupMapNode> a, std::shared_ptr<const GroupMapNode> b)
        : GroupMapNode(a->group(), lcm_period(a->period(), b->period())), a_(std::move(a)), b_(std::move(b)) {}
    Jet jet(double x) const override {
        const Jet ja = a_->jet(x), jb = b_->jet(x);
        return {ja.S * jb.S, ja.s + lie::Ad(ja.S, jb.s)};
    }
    bool is_constant() const override { return a_->is_constant() && b_->is_constant(); }

private:
    std::shared_ptr<const GroupMapNode> a_, b_;
};

class InverseNode final : public GroupMapNode {
public:
    explicit InverseNode(std::shared_ptr<const GroupMapNode> a) : GroupMapNode(a->group(), a->period()), a_(std::move(a)) {}
    Jet jet(double x) const override {
        const Jet ja = a_->jet(x);
        const Grp inv = lie::inverse(ja.S);
        return {inv, -lie::Ad(inv, ja.s)};
    }
    bool is_constant() const override { return a_->is_constant(); }

private:
    std::shared_ptr<const GroupMapNode> a_;
};

class TranslateNode final : public GroupMapNode {
public:
    TranslateNode(std::shared_ptr<const GroupMapNode> a, double theta)
        : GroupMapNode(a->group(), a->period()), a_(std::move(a)), theta_(theta) {}
    Jet jet(double x) const override { return a_->jet(x + theta_); }
    bool is_constant() const override { return a_->is_constant(); }

private:
    std::shared_ptr<const GroupMapNode> a_;
    double theta_;
};

int rescaled_period(int p, double lambda) {
    if (p == 0) return 0;
    const double q = p / lambda;
    const double r = std::nearbyint(q);
    if (r >= 1 && std::abs(q - r) < 1e-12 * std::max(1.0, r)) return static_cast<int>(r);
    return 0;
}

class RescaleNode final : public GroupMapNode {
public:
    RescaleNode(std::shared_ptr<const GroupMapNode> a, double lambda)
        : GroupMapNode(a->group(), rescaled_period(a->period(), lambda)), a_(std::move(a)), lambda_(lambda) {}
    Jet jet(double x) const override {
        Jet j = a_->jet(lambda_ * x);
        j.s *= lambda_;
        return j;
    }
    bool is_constant() const override { return a_->is_constant(); }

private:
    std::shared_ptr<const GroupMapNode> a_;
    double lambda_;
};

class IterateNode final : public GroupMapNode {
public:
    IterateNode(std::shared_ptr<const GroupMapNode> a, double alpha, long n)
        : GroupMapNode(a->group(), a->period()), a_(std::move(a)), alpha_(alpha), n_(n) {}

    Jet jet(double x) const override {
        const GroupId g = group();
        Jet acc{lie::identity(g), lie::zero(g)};
        if (n_ >= 0) {
            // a_{k+1}(x) = a(x + k alpha) + Ad(A(x + k alpha)) a_k(x)
            for (long k = 0; k < n_; ++k) {
                const Jet j = a_->jet(x + static_cast<double>(k) * alpha_);
                acc.s = j.s + lie::Ad(j.S, acc.s);
                acc.S = j.S * acc.S;
                if ((k & 63) == 63) lie::reunitarize(acc.S);
            }
            return acc;
        }
        // A_{-n}(x) = A^{-1}(x - n alpha) ... A^{-1}(x - alpha)
        for (long k = 1; k <= -n_; ++k) {
            const Jet j = a_->jet(x - static_cast<double>(k) * alpha_);
            const Grp inv = lie::inverse(j.S);
            // left-multiplying by inv: L(inv * P) = Ad(inv)(p - a)
            acc.s = lie::Ad(inv, acc.s - j.s);
            acc.S = inv * acc.S;
            if ((k & 63) == 63) lie::reunitarize(acc.S);
        }
        return acc;
    }
    bool is_constant() const override { return a_->is_constant(); }

private:
    std::shared_ptr<const GroupMapNode> a_;
    double alpha_;
    long n_;
};

}  // namespace

int lcm_period(int p, int q) {
    if (p == 0 || q == 0) return 0;
    return std::lcm(p, q);
}

Series Series::zeros(int kmin, int kmax) {
    Series s;
    s.kmin = kmin;
    s.c.assign(static_cast<std::size_t>(std::max(0, kmax - kmin + 1)), 0.0);
    return s;
}

cd Series::at(int k) const {
    if (c.empty() || k < kmin || k > kmax()) return 0.0;
    return c[static_cast<std::size_t>(k - kmin)];
}

void Series::set(int k, cd v) {
    if (c.empty()) {
        kmin = k;
        c.assign(1, v);
        return;
    }
    if (k < kmin) {
        c.insert(c.begin(), static_cast<std::size_t>(kmin - k), 0.0);
        kmin = k;
    } else if (k > kmax()) {
        c.resize(static_cast<std::size_t>(k - kmin + 1), 0.0);
    }
    c[static_cast<std::size_t>(k - kmin)] = v;
}

cd Series::eval(double x, int period) const { return deriv(x, 0, period); }

cd Series::deriv(double x, int order, int period) const {
    if (c.empty()) return 0.0;
    const double th = kTwoPi * x / period;
    const cd w = std::polar(1.0, th);
    cd z = std::polar(1.0, th * kmin);
    cd acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const int k = kmin + static_cast<int>(i);
        cd term = c[i] * z;
        if (order > 0) term *= std::pow(cd(0, kTwoPi * k / period), order);
        acc += term;
        z *= w;
    }
    return acc;
}

int Series::bandwidth(double tol) const {
    int b = 0;
    for (int k = kmin; k <= kmax(); ++k)
        if (std::abs(at(k)) > tol) b = std::max(b, std::abs(k));
    return b;
}

void Series::trim(double tol) {
    while (!c.empty() && std::abs(c.back()) <= tol) c.pop_back();
    std::size_t lead = 0;
    while (lead < c.size() && std::abs(c[lead]) <= tol) ++lead;
    c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lead));
    kmin += static_cast<int>(lead);
    if (c.empty()) kmin = 0;
}

Series operator+(const Series& a, const Series& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    Series r = Series::zeros(std::min(a.kmin, b.kmin), std::max(a.kmax(), b.kmax()));
    for (int k = a.kmin; k <= a.kmax(); ++k) r.add(k, a.at(k));
    for (int k = b.kmin; k <= b.kmax(); ++k) r.add(k, b.at(k));
    return r;
}

Series operator-(const Series& a, const Series& b) { return a + cd(-1.0) * b; }

Series operator*(cd s, const Series& a) {
    Series r = a;
    for (cd& v : r.c) v *= s;
    return r;
}

Series shift(const Series& a, int shift) {
    Series r = a;
    r.kmin += shift;
    return r;
}

AlgebraMap AlgebraMap::zero(GroupId g, int period) {
    AlgebraMap u;
    u.g = g;
    u.period = period;
    const lie::GroupInfo& gi = lie::info(g);
    u.comps.assign(static_cast<std::size_t>(gi.rank + gi.pos_roots), Series{});
    return u;
}

AlgebraMap AlgebraMap::constant(const Alg& x, int period) {
    AlgebraMap u = zero(x.g, period);
    const int w = u.rank();
    for (int i = 0; i < w; ++i) u.comps[static_cast<std::size_t>(i)].set(0, x[i]);
    for (int r = 0; r < lie::info(x.g).pos_roots; ++r) u.comps[static_cast<std::size_t>(w + r)].set(0, lie::root_coord(x, r));
    return u;
}

Alg AlgebraMap::eval(double x) const { return deriv(x, 0); }

Alg AlgebraMap::deriv(double x, int order) const {
    Alg out = lie::zero(g);
    const int w = rank();
    for (int i = 0; i < w; ++i) out[i] = comps[static_cast<std::size_t>(i)].deriv(x, order, period).real();
    for (int r = 0; r + w < ncomps(); ++r)
        lie::set_root_coord(out, r, comps[static_cast<std::size_t>(w + r)].deriv(x, order, period));
    return out;
}

int AlgebraMap::bandwidth(double tol) const {
    int b = 0;
    for (const Series& s : comps) b = std::max(b, s.bandwidth(tol));
    return b;
}

Alg AlgebraMap::mean() const {
    Alg out = lie::zero(g);
    const int w = rank();
    for (int i = 0; i < w; ++i) out[i] = comps[static_cast<std::size_t>(i)].at(0).real();
    for (int r = 0; r + w < ncomps(); ++r) lie::set_root_coord(out, r, comps[static_cast<std::size_t>(w + r)].at(0));
    return out;
}

std::vector<std::pair<int, int>> AlgebraMap::spectrum(double tol) const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < ncomps(); ++i) {
        const Series& s = comps[static_cast<std::size_t>(i)];
        for (int k = s.kmin; k <= s.kmax(); ++k)
            if (std::abs(s.at(k)) > tol) out.emplace_back(i, k);
    }
    return out;
}

AlgebraMap AlgebraMap::with_period(int new_period) const {
    if (new_period % period != 0) throw std::invalid_argument("with_period: new period must be a multiple");
    const int f = new_period / period;
    AlgebraMap out = zero(g, new_period);
    for (int i = 0; i < ncomps(); ++i) {
        const Series& s = comps[static_cast<std::size_t>(i)];
        for (int k = s.kmin; k <= s.kmax(); ++k)
            if (s.at(k) != 0.0) out.comps[static_cast<std::size_t>(i)].set(k * f, s.at(k));
    }
    return out;
}

AlgebraMap& AlgebraMap::operator+=(const AlgebraMap& o) {
    if (g != o.g) throw lie::GroupMismatch("AlgebraMap groups differ");
    if (period != o.period) {
        const int p = std::lcm(period, o.period);
        *this = with_period(p);
        return *this += o.with_period(p);
    }
    for (std::size_t i = 0; i < comps.size(); ++i) comps[i] = comps[i] + o.comps[i];
    return *this;
}

AlgebraMap& AlgebraMap::operator-=(const AlgebraMap& o) {
    AlgebraMap neg = o;
    neg *= -1.0;
    return *this += neg;
}

AlgebraMap& AlgebraMap::operator*=(double s) {
    for (Series& c : comps) c = cd(s) * c;
    return *this;
}

AlgebraMap operator+(AlgebraMap a, const AlgebraMap& b) { return a += b; }
AlgebraMap operator-(AlgebraMap a, const AlgebraMap& b) { return a -= b; }
AlgebraMap operator*(double s, AlgebraMap a) { return a *= s; }

AlgebraMap fourier_samples(GroupId g, const std::vector<Alg>& samples, int M, int period, FourierReport* report) {
    const int G = static_cast<int>(samples.size());
    if (G < 2 * M + 1) throw std::invalid_argument("fourier_samples: need at least 2M+1 samples");
    AlgebraMap out = AlgebraMap::zero(g, period);
    const int w = out.rank();
    double total = 0.0, tail = 0.0;
    std::vector<cd> buf(static_cast<std::size_t>(G));
    for (int comp = 0; comp < out.ncomps(); ++comp) {
        for (int j = 0; j < G; ++j) {
            const Alg& x = samples[static_cast<std::size_t>(j)];
            buf[static_cast<std::size_t>(j)] = comp < w ? cd(x[comp]) : lie::root_coord(x, comp - w);
        }
        dft(buf, FFTW_FORWARD);
        Series s = Series::zeros(-M, M);
        for (int k = -M; k <= M; ++k) {
            cd v = buf[static_cast<std::size_t>(wrap(k, G))] / static_cast<double>(G);
            s.set(k, v);
            total += std::norm(v);
            if (2 * std::abs(k) > M) tail += std::norm(v);
        }
        if (comp < w) {
            // Enforce conjugate symmetry of real components.
            for (int k = 1; k <= M; ++k) {
                const cd avg = 0.5 * (s.at(k) + std::conj(s.at(-k)));
                s.set(k, avg);
                s.set(-k, std::conj(avg));
            }
            s.set(0, s.at(0).real());
        }
        out.comps[static_cast<std::size_t>(comp)] = s;
    }
    if (report) {
        report->samples = G;
        report->tail_ratio = total > 0 ? tail / total : 0.0;
        report->aliasing_warning = report->tail_ratio > 1e-8;
    }
    return out;
}

AlgebraMap fourier(GroupId g, const std::function<Alg(double)>& f, int M, int period, FourierReport* report,
                   int min_samples) {
    const int G = std::max({4 * M, 2 * M + 1, min_samples, 8});
    std::vector<Alg> samples(static_cast<std::size_t>(G));
    for (int j = 0; j < G; ++j) samples[static_cast<std::size_t>(j)] = f(static_cast<double>(period) * j / G);
    return fourier_samples(g, samples, M, period, report);
}

std::vector<Alg> sample(const AlgebraMap& u, int G, int order) {
    std::vector<Alg> out(static_cast<std::size_t>(G), lie::zero(u.g));
    const int w = u.rank();
    for (int comp = 0; comp < u.ncomps(); ++comp) {
        const std::vector<cd> v = synthesize(u.comps[static_cast<std::size_t>(comp)], G, order, u.period);
        for (int j = 0; j < G; ++j) {
            Alg& x = out[static_cast<std::size_t>(j)];
            if (comp < w)
                x[comp] = v[static_cast<std::size_t>(j)].real();
            else
                lie::set_root_coord(x, comp - w, v[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

std::vector<int> obstruction_window(int m) {
    std::vector<int> out;
    if (m > 0)
        for (int k = -m + 1; k <= -1; ++k) out.push_back(k);
    else if (m < 0)
        for (int k = 1; k <= -m - 1; ++k) out.push_back(k);
    return out;
}

bool TruncationSpec::keeps(GroupId g, int comp, int k) const {
    const int w = lie::info(g).rank;
    const bool toral_comp = comp < w;
    const int rho = comp - w;
    auto center = [&]() -> std::optional<int> {
        if (toral_comp || rho >= static_cast<int>(centers.size())) return std::nullopt;
        return centers[static_cast<std::size_t>(rho)];
    };
    auto in_window = [&](bool with_zero) {
        if (toral_comp) return with_zero && k == 0;
        if (with_zero && k == 0) return true;
        const int m = rho < static_cast<int>(twist.size()) ? twist[static_cast<std::size_t>(rho)] : 0;
        const std::vector<int> win = obstruction_window(m);
        return std::find(win.begin(), win.end(), k) != win.end();
    };
    switch (kind) {
        case TruncKind::T: return std::abs(k) <= N;
        case TruncKind::Tdot: return k != 0 && std::abs(k) <= N;
        case TruncKind::R: return std::abs(k) > N;
        case TruncKind::Centered: {
            if (toral_comp) return k != 0 && std::abs(k) <= N;
            const auto c = center();
            if (!c) return std::abs(k) <= N;
            return k != *c && std::abs(k - *c) <= N;
        }
        case TruncKind::Lambda: return in_window(false);
        case TruncKind::Lambda0: return in_window(true);
        case TruncKind::ObBox: {
            if (toral_comp) return k == 0;
            const auto c = center();
            return c && k == *c;
        }
    }
    return false;
}

AlgebraMap truncate(const AlgebraMap& u, const TruncationSpec& spec) {
    AlgebraMap out = AlgebraMap::zero(u.g, u.period);
    for (int comp = 0; comp < u.ncomps(); ++comp) {
        const Series& s = u.comps[static_cast<std::size_t>(comp)];
        Series& o = out.comps[static_cast<std::size_t>(comp)];
        for (int k = s.kmin; k <= s.kmax(); ++k)
            if (spec.keeps(u.g, comp, k) && s.at(k) != 0.0) o.set(k, s.at(k));
    }
    return out;
}

namespace {
int default_grid(const AlgebraMap& u, int grid) {
    if (grid > 0) return grid;
    return std::max(64, 4 * u.bandwidth() + 4);
}
}  // namespace

double norm(const AlgebraMap& u, int s, int grid) {
    const int G = default_grid(u, grid);
    double best = 0.0;
    for (int order = 0; order <= s; ++order)
        for (const Alg& x : sample(u, G, order)) best = std::max(best, lie::norm(x));
    return best;
}

double l2_norm(const AlgebraMap& u, int grid) {
    const int G = default_grid(u, grid);
    double acc = 0.0;
    for (const Alg& x : sample(u, G, 0)) acc += lie::killing(x, x);
    return std::sqrt(acc / G);
}

GroupMap GroupMap::constant(const Grp& s) { return GroupMap(std::make_shared<ConstantNode>(s)); }

GroupMap GroupMap::geodesic(const lie::Geodesic& e) { return GroupMap(std::make_shared<GeodesicNode>(e)); }

GroupMap GroupMap::linear(const Alg& H, int period, const Alg& offset) {
    if (period > 0 && lie::dist(lie::exp(static_cast<double>(period) * H), lie::identity(H.g)) > 1e-9)
        throw std::invalid_argument("GroupMap::linear: exp(P H) is not the identity for the declared period");
    return GroupMap(std::make_shared<LinearNode>(H, offset, period));
}

GroupMap GroupMap::linear(const Alg& H, int period) { return linear(H, period, lie::zero(H.g)); }

GroupMap GroupMap::exp(AlgebraMap u) { return GroupMap(std::make_shared<ExpNode>(std::move(u))); }

GroupMap GroupMap::custom(GroupId g, int period, std::function<Jet(double)> f) {
    return GroupMap(std::make_shared<CustomNode>(g, period, std::move(f)));
}

GroupMap GroupMap::operator*(const GroupMap& o) const {
    if (group() != o.group()) throw lie::GroupMismatch("GroupMap product across groups");
    return GroupMap(std::make_shared<ProductNode>(node_, o.node_));
}

GroupMap GroupMap::inverse() const { return GroupMap(std::make_shared<InverseNode>(node_)); }

GroupMap GroupMap::translate(double theta) const {
    if (theta == 0.0) return *this;
    return GroupMap(std::make_shared<TranslateNode>(node_, theta));
}

GroupMap GroupMap::rescale(double lambda) const { return GroupMap(std::make_shared<RescaleNode>(node_, lambda)); }

GroupMap GroupMap::iterate(double alpha, long n) const {
    if (n == 1) return *this;
    if (node_->is_constant()) {
        Grp base = node_->jet(0.0).S;
        if (n < 0) base = lie::inverse(base);
        Grp acc = lie::identity(group());
        for (long e = n < 0 ? -n : n; e > 0; e >>= 1) {
            if (e & 1) acc = acc * base;
            base = base * base;
        }
        lie::reunitarize(acc);
        return constant(acc);
    }
    return GroupMap(std::make_shared<IterateNode>(node_, alpha, n));
}

Grp GroupMap::operator()(double x) const { return node_->jet(x).S; }
Jet GroupMap::jet(double x) const { return node_->jet(x); }
GroupId GroupMap::group() const { return node_->group(); }
int GroupMap::period() const { return node_->period(); }
bool GroupMap::is_constant() const { return node_->is_constant(); }

AlgebraMap L_derivative(const GroupMap& a, int M, FourierReport* report) {
    const int P = a.period() > 0 ? a.period() : 1;
    return fourier(a.group(), [&](double x) { return a.jet(x).s; }, M, P, report, 64);
}

AlgebraMap log_map(const GroupMap& a, int M, FourierReport* report, int min_samples) {
    const int P = a.period() > 0 ? a.period() : 1;
    return fourier(a.group(), [&](double x) { return lie::log(a(x)); }, M, P, report, std::max(64, min_samples));
}

double sup_distance(const GroupMap& a, const GroupMap& b, double span, int grid) {
    double best = 0.0;
    for (int j = 0; j < grid; ++j) {
        const double x = span * j / grid;
        best = std::max(best, lie::dist(a(x), b(x)));
    }
    return best;
}

}  // namespace cocycle::maps
