#include "experiments.hpp"

#include "output.hpp"

#include "cocycle/kam.hpp"
#include "cocycle/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace lab {

using namespace cocycle;
using json = nlohmann::json;
using lie::Alg;
using lie::GroupId;
using maps::AlgebraMap;
using maps::GroupMap;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Outcome {
    Verdict verdict = Verdict::Fail;
    std::string status;
    json metrics = json::object();
};

struct Context {
    CsvWriter* csv = nullptr;
    std::vector<Cell> params;

    void emit(std::vector<Cell> cells) const {
        cells.insert(cells.end(), params.begin(), params.end());
        csv->row(cells);
    }
};

using Runner = std::function<Outcome(Context&)>;

struct Plan {
    std::vector<Cell> params;
    Runner run;
};

using Planner = std::function<Plan(const Config&, std::uint64_t seed)>;

// ---- shared readers ----

std::string join(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : ";") + format_double(x);
    return out;
}

GroupId read_group(const Config& cfg, const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed) {
    const std::string name = cfg.get_choice(key, allowed, fallback);
    return lie::parse_group(name);
}

struct Frequency {
    std::string text;
    arith::ContinuedFraction cf;
    double alpha = 0.0;
};

Frequency read_alpha(const Config& cfg, const std::string& key, const std::string& fallback, int depth) {
    Frequency f;
    f.text = cfg.get_string(key, fallback);
    try {
        f.cf = arith::cf_expand(arith::parse_alpha(f.text), depth);
    } catch (const std::exception& e) {
        throw cfg.error(key, e.what());
    }
    if (f.cf.terminated) throw cfg.error(key, "frequency is rational at depth " + std::to_string(depth));
    f.alpha = f.cf.alpha_d();
    return f;
}

lie::Geodesic read_geodesic(const Config& cfg, GroupId g, const std::vector<double>& r_default) {
    const std::vector<double> r = cfg.get_doubles("cocycle.r", r_default);
    const std::vector<double> a = cfg.get_doubles("cocycle.a", std::vector<double>(r.size(), 0.0));
    try {
        return lie::geodesic(g, r, a);
    } catch (const std::exception& e) {
        throw cfg.error("cocycle.r", e.what());
    }
}

Alg read_toral(const Config& cfg, const std::string& key, GroupId g, const std::vector<double>& fallback) {
    const std::vector<double> v = cfg.get_doubles(key, fallback);
    if (static_cast<int>(v.size()) != lie::info(g).rank)
        throw cfg.error(key, "expected " + std::to_string(lie::info(g).rank) + " toral coordinates");
    return lie::toral(g, v);
}

struct Perturbation {
    double amplitude = 0.0;  ///< target sup norm
    int degree = 4;
    double decay = 0.5;      ///< coefficient profile e^{-decay |k|}
};

Perturbation read_perturbation(const Config& cfg, double amplitude, int degree) {
    Perturbation p;
    p.amplitude = cfg.get_double("perturbation.amplitude", amplitude);
    p.degree = cfg.get_int("perturbation.degree", degree);
    p.decay = cfg.get_double("perturbation.decay", 0.5);
    if (p.amplitude < 0) throw cfg.error("perturbation.amplitude", "must be nonnegative");
    if (p.degree < 0 || p.degree > 64) throw cfg.error("perturbation.degree", "must lie in [0, 64]");
    if (p.decay < 0) throw cfg.error("perturbation.decay", "must be nonnegative");
    return p;
}

/// Random trigonometric polynomial with Gaussian coefficients, rescaled to the target sup norm.
AlgebraMap random_map(GroupId g, const Perturbation& p, std::mt19937_64& rng) {
    AlgebraMap u = AlgebraMap::zero(g);
    if (p.amplitude == 0.0) return u;
    std::normal_distribution<double> nd;
    const int w = lie::info(g).rank;
    for (int i = 0; i < u.ncomps(); ++i) {
        auto& s = u.comps[static_cast<std::size_t>(i)];
        for (int k = (i < w ? 0 : -p.degree); k <= p.degree; ++k) {
            const double scale = std::exp(-p.decay * std::abs(k));
            const double re = nd(rng), im = nd(rng);
            if (i < w) {
                if (k == 0) {
                    s.set(0, scale * re);
                } else {
                    s.set(k, scale * maps::cd(re, im));
                    s.set(-k, scale * maps::cd(re, -im));
                }
            } else {
                s.set(k, scale * maps::cd(re, im));
            }
        }
    }
    return (p.amplitude / maps::norm(u, 0)) * u;
}

kam::KamParams read_kam(const Config& cfg, kam::KamParams p = {}) {
    p.N = cfg.get_int("kam.N", p.N);
    p.sigma = cfg.get_double("kam.sigma", p.sigma);
    p.nu_exp = cfg.get_double("kam.nu", p.nu_exp);
    p.gamma = cfg.get_double("kam.gamma", p.gamma);
    p.tau = cfg.get_double("kam.tau", p.tau);
    p.s0 = cfg.get_double("kam.s0", p.s0);
    p.max_steps = cfg.get_int("kam.max_steps", p.max_steps);
    p.M = cfg.get_int("kam.M", p.M);
    p.tol = cfg.get_double("kam.tol", p.tol);
    p.max_linear = cfg.get_double("kam.max_linear", p.max_linear);
    p.report_s = cfg.get_int("kam.report_s", p.report_s);
    if (p.N < 1) throw cfg.error("kam.N", "must be positive");
    if (p.sigma <= 0) throw cfg.error("kam.sigma", "must be positive");
    if (p.M < 8 || p.M > 4096) throw cfg.error("kam.M", "must lie in [8, 4096]");
    if (p.max_steps < 0) throw cfg.error("kam.max_steps", "must be nonnegative");
    return p;
}

dyn::EnergyOptions read_energy(const Config& cfg, int grid, long q_cap) {
    dyn::EnergyOptions o;
    o.grid = cfg.get_int("energy.grid", grid);
    o.q_cap = cfg.get_long("energy.q_cap", q_cap);
    o.nu_samples = cfg.get_int("energy.nu_samples", o.nu_samples);
    o.convergence_tol = cfg.get_double("energy.convergence_tol", o.convergence_tol);
    if (o.grid < 16) throw cfg.error("energy.grid", "must be at least 16");
    if (o.q_cap < 2) throw cfg.error("energy.q_cap", "must be at least 2");
    return o;
}

/// Allows round-off of relative size kMonotoneSlack, so that exactly constant sequences pass.
constexpr double kMonotoneSlack = 1e-12;

bool nonincreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + kMonotoneSlack * std::abs(v[i - 1])) return false;
    return true;
}

Outcome guarded(const std::function<Outcome()>& body) {
    try {
        return body();
    } catch (const renorm::IterateCapError& e) {
        return {Verdict::GuardStop, std::string("iterate cap: ") + e.what(), json::object()};
    } catch (const kam::SmallnessError& e) {
        return {Verdict::GuardStop, std::string("smallness lost: ") + e.what(), json::object()};
    } catch (const coh::SmallDivisorError& e) {
        return {Verdict::GuardStop, std::string("small divisor: ") + e.what(), json::object()};
    }
}

// ---- quantization ----

Plan plan_quantization(const Config& cfg, std::uint64_t) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU2", {"SU2", "SO3", "SU3"});
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const lie::Geodesic E = read_geodesic(cfg, g, g == GroupId::SU3 ? std::vector<double>{1, 1} : std::vector<double>{1});
    const dyn::EnergyOptions opts = read_energy(cfg, 4096, 20000);
    const double tol = cfg.get_double("verdict.tol", 1e-6);
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f.text, join(E.r), join(E.a), static_cast<long>(opts.grid),
                   opts.q_cap};
    plan.run = [=](Context& ctx) {
        const dyn::Cocycle c{f.alpha, GroupMap::geodesic(E)};
        const dyn::EnergyReport rep = dyn::energy_and_degree(c, f.cf, opts);
        for (const auto& r : rep.rows) ctx.emit({static_cast<long>(r.k), r.q, r.l2, r.l1, r.degree_residual});
        const double expected = lie::norm(E.slope());
        Outcome out;
        out.metrics = {{"energy", rep.energy},   {"expected", expected}, {"error", std::abs(rep.energy - expected)},
                       {"tolerance", tol},       {"energy_status", rep.status},
                       {"degree_residual", rep.rows.empty() ? kNaN : rep.rows.back().degree_residual}};
        const bool ok = rep.converged && std::abs(rep.energy - expected) <= tol;
        out.verdict = ok ? Verdict::Pass : Verdict::Fail;
        out.status = ok ? "energy equals |e_r| within tolerance" : "energy not quantized at |e_r|: " + rep.status;
        return out;
    };
    return plan;
}

// ---- energy invariance ----

struct ConjugatedGeodesic {
    lie::Geodesic E;
    Perturbation pb;
    std::string normalize;  ///< "derivative": |LB|_0 = b_sup; "value": |log B|_0 = b_sup
    AlgebraMap logB;
    double LB_sup = 0.0;    ///< measured sup norm of the L-derivative of B
    dyn::Cocycle cocycle;
};

double derivative_sup(const AlgebraMap& logB) {
    const int M = std::max(64, 8 * logB.bandwidth());
    return maps::norm(maps::L_derivative(GroupMap::exp(logB), M), 0);
}

ConjugatedGeodesic read_conjugated(const Config& cfg, GroupId g, double alpha, std::uint64_t seed) {
    ConjugatedGeodesic out;
    out.E = read_geodesic(cfg, g, g == GroupId::SU3 ? std::vector<double>{1, 1} : std::vector<double>{1});
    out.pb.amplitude = cfg.get_double("conjugacy.b_sup", 1.0);
    out.pb.degree = cfg.get_int("conjugacy.degree", 5);
    out.pb.decay = cfg.get_double("conjugacy.decay", 0.3);
    out.normalize = cfg.get_choice("conjugacy.normalize", {"derivative", "value"}, "derivative");
    if (out.pb.amplitude < 0 || out.pb.amplitude > 1.2)
        throw cfg.error("conjugacy.b_sup", "must lie in [0, 1.2] so that exp stays on its principal branch");
    if (out.pb.degree < 0 || out.pb.degree > 32) throw cfg.error("conjugacy.degree", "must lie in [0, 32]");
    std::mt19937_64 rng(seed);
    out.logB = random_map(g, out.pb, rng);
    if (out.normalize == "derivative" && out.pb.amplitude > 0) {
        // |L exp(b)| is not linear in b; rescale until the target is met
        for (int it = 0; it < 8; ++it) {
            const double d = derivative_sup(out.logB);
            if (std::abs(d - out.pb.amplitude) <= 1e-12 * out.pb.amplitude) break;
            out.logB = (out.pb.amplitude / d) * out.logB;
        }
    }
    out.LB_sup = out.pb.amplitude > 0 ? derivative_sup(out.logB) : 0.0;
    out.cocycle = dyn::conjugate({alpha, GroupMap::geodesic(out.E)}, GroupMap::exp(out.logB));
    return out;
}

Plan plan_energy_invariance(const Config& cfg, std::uint64_t seed) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU2", {"SU2", "SO3", "SU3"});
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const ConjugatedGeodesic cg = read_conjugated(cfg, g, f.alpha, seed);
    const dyn::EnergyOptions opts = read_energy(cfg, 2048, 5000);
    const double final_tol = cfg.get_double("verdict.final_tol", 1e-3);
    const double bound_factor = cfg.get_double("verdict.bound_factor", 4.0);
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f.text, join(cg.E.r), static_cast<long>(cg.pb.degree),
                   cg.pb.amplitude, static_cast<long>(opts.grid), opts.q_cap};
    plan.run = [=](Context& ctx) {
        const dyn::EnergyReport rep = dyn::energy_and_degree(cg.cocycle, f.cf, opts);
        const double expected = lie::norm(cg.E.slope());
        const double bsup = cg.LB_sup;
        long violations = 0;
        for (const auto& r : rep.rows) {
            const double err = std::abs(r.l2 - expected);
            const double bound = bound_factor * bsup / static_cast<double>(r.q);
            const bool within = err <= bound;
            violations += within ? 0 : 1;
            ctx.emit({static_cast<long>(r.k), r.q, r.l2, r.l1, err, bound, static_cast<long>(within)});
        }
        const double final_err = rep.rows.empty() ? kNaN : std::abs(rep.rows.back().l2 - expected);
        Outcome out;
        out.metrics = {{"energy", rep.energy},         {"expected", expected},       {"final_error", final_err},
                       {"LB_sup", bsup}, {"logB_sup", maps::norm(cg.logB, 0)},       {"bound_violations", violations},
                       {"energy_status", rep.status}, {"final_tolerance", final_tol}};
        const bool ok = violations == 0 && final_err <= final_tol;
        out.verdict = ok ? Verdict::Pass : Verdict::Fail;
        out.status = ok ? "energy within the conjugacy bound at every stage"
                        : "conjugacy bound violated at " + std::to_string(violations) + " stages or final error too large";
        return out;
    };
    return plan;
}

// ---- renormalization convergence ----

Plan plan_renorm(const Config& cfg, std::uint64_t seed) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU2", {"SU2", "SO3", "SU3"});
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const ConjugatedGeodesic cg = read_conjugated(cfg, g, f.alpha, seed);
    const double nu = cfg.get_double("renorm.nu", 0.1);
    renorm::RenormOptions ro;
    ro.q_cap = cfg.get_long("renorm.q_cap", 5000);
    ro.norm_grid = cfg.get_int("renorm.norm_grid", 1024);
    const long rep_cap = cfg.get_long("renorm.representative_cap", 1000);
    const int rep_grid = cfg.get_int("renorm.representative_grid", 128);
    const double j1_tol = cfg.get_double("verdict.j1_tol", 1e-2);
    const long j1_from = cfg.get_long("verdict.j1_from_q", 1000);
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f.text, join(cg.E.r), static_cast<long>(cg.pb.degree),
                   cg.pb.amplitude, nu};
    plan.run = [=](Context& ctx) {
        return guarded([&] {
            const renorm::ZSquareAction act = renorm::action_of(cg.cocycle);
            const double expected = lie::norm(cg.E.slope());
            std::vector<double> J1s, d1s, d2s;
            double worst_late = 0.0;
            long late_rows = 0;
            for (int n = 1; n <= f.cf.depth() && f.cf.q_at(n) <= ro.q_cap; ++n) {
                const renorm::RenormState st = renorm::renormalize(act, f.cf, n, nu, ro);
                const renorm::Functionals fn = renorm::functionals(st);
                double dc0 = kNaN, dc1 = kNaN;
                long chi = 0;
                if (st.q_n <= rep_cap) {
                    const renorm::Representative rep = renorm::representative(st, rep_grid);
                    dc0 = rep.dist_c0;
                    dc1 = rep.dist_c1;
                    chi = rep.chi;
                }
                const double d1 = fn.d1.value_or(kNaN), d2 = fn.d2.value_or(kNaN);
                J1s.push_back(fn.J1);
                d1s.push_back(d1);
                d2s.push_back(d2);
                if (st.q_n >= j1_from) {
                    worst_late = std::max(worst_late, std::abs(fn.J1 - expected));
                    ++late_rows;
                }
                ctx.emit({static_cast<long>(n), st.q_n, st.alpha_n, fn.J1, lie::norm(fn.u), d1, d2,
                          std::abs(fn.J1 - expected), dc0, dc1, chi});
            }
            const bool mono = nonincreasing(J1s) && nonincreasing(d1s) && nonincreasing(d2s);
            Outcome out;
            out.metrics = {{"expected", expected},
                           {"J1_final", J1s.empty() ? kNaN : J1s.back()},
                           {"monotone", mono},
                           {"late_rows", late_rows},
                           {"worst_late_J1_error", worst_late},
                           {"j1_tolerance", j1_tol}};
            const bool ok = mono && late_rows > 0 && worst_late <= j1_tol;
            out.verdict = ok ? Verdict::Pass : Verdict::Fail;
            if (ok)
                out.status = "functionals nonincreasing and J1 within tolerance of |e_r|";
            else if (!mono)
                out.status = "a functional increased along the renormalization";
            else if (late_rows == 0)
                out.status = "no renormalization step reached q_n >= " + std::to_string(j1_from);
            else
                out.status = "J1 not within tolerance of |e_r|";
            return out;
        });
    };
    return plan;
}

// ---- local KAM ----

Plan plan_kam_local(const Config& cfg, std::uint64_t seed) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU2", {"SU2", "SU3"});
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const Alg hA = read_toral(cfg, "cocycle.A", g, g == GroupId::SU2 ? std::vector<double>{1.3} : std::vector<double>{0.9, 0.45});
    const Perturbation pert = read_perturbation(cfg, 1e-4, 4);
    kam::KamParams defaults;
    if (g == GroupId::SU3) defaults.nu_exp = 2.0;
    const kam::KamParams p = read_kam(cfg, defaults);
    const double eps_tol = cfg.get_double("verdict.eps_tol", 1e-12);
    const double approx_tol = cfg.get_double("verdict.approx_tol", 1e-8);
    std::vector<double> A_coords;
    for (int i = 0; i < lie::info(g).rank; ++i) A_coords.push_back(hA[i]);
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f.text, join(A_coords), pert.amplitude,
                   static_cast<long>(pert.degree), p.sigma, p.tau, p.nu_exp, p.gamma};
    plan.run = [=](Context& ctx) {
        std::mt19937_64 rng(seed);
        kam::NearConstant c{f.alpha, lie::exp(hA), random_map(g, pert, rng)};
        const kam::KamRun run = kam::kam_run_constant(c, p);
        for (const auto& r : run.rows)
            ctx.emit({static_cast<long>(r.n), static_cast<long>(r.N), r.K, r.eps0, r.eps_s, r.L_norm, r.approx_dist,
                      static_cast<long>(r.resonant), r.roundtrip});
        const auto& last = run.rows.back();
        json ratios = run.decay_ratios;
        Outcome out;
        out.metrics = {{"steps", static_cast<long>(run.rows.size()) - 1},
                       {"final_eps", last.eps0},
                       {"final_approx_dist", last.approx_dist},
                       {"final_L_norm", last.L_norm},
                       {"decay_ratios", ratios},
                       {"superexponential", run.superexponential},
                       {"kam_status", run.status}};
        if (run.stopped) {
            out.verdict = Verdict::GuardStop;
            out.status = run.status;
            return out;
        }
        const bool signature = run.superexponential || run.rows.size() <= 2;
        const bool ok = run.converged && last.eps0 <= eps_tol && last.approx_dist <= approx_tol && signature;
        out.verdict = ok ? Verdict::Pass : Verdict::Fail;
        out.status = ok ? "reduced to a constant within tolerance" : "KAM iteration did not meet its targets: " + run.status;
        return out;
    };
    return plan;
}

// ---- resonance demo ----

Plan plan_resonance_demo(const Config& cfg, std::uint64_t) {
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const int k = cfg.get_int("resonance.k", 3);
    const double eps = cfg.get_double("resonance.eps", 1e-3);
    const kam::KamParams p = read_kam(cfg);
    const double tol = cfg.get_double("verdict.residual_tol", 1e-12);
    if (k == 0) throw cfg.error("resonance.k", "must be nonzero");
    Plan plan;
    plan.params = {f.text, static_cast<long>(k), eps, static_cast<long>(p.N), kam::schedule_K(p, 0)};
    plan.run = [=](Context& ctx) {
        return guarded([&] {
            const kam::ResonanceDemo d = kam::resonance_demo(f.alpha, k, eps, p);
            const GroupId g = GroupId::SU2;
            const Alg h = lie::toral(g, {kPi * k * f.alpha});
            AlgebraMap U = AlgebraMap::zero(g);
            U.comps[1].set(k, eps);
            const GroupMap orig = GroupMap::constant(lie::exp(h)) * GroupMap::exp(U);
            const double before = maps::sup_distance(orig, GroupMap::constant(lie::exp(h)));
            const long kr = d.step.part.resonant.empty() ? 0L : static_cast<long>(d.step.part.k[0].value_or(0));
            const double Hc = lie::toral_coord(d.step.ob.H, 0);
            ctx.emit({0L, eps, before, kNaN, 0L, 0L, 0.0});
            ctx.emit({1L, d.step.eps_out, d.residual, d.geodesic_defect,
                      static_cast<long>(d.step.part.resonant.size()), kr, Hc});
            Outcome out;
            out.metrics = {{"residual", d.residual},
                           {"geodesic_defect", d.geodesic_defect},
                           {"resonant_roots", d.step.part.resonant.size()},
                           {"k_rho", kr},
                           {"reduction_vector", Hc},
                           {"eps_out", d.step.eps_out}};
            const bool ok = d.residual <= tol && !d.step.part.resonant.empty();
            out.verdict = ok ? Verdict::Pass : Verdict::Fail;
            out.status = ok ? "constant after one resonant reduction step" : "reduced cocycle is not constant";
            return out;
        });
    };
    return plan;
}

// ---- regular normal form ----

/// U with E e^U = B(x + alpha)^{-1} E B(x), rescaled until |U|_0 hits the target.
AlgebraMap coboundary_perturbation(const lie::Geodesic& E, double alpha, AlgebraMap b, double target) {
    const GroupId g = E.g;
    AlgebraMap U = AlgebraMap::zero(g);
    if (target == 0.0) return U;
    for (int it = 0; it < 6; ++it) {
        const GroupMap B = GroupMap::exp(b);
        U = maps::fourier(
            g, [&](double x) { return lie::log(lie::inverse(E(x)) * lie::inverse(B(x + alpha)) * E(x) * B(x)); }, 128);
        const double n = maps::norm(U, 0);
        if (std::abs(n - target) <= 1e-12 * target) break;
        b = (target / n) * b;
    }
    return U;
}

Plan plan_normal_form(const Config& cfg, std::uint64_t seed) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU2", {"SU2", "SU3"});
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const lie::Geodesic E = read_geodesic(cfg, g, g == GroupId::SU3 ? std::vector<double>{1, 1} : std::vector<double>{1});
    const std::string kind = cfg.get_choice("perturbation.kind", {"coboundary", "random"}, "coboundary");
    const Perturbation pert = read_perturbation(cfg, 1e-3, 4);
    const double delta = cfg.get_double("perturbation.obstruction", 0.0);
    kam::KamParams defaults;
    defaults.max_steps = 10;
    const kam::KamParams p = read_kam(cfg, defaults);
    const double p_tol = cfg.get_double("verdict.p_tol", 1e-5);
    const double factor = cfg.get_double("verdict.obstruction_factor", 10.0);
    for (int m : kam::twists(E))
        if (m == 0) throw cfg.error("cocycle.r", "the geodesic is singular; use the singular-step experiment");
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f.text, join(E.r), kind, pert.amplitude, delta};
    plan.run = [=](Context& ctx) {
        std::mt19937_64 rng(seed);
        const int w = lie::info(g).rank;
        AlgebraMap U;
        if (kind == "coboundary") {
            Perturbation pb = pert;
            pb.amplitude = 1.0;
            U = coboundary_perturbation(E, f.alpha, random_map(g, pb, rng), pert.amplitude);
        } else {
            U = random_map(g, pert, rng);
        }
        if (delta != 0.0) U.comps[static_cast<std::size_t>(w)].set(0, U.comps[static_cast<std::size_t>(w)].at(0) + delta);
        const AlgebraMap obU = kam::geodesic_step({f.alpha, E, U}, p).ob;
        const kam::NormalForm nf = kam::geodesic_run({f.alpha, E, U}, p);
        for (const auto& r : nf.rows)
            ctx.emit({static_cast<long>(r.n), r.U_norm, r.off_norm, r.B_norm, r.P_norm});
        const double dev = maps::norm(nf.P - obU, 0);
        Outcome out;
        out.metrics = {{"U_norm", maps::norm(U, 0)},   {"P_norm", nf.P_norm},   {"ObU_norm", maps::norm(obU, 0)},
                       {"P_minus_ObU", dev},           {"converged", nf.converged}, {"normal_form_status", nf.status}};
        if (!nf.converged) {
            out.verdict = nf.status.find("smallness") != std::string::npos ? Verdict::GuardStop : Verdict::Fail;
            out.status = nf.status;
            return out;
        }
        bool ok = true;
        if (delta != 0.0) {
            ok = dev <= factor * delta * delta;
            out.metrics["obstruction_bound"] = factor * delta * delta;
            out.status = ok ? "obstruction recovered to second order" : "obstruction deviates beyond the quadratic bound";
        } else if (kind == "coboundary") {
            ok = nf.P_norm <= p_tol;
            out.metrics["p_tolerance"] = p_tol;
            out.status = ok ? "coboundary perturbation leaves no obstruction" : "obstruction too large for a coboundary";
        } else {
            out.status = "normal form converged";
        }
        out.verdict = ok ? Verdict::Pass : Verdict::Fail;
        return out;
    };
    return plan;
}

// ---- singular step ----

Plan plan_singular_step(const Config& cfg, std::uint64_t seed) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU3", {"SU3"});
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const lie::Geodesic E = read_geodesic(cfg, g, {1, 2});
    const Alg hA = read_toral(cfg, "cocycle.A", g, {0.9, 0.45});
    const Perturbation pert = read_perturbation(cfg, 1e-4, 3);
    kam::KamParams defaults;
    defaults.nu_exp = 2.0;
    defaults.max_steps = 6;
    const kam::KamParams p = read_kam(cfg, defaults);
    const double off_tol = cfg.get_double("verdict.off_tol", 1e-12);
    const double comm_tol = cfg.get_double("verdict.commutant_tol", 1e-9);
    const std::vector<int> tw = kam::twists(E);
    if (std::none_of(tw.begin(), tw.end(), [](int m) { return m == 0; }))
        throw cfg.error("cocycle.r", "the geodesic is regular; use the normal-form experiment");
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f.text, join(E.r),
                   join({lie::toral_coord(hA, 0), lie::toral_coord(hA, 1)}), pert.amplitude};
    plan.run = [=](Context& ctx) {
        return guarded([&] {
            std::mt19937_64 rng(seed);
            kam::NearSingular cur{f.alpha, E, lie::exp(hA), random_map(g, pert, rng)};
            auto off = [&](const AlgebraMap& u) { return maps::norm(u - kam::obstruction_part(u, tw), 0); };
            double worst_comm = 0.0;
            double off_now = off(cur.U);
            ctx.emit({0L, static_cast<long>(cur.U.period), maps::norm(cur.U, 0), off_now, 0.0, 0.0, 0L, 0L});
            int n = 0;
            for (; n < p.max_steps && off_now > off_tol; ++n) {
                const kam::SingularStep st = kam::singular_step(cur, kam::schedule_N(p, n), kam::schedule_K(p, n), p);
                cur = st.next;
                off_now = off(cur.U);
                worst_comm = std::max(worst_comm, st.commutant_defect);
                ctx.emit({static_cast<long>(n + 1), static_cast<long>(st.period), st.eps_out, off_now,
                          st.commutant_defect, st.roundtrip, static_cast<long>(st.zero_roots.size()),
                          static_cast<long>(st.part.resonant.size())});
            }
            Outcome out;
            out.metrics = {{"steps", n}, {"final_off_norm", off_now}, {"final_eps", maps::norm(cur.U, 0)},
                           {"max_commutant_defect", worst_comm}};
            const bool ok = off_now <= off_tol && worst_comm <= comm_tol;
            out.verdict = ok ? Verdict::Pass : Verdict::Fail;
            out.status = ok ? "perturbation reduced to its obstruction part" : "singular reduction did not converge";
            return out;
        });
    };
    return plan;
}

// ---- a priori energy drop ----

Plan plan_apriori(const Config& cfg, std::uint64_t) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU2", {"SU2"});
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const lie::Geodesic E = read_geodesic(cfg, g, {1});
    const std::vector<double> zs = cfg.get_doubles("apriori.z", {0.05});
    const int grid = cfg.get_int("apriori.grid", 4096);
    const double rel_tol = cfg.get_double("verdict.relative_tol", 0.2);
    if (grid < 64) throw cfg.error("apriori.grid", "must be at least 64");
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f.text, join(E.r), static_cast<long>(grid)};
    plan.run = [=](Context& ctx) {
        bool ok = true;
        json per_z = json::array();
        for (std::size_t i = 0; i < zs.size(); ++i) {
            kam::NearGeodesic c{f.alpha, E, AlgebraMap::zero(g)};
            c.U.comps[1].set(0, zs[i]);
            const kam::AprioriReport r = kam::apriori_check(c, grid);
            const double rel = std::abs(r.margin - r.predicted_margin) / r.predicted_margin;
            ok = ok && r.margin > 0 && rel <= rel_tol;
            ctx.emit({static_cast<long>(i), zs[i], r.lambda0_norm, r.derivative_norm, r.a2_sq, r.bound_sq, r.margin,
                      r.predicted_margin, rel, r.a_sq, r.a_sq_expansion});
            per_z.push_back({{"z", zs[i]}, {"margin", r.margin}, {"predicted_margin", r.predicted_margin},
                             {"relative_error", rel}, {"verdict", r.verdict}});
        }
        Outcome out;
        out.metrics = {{"cases", per_z}, {"relative_tolerance", rel_tol}};
        out.verdict = ok ? Verdict::Pass : Verdict::Fail;
        out.status = ok ? "second-iterate energy drops by the predicted margin" : "energy margin off its prediction";
        return out;
    };
    return plan;
}

// ---- cohomological solvers ----

maps::Series random_series(std::mt19937_64& rng, int bandwidth, double decay) {
    std::normal_distribution<double> nd;
    maps::Series s;
    for (int k = -bandwidth; k <= bandwidth; ++k) {
        const double re = nd(rng), im = nd(rng);
        s.set(k, std::exp(-decay * std::abs(k)) * maps::cd(re, im));
    }
    return s;
}

bool window_exact(const coh::TwistedSolution& s) {
    if (s.window_hi - s.window_lo + 1 != std::abs(s.m)) return false;
    for (int k = s.obstruction.kmin; k <= s.obstruction.kmax(); ++k)
        if (s.obstruction.at(k) != maps::cd(0.0) && (k < s.window_lo || k > s.window_hi)) return false;
    return true;
}

Plan plan_cohomology(const Config& cfg, std::uint64_t seed) {
    const Frequency f = read_alpha(cfg, "cocycle.alpha", "golden", cfg.get_int("arithmetic.depth", 40));
    const int trials = cfg.get_int("bench.trials", 100);
    const int bandwidth = cfg.get_int("bench.bandwidth", 16);
    const int max_twist = cfg.get_int("bench.max_twist", 4);
    const double decay = cfg.get_double("bench.decay", 0.2);
    const double tol = cfg.get_double("verdict.residual_tol", 1e-10);
    if (trials < 1) throw cfg.error("bench.trials", "must be positive");
    if (bandwidth < 1 || bandwidth > 512) throw cfg.error("bench.bandwidth", "must lie in [1, 512]");
    if (max_twist < 1) throw cfg.error("bench.max_twist", "must be positive");
    Plan plan;
    plan.params = {f.text, static_cast<long>(bandwidth), decay};
    plan.run = [=](Context& ctx) {
        return guarded([&] {
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<int> twist(1, max_twist), sign(0, 1);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            double worst[3] = {0, 0, 0};
            long bad_windows = 0;
            long row = 0;
            const char* kinds[3] = {"linear", "twisted", "translated"};
            for (int kind = 0; kind < 3; ++kind) {
                for (int t = 0; t < trials; ++t) {
                    const maps::Series g = random_series(rng, bandwidth, decay);
                    const int m = (sign(rng) ? 1 : -1) * twist(rng);
                    const double c = unit(rng);
                    double res = 0.0;
                    long exact = 1;
                    long Nl = 0, Np = 0;
                    double mind = 1.0;
                    if (kind == 0) {
                        const coh::LinearSolution s = coh::solve_linear(g, f.alpha);
                        res = coh::linear_residual(s, g, f.alpha);
                        mind = s.min_divisor;
                        ctx.emit({row++, std::string(kinds[kind]), 0L, 0.0, 0L, 0L, res, exact, mind});
                        worst[kind] = std::max(worst[kind], res);
                        continue;
                    }
                    coh::TwistedSolution s;
                    if (kind == 1) {
                        s = coh::solve_twisted(g, m, c, f.alpha);
                    } else {
                        Nl = bandwidth;
                        Np = std::uniform_int_distribution<long>(0, Nl - 1)(rng);
                        s = coh::solve_twisted_translated(g, m, c, f.alpha, static_cast<int>(Nl), static_cast<int>(Np));
                        exact = exact && s.window_hi == -Np;
                    }
                    res = coh::twisted_residual(s, g, f.alpha);
                    exact = exact && window_exact(s);
                    bad_windows += exact ? 0 : 1;
                    worst[kind] = std::max(worst[kind], res);
                    ctx.emit({row++, std::string(kinds[kind]), static_cast<long>(m), c, Nl, Np, res, exact, mind});
                }
            }
            Outcome out;
            out.metrics = {{"max_residual_linear", worst[0]},
                           {"max_residual_twisted", worst[1]},
                           {"max_residual_translated", worst[2]},
                           {"window_violations", bad_windows},
                           {"residual_tolerance", tol}};
            const bool ok = std::max({worst[0], worst[1], worst[2]}) <= tol && bad_windows == 0;
            out.verdict = ok ? Verdict::Pass : Verdict::Fail;
            out.status = ok ? "all residuals within tolerance and obstruction windows exact"
                            : "solver residual or obstruction window out of specification";
            return out;
        });
    };
    return plan;
}

// ---- frequency dependence ----

Plan plan_frequency(const Config& cfg, std::uint64_t) {
    const GroupId g = read_group(cfg, "cocycle.group", "SU2", {"SU2"});
    const int depth = cfg.get_int("arithmetic.depth", 40);
    const Frequency f1 = read_alpha(cfg, "cocycle.alpha1", "golden", depth);
    const Frequency f2 = read_alpha(cfg, "cocycle.alpha2", "silver", depth);
    const lie::Geodesic E = read_geodesic(cfg, g, {1});
    const double angle = cfg.get_double("torus.angle", kPi / 4);
    const dyn::EnergyOptions opts = read_energy(cfg, 2048, 5000);
    const double tol1 = cfg.get_double("verdict.tol1", 1e-3);
    const double gap = cfg.get_double("verdict.gap", 0.01);
    Plan plan;
    plan.params = {std::string(lie::group_name(g)), f1.text, f2.text, join(E.r), angle};
    plan.run = [=](Context& ctx) {
        // Phi is the standard one-parameter torus turned by exp(angle j); A = Phi(. + alpha1) E Phi(-.)
        const lie::Grp R = lie::exp(lie::root_vector(g, 0, maps::cd(angle, 0.0)));
        const lie::Geodesic e1 = lie::geodesic(g, {1.0});
        const GroupMap Phi = GroupMap::constant(R) * GroupMap::geodesic(e1) * GroupMap::constant(lie::inverse(R));
        const dyn::Cocycle c1 = dyn::conjugate({f1.alpha, GroupMap::geodesic(E)}, Phi);
        const dyn::Cocycle c2{f2.alpha, c1.map};
        const Alg a0 = lie::log(Phi(f1.alpha - f2.alpha), lie::LogBranch::Any);
        const double a0_offdiag = std::abs(lie::root_coord(a0, 0));
        const dyn::EnergyReport r1 = dyn::energy_and_degree(c1, f1.cf, opts);
        const dyn::EnergyReport r2 = dyn::energy_and_degree(c2, f2.cf, opts);
        for (const auto& r : r1.rows) ctx.emit({static_cast<long>(r.k), r.q, 1L, r.l2, r.l1, r.degree_residual});
        for (const auto& r : r2.rows) ctx.emit({static_cast<long>(r.k), r.q, 2L, r.l2, r.l1, r.degree_residual});
        const double expected = lie::norm(E.slope());
        double en2 = 0.0;
        for (std::size_t i = r2.rows.size() >= 3 ? r2.rows.size() - 3 : 0; i < r2.rows.size(); ++i)
            en2 = std::max(en2, r2.rows[i].l2);
        const double en1 = r1.rows.empty() ? kNaN : r1.rows.back().l2;
        Outcome out;
        out.metrics = {{"energy_alpha1", en1},       {"energy_alpha2_upper", en2}, {"expected", expected},
                       {"A0_offdiagonal", a0_offdiag}, {"status_alpha1", r1.status}, {"status_alpha2", r2.status}};
        const bool ok = std::abs(en1 - expected) <= tol1 && en2 < expected - gap;
        out.verdict = ok ? Verdict::Pass : Verdict::Fail;
        out.status = ok ? "same map, different energies for the two rotations" : "energies do not separate";
        return out;
    };
    return plan;
}

struct Entry {
    ExperimentInfo info;
    Planner planner;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {{"quantization",
          "energy of a periodic geodesic along the denominators",
          {"n", "q_n", "energy_L2", "energy_L1", "degree_residual", "group", "alpha", "r", "a", "grid", "q_cap"}},
         plan_quantization},
        {{"energy-invariance",
          "energy of a geodesic conjugated by exp of a random trigonometric polynomial",
          {"n", "q_n", "energy_L2", "energy_L1", "error", "bound", "within_bound", "group", "alpha", "r", "degree",
           "b_sup", "grid", "q_cap"}},
         plan_energy_invariance},
        {{"renorm-convergence",
          "renormalization functionals and representatives of a conjugated geodesic",
          {"n", "q_n", "alpha_n", "J1", "u_norm", "d1", "d2", "J1_error", "rep_dist_c0", "rep_dist_c1", "chi", "group",
           "alpha", "r", "degree", "b_sup", "nu"}},
         plan_renorm},
        {{"kam-local",
          "KAM reduction of a perturbed constant cocycle",
          {"n", "N_n", "K_n", "eps_0", "eps_s", "L_norm", "approx_dist", "resonant", "roundtrip", "group", "alpha",
           "A", "amplitude", "degree", "sigma", "tau", "nu", "gamma"}},
         plan_kam_local},
        {{"resonance-demo",
          "one resonant reduction step on an explicit SU(2) example",
          {"step", "eps", "residual", "geodesic_defect", "resonant", "k_rho", "reduction_H", "alpha", "k", "amplitude",
           "N", "K"}},
         plan_resonance_demo},
        {{"normal-form",
          "normal-form iteration near a regular periodic geodesic",
          {"n", "U_norm", "off_norm", "B_norm", "P_norm", "group", "alpha", "r", "kind", "amplitude", "obstruction"}},
         plan_normal_form},
        {{"singular-step",
          "combined reduction near a singular periodic geodesic in SU(3)",
          {"n", "period", "eps", "off_norm", "commutant_defect", "roundtrip", "zero_roots", "resonant", "group",
           "alpha", "r", "A", "amplitude"}},
         plan_singular_step},
        {{"apriori",
          "second-iterate energy drop near a geodesic",
          {"n", "z", "lambda0_norm", "derivative_norm", "a2_sq", "bound_sq", "margin", "predicted_margin",
           "relative_error", "a_sq", "a_sq_expansion", "group", "alpha", "r", "grid"}},
         plan_apriori},
        {{"cohomology-bench",
          "linear, twisted and translated cohomological equations on random inputs",
          {"trial", "kind", "m", "c", "N", "N_prime", "residual", "window_exact", "min_divisor", "alpha", "bandwidth",
           "decay"}},
         plan_cohomology},
        {{"frequency-dependence",
          "one map, two rotations, two energies",
          {"n", "q_n", "rotation", "energy_L2", "energy_L1", "degree_residual", "group", "alpha1", "alpha2", "r",
           "torus_angle"}},
         plan_frequency},
    };
    return entries;
}

const Entry& find_entry(const std::string& name) {
    for (const auto& e : registry())
        if (e.info.name == name) return e;
    throw std::out_of_range("unknown experiment '" + name + "'");
}

}  // namespace

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::GuardStop: return "guard-stop";
    }
    return "fail";
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Pass: return 0;
        case Verdict::GuardStop: return 2;
        case Verdict::Fail: return 3;
    }
    return 3;
}

const std::vector<ExperimentInfo>& experiment_catalog() {
    static const std::vector<ExperimentInfo> infos = [] {
        std::vector<ExperimentInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return infos;
}

const ExperimentInfo& experiment_info(const std::string& name) { return find_entry(name).info; }

RunResult run_experiment(Config cfg, const RunOptions& opts) {
    const std::string name = cfg.get_string("experiment");
    const Entry* entry = nullptr;
    try {
        entry = &find_entry(name);
    } catch (const std::out_of_range& e) {
        throw cfg.error("experiment", e.what());
    }
    if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
    if (opts.threads) cfg.set("threads", std::to_string(*opts.threads));
    if (opts.out_dir) cfg.set("output.dir", opts.out_dir->string());
    const std::uint64_t seed = cfg.get_u64("seed", 0);
    const int threads = cfg.get_int("threads", 1);
    if (threads < 1 || threads > 256) throw cfg.error("threads", "must lie in [1, 256]");
    const std::filesystem::path dir = cfg.get_string("output.dir", ".");
    const std::string prefix = cfg.get_string("output.prefix", name);
    if (prefix.find('/') != std::string::npos) throw cfg.error("output.prefix", "must not contain '/'");

    Plan plan = entry->planner(cfg, seed);
    cfg.reject_unused();
    const std::size_t data_cols = entry->info.columns.size() - plan.params.size();

    RunResult result;
    result.experiment = name;
    result.seed = seed;
    result.csv = dir / (prefix + ".csv");
    result.summary = dir / (prefix + ".json");

    dyn::set_threads(threads);
    const std::string started = timestamp_utc();
    CsvWriter csv(result.csv, entry->info.columns, "generated " + started + " by cocycle-lab " + name);
    Context ctx{&csv, plan.params};
    Outcome out;
    try {
        out = plan.run(ctx);
    } catch (const renorm::IterateCapError& e) {
        out = {Verdict::GuardStop, std::string("iterate cap: ") + e.what(), json::object()};
    } catch (const kam::SmallnessError& e) {
        out = {Verdict::GuardStop, std::string("smallness lost: ") + e.what(), json::object()};
    } catch (const coh::SmallDivisorError& e) {
        out = {Verdict::GuardStop, std::string("small divisor: ") + e.what(), json::object()};
    } catch (const std::exception& e) {
        out = {Verdict::Fail, std::string("runtime failure: ") + e.what(), json::object()};
    }
    result.verdict = out.verdict;
    result.status = out.status;
    result.metrics = out.metrics;

    json config = json::object();
    for (const auto& [key, e] : cfg.entries()) config[key] = e.value;
    json summary = {{"experiment", name},
                    {"verdict", verdict_name(out.verdict)},
                    {"exit_code", exit_code(out.verdict)},
                    {"status", out.status},
                    {"seed", seed},
                    {"threads", threads},
                    {"generated", started},
                    {"config_source", cfg.source()},
                    {"config", config},
                    {"csv", result.csv.filename().string()},
                    {"columns", entry->info.columns},
                    {"data_columns", data_cols},
                    {"rows", csv.rows()},
                    {"metrics", out.metrics}};
    write_json(result.summary, summary);
    return result;
}

}  // namespace lab
