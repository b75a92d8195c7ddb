// Acceptance checks, one line per criterion; exit status 0 only if all pass.

#include "experiments.hpp"
#include "output.hpp"

#include "cocycle/arithmetic.hpp"
#include "cocycle/cocycle.hpp"
#include "cocycle/kam.hpp"
#include "cocycle/liegroup.hpp"
#include "cocycle/maps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace cocycle;
using nlohmann::json;

namespace tol {
constexpr double quantization = 1e-6;
constexpr double quantization_seconds = 10.0;
constexpr long quantization_q = 12000;  // reaches q = 10946
constexpr double conjugacy_factor = 4.0;
constexpr double conjugacy_final = 1e-3;
constexpr double cf_identity = 1e-12;
constexpr int cf_depth = 20;
constexpr int cf_samples = 10;
constexpr int dk_polys = 20;
constexpr double solver_residual = 1e-10;
constexpr int solver_trials = 100;
constexpr double resonance_residual = 1e-12;
constexpr double kam_eps = 1e-12;
constexpr int kam_steps = 8;
constexpr double kam_approx = 1e-8;
constexpr double kam_seconds = 60.0;
constexpr double nf_coboundary = 1e-5;
constexpr double nf_delta = 1e-3;
constexpr double nf_factor = 10.0;
constexpr double apriori_rel = 0.2;
constexpr double renorm_j1 = 1e-2;
constexpr long renorm_from_q = 1000;
constexpr double frequency_alpha1 = 1e-3;
constexpr double frequency_gap = 0.01;
constexpr int bracket_cocycles = 5;
constexpr double bracket_final_ratio = 0.05;
}  // namespace tol

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Check {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::filesystem::path scratch_dir() {
    static const std::filesystem::path dir = std::filesystem::temp_directory_path() / "cocycle_acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

lab::RunResult run_lab(const std::string& text) {
    lab::RunOptions opts;
    opts.out_dir = scratch_dir();
    return lab::run_experiment(lab::Config::parse_string(text, "<acceptance>"), opts);
}

Check quantization() {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 40);
    dyn::EnergyOptions opts;
    opts.q_cap = tol::quantization_q;
    double worst = 0.0, slowest = 0.0;
    long reached = 0;
    for (int r = 1; r <= 3; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const lie::Geodesic E = lie::geodesic(lie::GroupId::SU2, {static_cast<double>(r)});
        const dyn::EnergyReport rep = dyn::energy_and_degree({cf.alpha_d(), maps::GroupMap::geodesic(E)}, cf, opts);
        slowest = std::max(slowest, seconds_since(t0));
        if (rep.rows.empty()) return {false, "no energy rows"};
        worst = std::max(worst, std::abs(rep.rows.back().l2 - kTwoPi * r));
        reached = rep.rows.back().q;
    }
    const bool ok = worst <= tol::quantization && slowest <= tol::quantization_seconds && reached >= 10000;
    return {ok, fmt("max |en - 2 pi r| = %.3g at q = %.0f, slowest case %.2f s", worst, static_cast<double>(reached),
                    slowest)};
}

Check conjugacy_invariance() {
    const lab::RunResult r = run_lab(
        "experiment = energy-invariance\nseed = 7\n[cocycle]\ngroup = SU2\nalpha = golden\nr = 1\n"
        "[conjugacy]\ndegree = 5\nb_sup = 1.0\n[energy]\ngrid = 2048\nq_cap = 5000\n[verdict]\nbound_factor = " +
        lab::format_double(tol::conjugacy_factor) + "\nfinal_tol = " + lab::format_double(tol::conjugacy_final) + "\n");
    const double final_err = r.metrics.at("final_error").get<double>();
    const long violations = r.metrics.at("bound_violations").get<long>();
    const double bsup = r.metrics.at("LB_sup").get<double>();
    const bool ok = violations == 0 && final_err <= tol::conjugacy_final && bsup <= 1.0 + 1e-9;
    return {ok, fmt("bound violations %.0f, final error %.3g, |b| = %.3g", static_cast<double>(violations), final_err,
                    bsup)};
}

Check cf_identities() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    double worst_beta = 0.0;
    long bad_det = 0;
    for (int s = 0; s < tol::cf_samples; ++s) {
        std::ostringstream digits;
        digits.precision(17);
        digits << u(rng);
        const auto cf = arith::cf_expand(arith::parse_alpha(digits.str()), tol::cf_depth);
        for (int n = 0; n <= cf.depth(); ++n) {
            const arith::Real lhs = arith::Real(cf.q_at(n - 1)) * cf.beta_at(n) + arith::Real(cf.q_at(n)) * cf.beta_at(n - 1);
            worst_beta = std::max(worst_beta, static_cast<double>(abs(lhs - 1)));
            const long det = cf.q_at(n) * cf.p_at(n - 1) - cf.p_at(n) * cf.q_at(n - 1);
            bad_det += det == (n % 2 == 0 ? 1 : -1) ? 0 : 1;
        }
    }
    const bool ok = worst_beta <= tol::cf_identity && bad_det == 0;
    return {ok, fmt("max |q_{n-1} beta_n + q_n beta_{n-1} - 1| = %.3g, det failures %.0f", worst_beta,
                    static_cast<double>(bad_det))};
}

Check denjoy_koksma() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> deg(1, 8);
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 30);
    long violations = 0, checks = 0;
    double worst_ratio = 0.0;
    for (int t = 0; t < tol::dk_polys; ++t) {
        arith::TrigPoly phi;
        phi.degree = deg(rng);
        phi.coeffs.assign(static_cast<std::size_t>(2 * phi.degree + 1), 0.0);
        for (int k = 1; k <= phi.degree; ++k) {
            const std::complex<double> c(nd(rng), nd(rng));
            phi.coeffs[static_cast<std::size_t>(phi.degree + k)] = c;
            phi.coeffs[static_cast<std::size_t>(phi.degree - k)] = std::conj(c);
        }
        const double var = phi.variation();
        for (int n = 1; n <= cf.depth() && cf.q_at(n) <= 2000; ++n) {
            for (int j = 0; j < 64; ++j) {
                const double x = (j + 0.5) / 64.0;
                const double s = std::abs(arith::birkhoff_sum(phi, cf.alpha_d(), cf.q_at(n), x));
                worst_ratio = std::max(worst_ratio, s / var);
                violations += s <= var ? 0 : 1;
                ++checks;
            }
        }
    }
    return {violations == 0, fmt("%.0f violations in %.0f sums, max |S_q phi| / Var = %.3f", static_cast<double>(violations),
                                 static_cast<double>(checks), worst_ratio)};
}

Check solvers() {
    const lab::RunResult r = run_lab("experiment = cohomology-bench\nseed = 3\n[bench]\ntrials = " +
                                     std::to_string(tol::solver_trials) + "\nbandwidth = 16\n");
    const double worst = std::max({r.metrics.at("max_residual_linear").get<double>(),
                                   r.metrics.at("max_residual_twisted").get<double>(),
                                   r.metrics.at("max_residual_translated").get<double>()});
    const long windows = r.metrics.at("window_violations").get<long>();
    return {worst <= tol::solver_residual && windows == 0,
            fmt("max residual %.3g over 3 x %.0f inputs, window violations %.0f", worst,
                static_cast<double>(tol::solver_trials), static_cast<double>(windows))};
}

Check resonance() {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 40);
    const kam::ResonanceDemo d = kam::resonance_demo(cf.alpha_d(), 3, 1e-3, kam::KamParams{});
    const bool ok = d.residual <= tol::resonance_residual && !d.step.part.resonant.empty();
    return {ok, fmt("residual %.3g after the resonant step, geodesic defect %.3g", d.residual, d.geodesic_defect)};
}

Check local_kam() {
    const auto t0 = std::chrono::steady_clock::now();
    const lab::RunResult r = run_lab(
        "experiment = kam-local\nseed = 1\n[cocycle]\ngroup = SU2\nalpha = golden\nA = 1.3\n"
        "[perturbation]\namplitude = 1e-4\n");
    const double secs = seconds_since(t0);
    const long steps = r.metrics.at("steps").get<long>();
    const double eps = r.metrics.at("final_eps").get<double>();
    const double approx = r.metrics.at("final_approx_dist").get<double>();
    const bool superexp = r.metrics.at("superexponential").get<bool>() || steps <= 1;
    const bool ok = r.verdict == lab::Verdict::Pass && eps <= tol::kam_eps && steps <= tol::kam_steps &&
                    approx <= tol::kam_approx && superexp && secs <= tol::kam_seconds;
    return {ok, fmt("eps %.3g after %.0f steps, approximant distance %.3g", eps, static_cast<double>(steps), approx) +
                    fmt(", %.2f s", secs)};
}

Check normal_form() {
    const std::string base = "experiment = normal-form\nseed = 5\n[cocycle]\ngroup = SU2\nalpha = golden\nr = 1\n"
                             "[perturbation]\nkind = coboundary\namplitude = 1e-3\n";
    const lab::RunResult cob = run_lab(base);
    const lab::RunResult obs = run_lab(base + "obstruction = " + lab::format_double(tol::nf_delta) + "\n");
    const double P = cob.metrics.at("P_norm").get<double>();
    const double dev = obs.metrics.at("P_minus_ObU").get<double>();
    const bool ok = cob.metrics.at("converged").get<bool>() && obs.metrics.at("converged").get<bool>() &&
                    P <= tol::nf_coboundary && dev <= tol::nf_factor * tol::nf_delta * tol::nf_delta;
    return {ok, fmt("coboundary |P| = %.3g, obstruction |P - ObU| = %.3g (bound %.3g)", P, dev,
                    tol::nf_factor * tol::nf_delta * tol::nf_delta)};
}

Check apriori() {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 40);
    kam::NearGeodesic c{cf.alpha_d(), lie::geodesic(lie::GroupId::SU2, {1.0}), maps::AlgebraMap::zero(lie::GroupId::SU2)};
    c.U.comps[1].set(0, 0.05);
    const kam::AprioriReport r = kam::apriori_check(c, 4096);
    const double rel = std::abs(r.margin - r.predicted_margin) / r.predicted_margin;
    return {r.margin > 0 && rel <= tol::apriori_rel,
            fmt("margin %.4f, predicted %.4f, relative error %.3g", r.margin, r.predicted_margin, rel)};
}

Check renorm_functionals() {
    const std::string mixed =
        "experiment = renorm-convergence\nseed = 11\n[cocycle]\ngroup = SU2\nalpha = golden\nr = 1\n"
        "[conjugacy]\ndegree = 5\nb_sup = 0.5\nnormalize = value\n[renorm]\nq_cap = 2000\nrepresentative_cap = 300\n"
        "[verdict]\nj1_from_q = " + std::to_string(tol::renorm_from_q) + "\n";
    const std::string plain = "experiment = renorm-convergence\nseed = 11\n[cocycle]\nr = 2\n"
                              "[conjugacy]\nb_sup = 0\n[renorm]\nq_cap = 2000\nrepresentative_cap = 0\n";
    const lab::RunResult a = run_lab(mixed);
    const lab::RunResult b = run_lab(plain);
    const bool mono = a.metrics.at("monotone").get<bool>() && b.metrics.at("monotone").get<bool>();
    const double late = a.metrics.at("worst_late_J1_error").get<double>();
    const long rows = a.metrics.at("late_rows").get<long>();
    const double plain_err = std::abs(b.metrics.at("J1_final").get<double>() - 2.0 * kTwoPi);
    const bool ok = mono && rows > 0 && late <= tol::renorm_j1 && plain_err <= tol::renorm_j1;
    return {ok, fmt("monotone %.0f, worst |J1 - 2 pi| for q >= 1e3: %.3g, constant case error %.3g",
                    mono ? 1.0 : 0.0, late, plain_err)};
}

Check frequency() {
    const lab::RunResult r = run_lab("experiment = frequency-dependence\n");
    const double en1 = r.metrics.at("energy_alpha1").get<double>();
    const double en2 = r.metrics.at("energy_alpha2_upper").get<double>();
    const bool ok = std::abs(en1 - kTwoPi) <= tol::frequency_alpha1 && en2 < kTwoPi - tol::frequency_gap;
    return {ok, fmt("en(alpha1) = %.6f, en(alpha2) <= %.3g", en1, en2)};
}

Check bracket_sum_decay() {
    const auto cf = arith::cf_expand(arith::parse_alpha("golden"), 40);
    const lie::GroupId g = lie::GroupId::SU2;
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> nd;
    long bad = 0;
    double worst_ratio = 0.0;
    for (int t = 0; t < tol::bracket_cocycles; ++t) {
        maps::AlgebraMap b = maps::AlgebraMap::zero(g);
        for (int k = -3; k <= 3; ++k) {
            b.comps[1].set(k, std::exp(-0.3 * std::abs(k)) * maps::cd(nd(rng), nd(rng)));
            if (k > 0) {
                const maps::cd z(nd(rng), nd(rng));
                b.comps[0].set(k, std::exp(-0.3 * k) * z);
                b.comps[0].set(-k, std::exp(-0.3 * k) * std::conj(z));
            }
        }
        b = (0.5 / maps::norm(b, 0)) * b;
        const dyn::Cocycle c = dyn::conjugate({cf.alpha_d(), maps::GroupMap::geodesic(lie::geodesic(g, {1.0}))},
                                              maps::GroupMap::exp(b));
        const auto trace = dyn::bracket_sum_trace(c, cf, 512, 2000);
        if (trace.size() < 4) return {false, "bracket trace too short"};
        double peak = 0.0;
        for (const auto& row : trace) peak = std::max(peak, row.value);
        // decreasing from the peak on, ending near zero
        std::size_t i = 0;
        while (trace[i].value < peak) ++i;
        for (std::size_t j = i + 1; j < trace.size(); ++j) bad += trace[j].value <= trace[j - 1].value ? 0 : 1;
        const double ratio = trace.back().value / peak;
        worst_ratio = std::max(worst_ratio, ratio);
        bad += ratio <= tol::bracket_final_ratio ? 0 : 1;
    }
    return {bad == 0, fmt("%.0f monotonicity failures, worst final/peak ratio %.3g", static_cast<double>(bad),
                          worst_ratio)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria = {
        {"quantization", quantization},
        {"conjugacy-invariance", conjugacy_invariance},
        {"cf-identities", cf_identities},
        {"denjoy-koksma", denjoy_koksma},
        {"cohomological-solvers", solvers},
        {"resonance-reduction", resonance},
        {"local-kam", local_kam},
        {"normal-form", normal_form},
        {"apriori-energy-drop", apriori},
        {"renormalization-functionals", renorm_functionals},
        {"frequency-dependence", frequency},
        {"bracket-sum-decay", bracket_sum_decay},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Check r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += r.pass ? 0 : 1;
        std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
