#include "experiments.hpp"

#include "cocycle/arithmetic.hpp"
#include "cocycle/cocycle.hpp"
#include "cocycle/liegroup.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict run(const std::string& config_path, std::optional<std::string> out_dir, std::optional<std::uint64_t> seed,
             std::optional<int> threads) {
    lab::RunOptions opts;
    if (out_dir) opts.out_dir = *out_dir;
    opts.seed = seed;
    opts.threads = threads;
    lab::RunResult r;
    {
        py::gil_scoped_release release;
        r = lab::run_experiment(lab::Config::load(config_path), opts);
    }
    py::dict d;
    d["experiment"] = r.experiment;
    d["verdict"] = std::string(lab::verdict_name(r.verdict));
    d["exit_code"] = lab::exit_code(r.verdict);
    d["status"] = r.status;
    d["seed"] = r.seed;
    d["csv"] = r.csv.string();
    d["summary"] = r.summary.string();
    d["metrics"] = to_python(r.metrics);
    return d;
}

py::dict continued_fraction(const std::string& alpha, int depth) {
    const auto cf = cocycle::arith::cf_expand(cocycle::arith::parse_alpha(alpha), depth);
    std::vector<double> beta;
    for (int n = 0; n <= cf.depth(); ++n) beta.push_back(static_cast<double>(cf.beta_at(n)));
    py::dict d;
    d["alpha"] = cf.alpha_d();
    d["a"] = cf.partial_quotients();
    d["q"] = cf.denominators();
    d["beta"] = beta;
    d["terminated"] = cf.terminated;
    return d;
}

double geodesic_energy(const std::string& group, std::vector<double> r, const std::string& alpha, long q_cap) {
    using namespace cocycle;
    const auto cf = arith::cf_expand(arith::parse_alpha(alpha), 40);
    const lie::Geodesic e = lie::geodesic(lie::parse_group(group), std::move(r));
    dyn::EnergyOptions opts;
    opts.q_cap = q_cap;
    py::gil_scoped_release release;
    return dyn::energy_and_degree({cf.alpha_d(), maps::GroupMap::geodesic(e)}, cf, opts).energy;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = R"pbdoc(
        Quasiperiodic cocycle lab
        -------------------------

        .. autosummary::
           :toctree: _generate

           list_experiments
           run
           continued_fraction
           geodesic_energy
    )pbdoc";

    py::register_exception<lab::ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def(
        "list_experiments",
        [] {
            py::list out;
            for (const auto& e : lab::experiment_catalog()) {
                py::dict d;
                d["name"] = e.name;
                d["summary"] = e.summary;
                d["columns"] = e.columns;
                out.append(d);
            }
            return out;
        },
        "Experiments with their one-line summaries and CSV columns.");

    m.def("run", &run, py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
          py::arg("threads") = py::none(),
          "Runs the experiment described by a config file; returns verdict, paths and metrics.");

    m.def("continued_fraction", &continued_fraction, py::arg("alpha"), py::arg("depth") = 20,
          "Partial quotients, denominators and remainders beta_n of alpha.");

    m.def("geodesic_energy", &geodesic_energy, py::arg("group"), py::arg("r"), py::arg("alpha") = "golden",
          py::arg("q_cap") = 5000, "Energy of the closed geodesic cocycle with degree vector r.");

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
