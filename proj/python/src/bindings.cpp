#include "dgs/adaptation.hpp"
#include "dgs/diagnostics.hpp"
#include "dgs/experiments.hpp"
#include "dgs/io.hpp"
#include "dgs/samplers.hpp"
#include "dgs/targets.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dgs;

namespace {

SamplerConfig make_config(const std::string& sampler, std::optional<double> eps, std::optional<std::size_t> radius) {
  SamplerConfig c;
  c.kind = sampler_kind_from_string(sampler);
  if (eps) c.eps = *eps;
  if (radius) c.radius = *radius;
  return c;
}

py::dict summary_dict(const Summary& s) {
  py::dict d;
  d["mean"] = s.mean;
  d["se"] = s.se;
  d["lo"] = s.lo;
  d["hi"] = s.hi;
  d["median"] = s.median;
  return d;
}

py::list protocol_list(const ProtocolResult& r) {
  py::list out;
  for (const auto& run : r.runs) {
    const auto& last = run.reports.back();
    py::dict d;
    d["sampler"] = run.sampler;
    d["steps"] = run.steps;
    d["eps"] = run.config.eps;
    d["radius"] = run.config.radius;
    d["marginal_error"] = summary_dict(last.marginal_error);
    if (last.covariance_error) d["covariance_error"] = summary_dict(*last.covariance_error);
    if (last.pairwise_error) d["pairwise_error"] = summary_dict(*last.pairwise_error);
    d["ess"] = run.ess;
    d["acceptance_rate"] = run.acceptance_rate;
    d["mean_l1_jump"] = run.mean_l1_jump;
    if (run.gamma) d["gamma"] = *run.gamma;
    out.append(d);
  }
  return out;
}

ExperimentConfig config_from(const std::string& experiment, const std::string& json_text, bool paper_scale) {
  auto base = default_config(experiment, paper_scale);
  if (json_text.empty()) return base;
  auto c = parse_config(nlohmann::json::parse(json_text), base);
  c.experiment = experiment;
  return c;
}

}  // namespace

PYBIND11_MODULE(_dgs, m) {
  m.doc() = "Gradient-based Metropolis-Hastings samplers for discrete state spaces";
  m.attr("__version__") = version_string();

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::class_<StateSpace>(m, "StateSpace")
      .def_static("binary01", &StateSpace::binary01)
      .def_static("binary_pm1", &StateSpace::binary_pm1)
      .def_static("ordinal", &StateSpace::ordinal, py::arg("values"))
      .def_static("categorical", &StateSpace::categorical, py::arg("k"))
      .def_property_readonly("kind", [](const StateSpace& s) { return to_string(s.kind()); })
      .def_property_readonly("values", &StateSpace::values)
      .def_property_readonly("support_size", &StateSpace::support_size)
      .def("contains", &StateSpace::contains)
      .def("__repr__", [](const StateSpace& s) {
        return "<StateSpace " + to_string(s.kind()) + " k=" + std::to_string(s.support_size()) + ">";
      });
  m.def("ordinal_grid", &make_ordinal_grid, py::arg("n_points") = 50, py::arg("lo") = -1.5, py::arg("hi") = 3.0);

  py::class_<Target>(m, "Target")
      .def_property_readonly("dim", &Target::dim)
      .def_property_readonly("sites", &Target::sites)
      .def_property_readonly("space", &Target::space, py::return_value_policy::reference_internal)
      .def("log_f", &Target::log_f, py::arg("s"))
      .def("grad_f", &Target::grad_f, py::arg("s"));

  py::class_<QuadraticTarget, Target>(m, "QuadraticTarget")
      .def(py::init<StateSpace, Vector, Matrix>(), py::arg("space"), py::arg("bias"), py::arg("coupling"))
      .def_property_readonly("bias", &QuadraticTarget::bias)
      .def_property_readonly("coupling", &QuadraticTarget::coupling);
  py::class_<IsingModel, QuadraticTarget>(m, "IsingModel")
      .def(py::init<Vector, Matrix>(), py::arg("bias"), py::arg("coupling"));
  m.def("lattice_ising", &make_lattice_ising, py::arg("rows"), py::arg("cols"), py::arg("theta") = 0.2,
        py::arg("circular") = true);

  py::class_<OrdinalPolyMixture, Target>(m, "OrdinalPolyMixture")
      .def(py::init([](std::size_t dim, const std::string& family, std::size_t components, const StateSpace& grid) {
             if (family != "poly2" && family != "poly4") throw ParameterError("family must be poly2 or poly4");
             return OrdinalPolyMixture(dim, family == "poly2" ? PolyFamily::SecondOrder : PolyFamily::FourthOrder,
                                       components, grid);
           }),
           py::arg("dim") = 20, py::arg("family") = "poly2", py::arg("components") = 50,
           py::arg("grid") = make_ordinal_grid(50, -1.5, 3.0))
      .def("exact_marginals", &OrdinalPolyMixture::exact_marginals)
      .def("exact_covariance", &OrdinalPolyMixture::exact_covariance)
      .def(
          "sample_exact",
          [](const OrdinalPolyMixture& t, std::size_t n, std::uint64_t seed) {
            Rng rng(seed);
            return t.sample_exact(n, rng);
          },
          py::arg("n"), py::arg("seed") = 0);

  py::class_<RegressionHyper>(m, "RegressionHyper")
      .def(py::init<>())
      .def_readwrite("alpha_pi", &RegressionHyper::alpha_pi)
      .def_readwrite("beta_pi", &RegressionHyper::beta_pi)
      .def_readwrite("g", &RegressionHyper::g)
      .def_readwrite("lam", &RegressionHyper::lambda)
      .def_readwrite("alpha_sigma", &RegressionHyper::alpha_sigma)
      .def_readwrite("beta_sigma", &RegressionHyper::beta_sigma)
      .def_readwrite("det_power", &RegressionHyper::det_power);
  py::class_<SparseRegressionPosterior, Target>(m, "SparseRegressionPosterior")
      .def(py::init([](std::uint64_t seed, std::size_t padding, double rho_pad) {
             Rng rng(seed);
             auto data = make_regression_dataset(rng);
             return SparseRegressionPosterior(std::move(data.x), std::move(data.y), {}, padding, rho_pad);
           }),
           py::arg("seed") = 0, py::arg("padding") = 80, py::arg("rho_pad") = 0.001)
      .def(py::init<Matrix, Vector, RegressionHyper, std::size_t, double>(), py::arg("x"), py::arg("y"),
           py::arg("hyper") = RegressionHyper{}, py::arg("padding") = 0, py::arg("rho_pad") = 0.001)
      .def("exact_moments", &SparseRegressionPosterior::exact_moments);

  m.def(
      "sample",
      [](const Target& target, const std::string& sampler, std::optional<double> eps, std::optional<std::size_t> radius,
         std::size_t n_chains, std::size_t n_steps, std::uint64_t seed, std::size_t threads,
         std::optional<Matrix> initial) {
        const auto config = make_config(sampler, eps, radius);
        if (config.kind == SamplerKind::PAVG) throw ParameterError("pavg needs a preconditioner; use run_experiment");
        ChainEnsemble ensemble = initial ? ChainEnsemble(target, *initial, seed) : ChainEnsemble(target, n_chains, seed);
        RunOptions opt;
        opt.n_steps = n_steps;
        opt.threads = threads;
        Trace trace;
        {
          py::gil_scoped_release release;
          trace = run_chain(target, config, ensemble, opt);
        }
        py::dict out;
        out["states"] = ensemble.states();
        out["acceptance_rate"] = trace.acceptance_rate();
        out["mean_l1_jump"] = trace.mean_l1_jump();
        return out;
      },
      py::arg("target"), py::arg("sampler") = "ncg", py::arg("eps") = py::none(), py::arg("radius") = py::none(),
      py::arg("n_chains") = 10, py::arg("n_steps") = 1000, py::arg("seed") = 0, py::arg("threads") = 1,
      py::arg("initial") = py::none(),
      "Runs n_chains chains for n_steps and returns the final states with acceptance and mean L1 jump.");

  m.def(
      "exact_distribution",
      [](const Target& t) {
        const auto e = exact_distribution(t);
        py::dict d;
        d["probs"] = e.probs;
        d["marginals"] = e.marginals;
        d["mean"] = e.mean;
        d["covariance"] = e.covariance;
        d["log_z"] = e.log_z;
        return d;
      },
      py::arg("target"));
  m.def(
      "transition_matrix",
      [](const Target& t, const std::string& sampler, std::optional<double> eps, std::optional<std::size_t> radius) {
        return transition_matrix(t, make_config(sampler, eps, radius));
      },
      py::arg("target"), py::arg("sampler"), py::arg("eps") = py::none(), py::arg("radius") = py::none());
  m.def("stationarity_error", &stationarity_error, py::arg("p"), py::arg("pi"));
  m.def("ess", py::overload_cast<const Vector&>(&ess), py::arg("trace"));
  m.def("ess_chains", py::overload_cast<const Matrix&>(&ess), py::arg("traces"),
        "ESS per column of a steps x chains matrix.");
  m.def("marginal_kl", &marginal_kl, py::arg("empirical"), py::arg("exact"), py::arg("n_samples"));
  m.def(
      "adapt_gamma",
      [](double gamma, double gamma_old, double delta, double jump_new, double jump_old) {
        const auto r = adapt_gamma(gamma, gamma_old, delta, jump_new, jump_old);
        return py::make_tuple(r.gamma, r.gamma_old);
      },
      py::arg("gamma"), py::arg("gamma_old"), py::arg("delta"), py::arg("jump_new"), py::arg("jump_old"));

  m.def("read_npy", &io::read_npy, py::arg("path"));
  m.def("write_npy", &io::write_npy, py::arg("path"), py::arg("matrix"));

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& config_json, bool paper_scale) -> py::object {
        const auto c = config_from(experiment, config_json, paper_scale);
        c.validate();
        if (experiment == "ordinal" || experiment == "regression") {
          ProtocolResult r;
          {
            py::gil_scoped_release release;
            r = experiment == "ordinal" ? cmd_ordinal(c) : cmd_regression(c);
          }
          return protocol_list(r);
        }
        if (experiment == "ising-pcd") {
          PcdResult r;
          {
            py::gil_scoped_release release;
            r = cmd_ising_pcd(c);
          }
          py::list runs;
          for (const auto& run : r.runs) {
            py::dict d;
            d["sampler"] = run.sampler;
            d["k"] = run.k;
            d["repetition"] = run.repetition;
            d["error"] = run.error;
            d["acceptance_rate"] = run.acceptance_rate;
            runs.append(d);
          }
          py::dict out;
          out["true_norm"] = r.true_norm;
          out["runs"] = runs;
          return std::move(out);
        }
        if (experiment == "oracle-check") {
          py::list out;
          for (const auto& check : cmd_oracle_check(c)) {
            py::dict d;
            d["name"] = check.name;
            d["value"] = check.value;
            d["threshold"] = check.threshold;
            d["expect_failure"] = check.expect_failure;
            d["pass"] = check.pass;
            out.append(d);
          }
          return std::move(out);
        }
        throw ParameterError("run_experiment supports ordinal, regression, ising-pcd and oracle-check");
      },
      py::arg("experiment"), py::arg("config_json") = "", py::arg("paper_scale") = false,
      "Runs a named experiment. config_json overlays the defaults with the same keys as the CLI config file.");
}
