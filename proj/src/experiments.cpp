#include "dgs/experiments.hpp"

#include "dgs/io.hpp"
#include "dgs/parallel.hpp"
#include "dgs/preconditioner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#ifndef DGS_VERSION
#define DGS_VERSION "0.1.0"
#endif

namespace dgs {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

const std::set<std::string> kExperiments = {"sample", "tune", "ordinal", "regression", "ising-pcd", "oracle-check"};

std::string optimizer_name(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer optimizer_from(const std::string& name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "sgd") return Optimizer::SGD;
  throw ParameterError("unknown optimizer '" + name + "'");
}

// Reads `key` into `out` if present.
template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ParameterError("unknown key '" + it.key() + "' in " + where);
}

void parse_target(const json& j, TargetSpec& t) {
  reject_unknown(j,
                 {"kind", "dim", "support", "components", "lo", "hi", "rows", "cols", "theta", "circular", "n_data",
                  "base", "covariates", "padding", "rho_pad", "hyper", "seed"},
                 "target");
  take(j, "kind", t.kind);
  take(j, "dim", t.dim);
  take(j, "support", t.support);
  take(j, "components", t.components);
  take(j, "lo", t.lo);
  take(j, "hi", t.hi);
  take(j, "rows", t.rows);
  take(j, "cols", t.cols);
  take(j, "theta", t.theta);
  take(j, "circular", t.circular);
  take(j, "n_data", t.n_data);
  take(j, "base", t.base);
  take(j, "covariates", t.covariates);
  take(j, "padding", t.padding);
  take(j, "rho_pad", t.rho_pad);
  take(j, "seed", t.seed);
  if (j.contains("hyper")) {
    const auto& h = j.at("hyper");
    reject_unknown(h, {"alpha_pi", "beta_pi", "g", "lambda", "alpha_sigma", "beta_sigma", "det_power"}, "hyper");
    take(h, "alpha_pi", t.hyper.alpha_pi);
    take(h, "beta_pi", t.hyper.beta_pi);
    take(h, "g", t.hyper.g);
    take(h, "lambda", t.hyper.lambda);
    take(h, "alpha_sigma", t.hyper.alpha_sigma);
    take(h, "beta_sigma", t.hyper.beta_sigma);
    take(h, "det_power", t.hyper.det_power);
  }
}

SamplerSpec parse_sampler(const json& j) {
  SamplerSpec s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
    return s;
  }
  reject_unknown(j, {"name", "eps", "radius"}, "sampler");
  s.name = j.at("name").get<std::string>();
  if (j.contains("eps")) s.eps = j.at("eps").get<double>();
  if (j.contains("radius")) s.radius = j.at("radius").get<std::size_t>();
  return s;
}

std::string metadata_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(10);
  return out;
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
  return line;
}

// ---------------------------------------------------------------------------
// Shared sampling protocol

struct Reference {
  bool binary = false;
  Matrix marginals;
  Matrix covariance;
  Vector upper;
  Matrix pair;
};

struct Budget {
  bool wall = false;
  std::size_t steps = 0;
  double seconds = 0.0;
};

std::size_t steps_for(double units, const SamplerConfig& config, std::size_t sites, const CostModel& costs) {
  const double c = step_cost(config, sites, costs);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(units / c + 1e-9)));
}

// Runs the chains through the burn-in. For PAVG the preconditioner adapts
// during burn-in and is frozen afterwards; its final state is written into
// `config`.
std::optional<double> burn_in(const Target& target, SamplerConfig& config, ChainEnsemble& ensemble,
                              const ExperimentConfig& cfg, const Budget& budget) {
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  if (config.kind == SamplerKind::PAVG) {
    AdaptiveConfig ac;
    ac.eps = config.eps;
    ac.history_eps = cfg.history_eps ? *cfg.history_eps : sampler_config({"avg", {}, {}}, cfg.target.kind).eps;
    ac.n_chains = ensemble.size();
    ac.n_sigma = cfg.n_sigma;
    ac.n_adapt = cfg.n_adapt;
    ac.delta = cfg.delta;
    ac.rho = cfg.rho;
    ac.threads = cfg.threads;
    AdaptivePavg adaptive(target, ac);
    for (std::size_t t = 0; budget.wall ? elapsed() < budget.seconds : t < budget.steps; ++t) adaptive.iterate(ensemble);
    if (!adaptive.fit())
      std::clog << "warning: pavg burn-in ended before a preconditioner was fitted; running with Sigma = 0\n";
    config.preconditioner = std::make_shared<const PreconditionerState>(*adaptive.preconditioner());
    return config.preconditioner->gamma();
  }
  config.validate();
  RunOptions run;
  run.record = false;
  run.threads = cfg.threads;
  if (budget.wall) {
    run.n_steps = 10;
    while (elapsed() < budget.seconds) run_chain(target, config, ensemble, run);
  } else {
    run.n_steps = budget.steps;
    if (run.n_steps) run_chain(target, config, ensemble, run);
  }
  return std::nullopt;
}

SamplerRun run_protocol(const Target& target, const std::string& experiment, const SamplerSpec& spec,
                        const Reference& ref, const ExperimentConfig& cfg, const Vector& s_random) {
  const auto sites = target.sites();
  SamplerRun run;
  run.config = sampler_config(spec, cfg.target.kind);
  run.sampler = spec.name.empty() ? to_string(run.config.kind) : spec.name;
  const bool wall = cfg.budget == "wall";

  ChainEnsemble ensemble(target, cfg.n_chains, cfg.seed);
  Budget burn{wall, steps_for(static_cast<double>(cfg.burn_in), run.config, sites, cfg.costs), cfg.burn_minutes * 60};
  if (cfg.burn_in == 0) burn.steps = 0;
  run.gamma = burn_in(target, run.config, ensemble, cfg, burn);

  const std::size_t n_chains = ensemble.size();
  const std::size_t total = steps_for(static_cast<double>(cfg.n_steps), run.config, sites, cfg.costs);
  const double seconds = cfg.wall_minutes * 60.0;
  const double unit = step_cost(run.config, sites, cfg.costs);

  std::vector<ChainStatistics> stats;
  for (std::size_t c = 0; c < n_chains; ++c) stats.emplace_back(target.space(), target.dim(), !ref.binary, ref.binary);
  std::vector<std::vector<double>> statistic(n_chains);
  std::vector<std::size_t> accepted(n_chains, 0);
  std::vector<double> jumps(n_chains, 0.0);
  for (auto& s : statistic) s.reserve(wall ? 1024 : total);

  auto advance = [&](std::size_t n) {
    parallel_for(n_chains, cfg.threads, [&](std::size_t c) {
      Chain& chain = ensemble[c];
      for (std::size_t t = 0; t < n; ++t) {
        const auto out = step(target, run.config, chain);
        accepted[c] += out.accepted;
        jumps[c] += out.l1_jump;
        stats[c].add(chain.state);
        statistic[c].push_back((chain.state - s_random).lpNorm<1>());
      }
    });
    ensemble.advance(n);
    run.steps += n;
  };

  auto checkpoint = [&](std::size_t index) {
    std::vector<double> marginal(n_chains), second(n_chains);
    parallel_for(n_chains, cfg.threads, [&](std::size_t c) {
      const auto& s = stats[c];
      if (ref.binary) {
        marginal[c] = marginal_abs_error(s.upper(), ref.upper);
        second[c] = pairwise_error(s.upper(), s.upper_pair(), ref.upper, ref.pair);
      } else {
        marginal[c] = marginal_kl(s.marginals(), ref.marginals, s.count());
        second[c] = covariance_error(s.covariance(), ref.covariance);
      }
    });
    MetricReport r;
    r.experiment = experiment;
    r.sampler = run.sampler;
    r.checkpoint = index;
    r.steps = run.steps;
    r.budget = static_cast<double>(run.steps) * unit;
    r.marginal_error = summarize(marginal);
    if (ref.binary)
      r.pairwise_error = summarize(second);
    else
      r.covariance_error = summarize(second);
    std::size_t acc = 0;
    double jump = 0.0;
    for (std::size_t c = 0; c < n_chains; ++c) {
      acc += accepted[c];
      jump += jumps[c];
    }
    const double moves = static_cast<double>(std::max<std::size_t>(1, run.steps * n_chains));
    r.acceptance_rate = static_cast<double>(acc) / moves;
    r.mean_l1_jump = jump / moves;
    run.reports.push_back(r);
  };

  const std::size_t n_checkpoints = std::max<std::size_t>(1, cfg.checkpoints);
  if (wall) {
    const auto start = Clock::now();
    for (std::size_t k = 1; k <= n_checkpoints; ++k) {
      const double until = seconds * static_cast<double>(k) / static_cast<double>(n_checkpoints);
      do advance(10);
      while (std::chrono::duration<double>(Clock::now() - start).count() < until);
      checkpoint(k);
    }
  } else {
    for (std::size_t k = 1; k <= n_checkpoints; ++k) {
      const auto target_steps = total * k / n_checkpoints;
      if (target_steps > run.steps) advance(target_steps - run.steps);
      checkpoint(k);
    }
  }

  Matrix traces(static_cast<Eigen::Index>(run.steps), static_cast<Eigen::Index>(n_chains));
  for (std::size_t c = 0; c < n_chains; ++c)
    traces.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Vector>(statistic[c].data(), traces.rows());
  run.ess = ess(traces);
  run.reports.back().ess = summarize(std::vector<double>(run.ess.begin(), run.ess.end()));
  run.acceptance_rate = run.reports.back().acceptance_rate;
  run.mean_l1_jump = run.reports.back().mean_l1_jump;
  run.cost = static_cast<double>(run.steps) * unit;
  return run;
}

void write_protocol(const ProtocolResult& result, const ExperimentConfig& cfg) {
  if (cfg.out.empty()) return;
  const std::string stem = cfg.out + "/" + result.experiment;
  {
    auto out = open_out(stem + "_metrics.csv");
    out << join(metric_csv_header()) << '\n';
    for (const auto& run : result.runs)
      for (const auto& r : run.reports) out << metric_csv_row(r) << '\n';
    write_metadata(stem + "_metrics.csv", cfg);
  }
  {
    auto out = open_out(stem + "_ess.csv");
    out << "sampler,chain,ess\n";
    for (const auto& run : result.runs)
      for (Eigen::Index c = 0; c < run.ess.size(); ++c) out << run.sampler << ',' << c << ',' << run.ess[c] << '\n';
    write_metadata(stem + "_ess.csv", cfg);
  }
  json summary = json::array();
  for (const auto& run : result.runs) {
    json s = json::parse(to_json(run.reports.back()));
    if (run.gamma) s["gamma"] = *run.gamma;
    s["eps"] = run.config.eps;
    s["radius"] = run.config.radius;
    summary.push_back(s);
  }
  auto out = open_out(stem + "_summary.json");
  out << summary.dump(2) << '\n';
}

std::vector<SamplerSpec> resolved_samplers(const ExperimentConfig& cfg) {
  return cfg.samplers.empty() ? default_samplers(cfg.experiment, cfg.target.kind) : cfg.samplers;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (!kExperiments.count(experiment)) throw ParameterError("unknown experiment '" + experiment + "'");
  if (budget != "steps" && budget != "wall") throw ParameterError("budget must be 'steps' or 'wall'");
  if (n_chains == 0) throw ParameterError("n_chains must be positive");
  if (n_adapt == 0) throw ParameterError("n_adapt must be positive");
  if (budget == "wall" && !(wall_minutes > 0.0)) throw ParameterError("wall_minutes must be positive");
  for (const auto& s : samplers) sampler_kind_from_string(s.name);
  if (experiment == "ordinal" && target.kind != "poly2" && target.kind != "poly4")
    throw ParameterError("the ordinal experiment needs a poly2 or poly4 target");
  if (experiment == "regression" && target.kind != "regression")
    throw ParameterError("the regression experiment needs a regression target");
  if (experiment == "ising-pcd") {
    if (pcd.k_grid.empty() || pcd.repetitions == 0) throw ParameterError("ising-pcd needs a K grid and repetitions");
    if (pcd.n_batch == 0 || pcd.n_batch > pcd.n_buffer) throw ParameterError("need 0 < n_batch <= n_buffer");
  }
}

ExperimentConfig default_config(const std::string& experiment, bool paper_scale) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.paper_scale = paper_scale;
  if (experiment == "regression") {
    c.target.kind = "regression";
    c.target.seed = 0;
  } else if (experiment == "ising-pcd") {
    c.target.kind = "ising";
    if (paper_scale) {
      c.target.rows = c.target.cols = 10;
      c.pcd.n_data = 10000;
      c.pcd.gt_sweeps = 1000000;
      c.pcd.gt_single_chain = true;
      c.pcd.n_buffer = 5000;
      c.pcd.repetitions = 5;
    }
  } else if (experiment == "oracle-check") {
    c.target.kind = "ising";
  }
  if (paper_scale && (experiment == "ordinal" || experiment == "regression")) {
    c.budget = "wall";
    c.wall_minutes = 10.0;
    c.burn_minutes = 1.0;
  }
  return c;
}

ExperimentConfig parse_config(const json& j, ExperimentConfig c) {
  reject_unknown(j,
                 {"experiment", "target", "samplers", "n_chains", "n_steps", "burn_in", "checkpoints", "budget",
                  "wall_minutes", "burn_minutes", "seed", "threads", "out", "paper_scale", "adaptation",
                  "exact_draws", "costs", "snapshot_every", "tune", "pcd"},
                 "config");
  take(j, "experiment", c.experiment);
  if (j.contains("target")) parse_target(j.at("target"), c.target);
  if (j.contains("samplers")) {
    c.samplers.clear();
    for (const auto& s : j.at("samplers")) c.samplers.push_back(parse_sampler(s));
  }
  take(j, "n_chains", c.n_chains);
  take(j, "n_steps", c.n_steps);
  take(j, "burn_in", c.burn_in);
  take(j, "checkpoints", c.checkpoints);
  take(j, "budget", c.budget);
  take(j, "wall_minutes", c.wall_minutes);
  take(j, "burn_minutes", c.burn_minutes);
  take(j, "seed", c.seed);
  take(j, "threads", c.threads);
  take(j, "out", c.out);
  take(j, "paper_scale", c.paper_scale);
  take(j, "exact_draws", c.exact_draws);
  take(j, "snapshot_every", c.snapshot_every);
  if (j.contains("adaptation")) {
    const auto& a = j.at("adaptation");
    reject_unknown(a, {"n_sigma", "n_adapt", "delta", "rho", "history_eps"}, "adaptation");
    if (a.contains("history_eps") && !a.at("history_eps").is_null()) c.history_eps = a.at("history_eps").get<double>();
    take(a, "n_sigma", c.n_sigma);
    take(a, "n_adapt", c.n_adapt);
    take(a, "delta", c.delta);
    take(a, "rho", c.rho);
  }
  if (j.contains("costs")) {
    const auto& a = j.at("costs");
    reject_unknown(a, {"gradient_step", "local_step", "uniform_step", "gibbs_site"}, "costs");
    take(a, "gradient_step", c.costs.gradient_step);
    take(a, "local_step", c.costs.local_step);
    take(a, "uniform_step", c.costs.uniform_step);
    take(a, "gibbs_site", c.costs.gibbs_site);
  }
  if (j.contains("tune")) {
    const auto& a = j.at("tune");
    reject_unknown(a, {"n_steps", "n_chains", "min_exponent", "max_exponent", "coarse_radii", "radius_refine"}, "tune");
    take(a, "n_steps", c.tune.n_steps);
    take(a, "n_chains", c.tune.n_chains);
    take(a, "min_exponent", c.tune.min_exponent);
    take(a, "max_exponent", c.tune.max_exponent);
    take(a, "coarse_radii", c.tune.coarse_radii);
    take(a, "radius_refine", c.tune.radius_refine);
  }
  if (j.contains("pcd")) {
    const auto& a = j.at("pcd");
    reject_unknown(a,
                   {"n_data", "gt_sweeps", "gt_single_chain", "n_iters", "n_batch", "n_buffer", "learning_rate",
                    "l1_strength", "optimizer", "k_grid", "repetitions", "checkpoint_every"},
                   "pcd");
    take(a, "n_data", c.pcd.n_data);
    take(a, "gt_sweeps", c.pcd.gt_sweeps);
    take(a, "gt_single_chain", c.pcd.gt_single_chain);
    take(a, "n_iters", c.pcd.n_iters);
    take(a, "n_batch", c.pcd.n_batch);
    take(a, "n_buffer", c.pcd.n_buffer);
    take(a, "learning_rate", c.pcd.learning_rate);
    take(a, "l1_strength", c.pcd.l1_strength);
    if (a.contains("optimizer")) c.pcd.optimizer = optimizer_from(a.at("optimizer").get<std::string>());
    take(a, "k_grid", c.pcd.k_grid);
    take(a, "repetitions", c.pcd.repetitions);
    take(a, "checkpoint_every", c.pcd.checkpoint_every);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& experiment, bool paper_scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const json j = json::parse(in, nullptr, true, true);
  std::string name = experiment;
  if (name.empty()) name = j.value("experiment", std::string("sample"));
  return parse_config(j, default_config(name, paper_scale || j.value("paper_scale", false)));
}

json config_to_json(const ExperimentConfig& c) {
  json samplers = json::array();
  for (const auto& s : c.samplers) {
    json e{{"name", s.name}};
    if (s.eps) e["eps"] = *s.eps;
    if (s.radius) e["radius"] = *s.radius;
    samplers.push_back(e);
  }
  const auto& t = c.target;
  return {
      {"experiment", c.experiment},
      {"target",
       {{"kind", t.kind},
        {"dim", t.dim},
        {"support", t.support},
        {"components", t.components},
        {"lo", t.lo},
        {"hi", t.hi},
        {"rows", t.rows},
        {"cols", t.cols},
        {"theta", t.theta},
        {"circular", t.circular},
        {"n_data", t.n_data},
        {"base", t.base},
        {"covariates", t.covariates},
        {"padding", t.padding},
        {"rho_pad", t.rho_pad},
        {"hyper",
         {{"alpha_pi", t.hyper.alpha_pi},
          {"beta_pi", t.hyper.beta_pi},
          {"g", t.hyper.g},
          {"lambda", t.hyper.lambda},
          {"alpha_sigma", t.hyper.alpha_sigma},
          {"beta_sigma", t.hyper.beta_sigma},
          {"det_power", t.hyper.det_power}}},
        {"seed", t.seed}}},
      {"samplers", samplers},
      {"n_chains", c.n_chains},
      {"n_steps", c.n_steps},
      {"burn_in", c.burn_in},
      {"checkpoints", c.checkpoints},
      {"budget", c.budget},
      {"wall_minutes", c.wall_minutes},
      {"burn_minutes", c.burn_minutes},
      {"seed", c.seed},
      {"threads", c.threads},
      {"out", c.out},
      {"paper_scale", c.paper_scale},
      {"adaptation",
       {{"n_sigma", c.n_sigma},
        {"n_adapt", c.n_adapt},
        {"delta", c.delta},
        {"rho", c.rho},
        {"history_eps", c.history_eps ? json(*c.history_eps) : json(nullptr)}}},
      {"exact_draws", c.exact_draws},
      {"costs",
       {{"gradient_step", c.costs.gradient_step},
        {"local_step", c.costs.local_step},
        {"uniform_step", c.costs.uniform_step},
        {"gibbs_site", c.costs.gibbs_site}}},
      {"snapshot_every", c.snapshot_every},
      {"tune",
       {{"n_steps", c.tune.n_steps},
        {"n_chains", c.tune.n_chains},
        {"min_exponent", c.tune.min_exponent},
        {"max_exponent", c.tune.max_exponent},
        {"coarse_radii", c.tune.coarse_radii},
        {"radius_refine", c.tune.radius_refine}}},
      {"pcd",
       {{"n_data", c.pcd.n_data},
        {"gt_sweeps", c.pcd.gt_sweeps},
        {"gt_single_chain", c.pcd.gt_single_chain},
        {"n_iters", c.pcd.n_iters},
        {"n_batch", c.pcd.n_batch},
        {"n_buffer", c.pcd.n_buffer},
        {"learning_rate", c.pcd.learning_rate},
        {"l1_strength", c.pcd.l1_strength},
        {"optimizer", optimizer_name(c.pcd.optimizer)},
        {"k_grid", c.pcd.k_grid},
        {"repetitions", c.pcd.repetitions},
        {"checkpoint_every", c.pcd.checkpoint_every}}},
  };
}

std::unique_ptr<Target> make_target(const TargetSpec& t) {
  if (t.kind == "poly2" || t.kind == "poly4") {
    const auto family = t.kind == "poly2" ? PolyFamily::SecondOrder : PolyFamily::FourthOrder;
    return std::make_unique<OrdinalPolyMixture>(t.dim, family, t.components, make_ordinal_grid(t.support, t.lo, t.hi));
  }
  if (t.kind == "ising") return std::make_unique<IsingModel>(make_lattice_ising(t.rows, t.cols, t.theta, t.circular));
  if (t.kind == "regression") {
    Rng rng(t.seed);
    auto data = make_regression_dataset(rng, t.n_data, t.base, t.covariates);
    return std::make_unique<SparseRegressionPosterior>(std::move(data.x), std::move(data.y), t.hyper, t.padding,
                                                       t.rho_pad);
  }
  if (t.kind == "quadratic") {
    Rng rng(t.seed);
    Vector b(static_cast<Eigen::Index>(t.dim));
    for (auto& v : b) v = 0.5 * rng.normal();
    Matrix j = Matrix::Zero(b.size(), b.size());
    for (Eigen::Index a = 0; a < b.size(); ++a)
      for (Eigen::Index c = a + 1; c < b.size(); ++c) j(a, c) = j(c, a) = 0.3 * rng.normal();
    return std::make_unique<QuadraticTarget>(make_ordinal_grid(t.support, t.lo, t.hi), std::move(b), std::move(j));
  }
  throw ParameterError("unknown target kind '" + t.kind + "'");
}

SamplerConfig sampler_config(const SamplerSpec& spec, const std::string& target_kind) {
  SamplerConfig c;
  c.kind = sampler_kind_from_string(spec.name);
  // published step sizes: ncg, avg, pavg, ordinal-gwg, mh-uniform
  struct Row {
    double ncg, avg, pavg;
    std::size_t ogwg, mhu;
  };
  static const std::map<std::string, Row> table = {
      {"poly2", {0.05, 0.02, 1000.0, 16, 2}},
      {"poly4", {0.05, 0.02, 0.06, 8, 1}},
      {"regression", {0.03, 1000.0, 1000.0, 1, 1}},
      {"ising", {0.5, 0.2, 0.2, 1, 1}},
  };
  const auto it = table.find(target_kind);
  const Row row = it == table.end() ? Row{0.1, 0.1, 0.1, 1, 1} : it->second;
  switch (c.kind) {
    case SamplerKind::NCG: c.eps = row.ncg; break;
    case SamplerKind::AVG: c.eps = row.avg; break;
    case SamplerKind::PAVG: c.eps = row.pavg; break;
    case SamplerKind::OrdinalGWG: c.radius = row.ogwg; break;
    case SamplerKind::MHUniform: c.radius = row.mhu; break;
    default: break;
  }
  if (spec.eps) c.eps = *spec.eps;
  if (spec.radius) c.radius = *spec.radius;
  return c;
}

std::vector<SamplerSpec> default_samplers(const std::string& experiment, const std::string& target_kind) {
  std::vector<std::string> names;
  if (experiment == "ising-pcd")
    names = {"gibbs", "gwg", "ncg", "avg", "pavg"};
  else if (target_kind == "poly2" || target_kind == "poly4")
    names = {"gibbs", "gwg", "ordinal-gwg", "mh-uniform", "ncg", "avg", "pavg"};
  else if (target_kind == "regression")
    names = {"gibbs", "gwg", "mh-uniform", "ncg", "avg", "pavg"};
  else
    names = {"gibbs", "gwg", "ncg", "avg", "pavg"};
  std::vector<SamplerSpec> out;
  for (auto& n : names) out.push_back({n, std::nullopt, std::nullopt});
  return out;
}

std::string version_string() { return DGS_VERSION; }

void write_metadata(const std::string& csv_path, const ExperimentConfig& config, const json& extra) {
  json meta{{"file", std::filesystem::path(csv_path).filename().string()},
            {"version", version_string()},
            {"seed", config.seed},
            {"config", config_to_json(config)}};
  if (!extra.is_null()) meta["extra"] = extra;
  auto out = open_out(metadata_path(csv_path));
  out << meta.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Experiments

const SamplerRun* ProtocolResult::find(const std::string& sampler) const {
  for (const auto& r : runs)
    if (r.sampler == sampler) return &r;
  return nullptr;
}

ProtocolResult cmd_ordinal(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto target = make_target(cfg.target);
  const auto& mixture = static_cast<const OrdinalPolyMixture&>(*target);
  Rng rng(cfg.seed, std::uint64_t{1} << 40);
  Reference ref;
  ref.marginals = mixture.exact_marginals();
  ref.covariance = sample_covariance(mixture.sample_exact(cfg.exact_draws, rng));
  const Vector s_random = random_state(target->space(), target->dim(), rng);

  ProtocolResult result;
  result.experiment = "ordinal";
  for (const auto& spec : resolved_samplers(cfg))
    result.runs.push_back(run_protocol(*target, "ordinal", spec, ref, cfg, s_random));
  write_protocol(result, cfg);
  return result;
}

ProtocolResult cmd_regression(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto target = make_target(cfg.target);
  const auto& posterior = static_cast<const SparseRegressionPosterior&>(*target);
  Reference ref;
  ref.binary = true;
  std::tie(ref.upper, ref.pair) = posterior.exact_moments();
  Rng rng(cfg.seed, std::uint64_t{1} << 40);
  const Vector s_random = random_state(target->space(), target->dim(), rng);

  ProtocolResult result;
  result.experiment = "regression";
  for (const auto& spec : resolved_samplers(cfg))
    result.runs.push_back(run_protocol(*target, "regression", spec, ref, cfg, s_random));
  write_protocol(result, cfg);
  return result;
}

double PcdResult::mean_error(const std::string& sampler, std::size_t k) const {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& r : runs)
    if (r.sampler == sampler && r.k == k) {
      total += r.error;
      ++n;
    }
  return n ? total / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

SamplerConfig budget_matched(const SamplerConfig& config, std::size_t k, std::size_t sites, const CostModel& costs,
                             std::size_t& steps_out) {
  SamplerConfig out = config;
  const double budget = static_cast<double>(k) * costs.gradient_step;
  if (config.kind == SamplerKind::Gibbs) {
    out.scan = GibbsScan::Random;
    out.gibbs_updates = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(budget / costs.gibbs_site)));
    steps_out = 1;
    return out;
  }
  const double c = step_cost(config, sites, costs);
  steps_out = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(budget / c)));
  return out;
}

PcdResult cmd_ising_pcd(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto model = make_lattice_ising(cfg.target.rows, cfg.target.cols, cfg.target.theta, cfg.target.circular);
  const auto d = model.dim();
  PcdResult result;
  result.true_norm = model.coupling().norm();
  const auto samplers = resolved_samplers(cfg);

  std::ofstream traces;
  if (!cfg.out.empty()) {
    traces = open_out(cfg.out + "/ising_pcd_trace.csv");
    traces << "sampler,k,repetition,iteration,frobenius_error,acceptance_rate\n";
  }
  for (std::size_t rep = 0; rep < cfg.pcd.repetitions; ++rep) {
    const std::uint64_t seed = cfg.seed + rep;
    GroundTruthOptions gt;
    gt.n_samples = cfg.pcd.n_data;
    gt.n_sweeps = cfg.pcd.gt_sweeps;
    gt.single_chain = cfg.pcd.gt_single_chain;
    gt.threads = cfg.threads;
    gt.seed = seed;
    const Matrix data = generate_ground_truth(model, gt);
    if (!cfg.out.empty() && rep == 0) {
      std::vector<std::string> header;
      for (std::size_t i = 0; i < d; ++i) header.push_back("dim_" + std::to_string(i));
      io::write_csv_file(cfg.out + "/ising_data.csv", header, data);
      write_metadata(cfg.out + "/ising_data.csv", cfg);
      io::write_npy(cfg.out + "/ising_true_coupling.npy", model.coupling());
    }
    for (const auto& spec : samplers) {
      const auto base = sampler_config(spec, "ising");
      for (const auto k : cfg.pcd.k_grid) {
        PcdConfig pc;
        pc.n_iters = cfg.pcd.n_iters;
        pc.n_batch = cfg.pcd.n_batch;
        pc.n_buffer = cfg.pcd.n_buffer;
        pc.learning_rate = cfg.pcd.learning_rate;
        pc.l1_strength = cfg.pcd.l1_strength;
        pc.optimizer = cfg.pcd.optimizer;
        pc.sampler = budget_matched(base, k, d, cfg.costs, pc.k_steps);
        pc.model_preconditioner = true;
        pc.checkpoint_every = cfg.pcd.checkpoint_every;
        pc.threads = cfg.threads;
        pc.seed = seed;
        const auto est = pcd_train(data, model.bias(), model.coupling(), pc);
        const std::string name = spec.name.empty() ? to_string(base.kind) : spec.name;
        result.runs.push_back({name, k, rep, est.error, est.acceptance_rate});
        if (traces)
          for (const auto& c : est.trace)
            traces << name << ',' << k << ',' << rep << ',' << c.iteration << ',' << c.frobenius_error << ','
                   << c.acceptance_rate << '\n';
        if (!cfg.out.empty() && rep == 0 && k == cfg.pcd.k_grid.back())
          io::write_npy(cfg.out + "/ising_coupling_" + name + ".npy", est.coupling);
      }
    }
  }
  if (cfg.out.empty()) return result;
  write_metadata(cfg.out + "/ising_pcd_trace.csv", cfg);
  {
    auto out = open_out(cfg.out + "/ising_pcd_runs.csv");
    out << "sampler,k,repetition,frobenius_error,acceptance_rate\n";
    for (const auto& r : result.runs)
      out << r.sampler << ',' << r.k << ',' << r.repetition << ',' << r.error << ',' << r.acceptance_rate << '\n';
    write_metadata(cfg.out + "/ising_pcd_runs.csv", cfg, {{"true_norm", result.true_norm}});
  }
  auto out = open_out(cfg.out + "/ising_pcd_table.csv");
  out << "sampler,k,mean_error,std_error,repetitions\n";
  for (const auto& spec : samplers) {
    const std::string name = spec.name.empty() ? to_string(sampler_kind_from_string(spec.name)) : spec.name;
    for (const auto k : cfg.pcd.k_grid) {
      std::vector<double> errs;
      for (const auto& r : result.runs)
        if (r.sampler == name && r.k == k) errs.push_back(r.error);
      double mean = 0.0, var = 0.0;
      for (double e : errs) mean += e / static_cast<double>(errs.size());
      for (double e : errs) var += (e - mean) * (e - mean);
      const double sd = errs.size() > 1 ? std::sqrt(var / static_cast<double>(errs.size() - 1)) : 0.0;
      out << name << ',' << k << ',' << mean << ',' << sd << ',' << errs.size() << '\n';
    }
  }
  write_metadata(cfg.out + "/ising_pcd_table.csv", cfg, {{"true_norm", result.true_norm}});
  return result;
}

std::vector<OracleCheck> cmd_oracle_check(const ExperimentConfig& cfg) {
  std::vector<OracleCheck> checks;
  auto add = [&](std::string name, double value, double threshold, bool expect_failure = false) {
    const bool below = value < threshold;
    checks.push_back({std::move(name), value, threshold, expect_failure, expect_failure ? !below : below});
  };

  Rng rng(cfg.seed, 17);
  Vector b(4);
  for (auto& v : b) v = 0.5 * rng.normal();
  Matrix j = Matrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int c = a + 1; c < 4; ++c) j(a, c) = j(c, a) = 0.5 * rng.normal();
  const IsingModel ising(b, j);
  const OrdinalPolyMixture ordinal(2, PolyFamily::SecondOrder, 50, make_ordinal_grid(5, -1.5, 3.0));

  struct Kernel {
    SamplerKind kind;
    bool reversible;
  };
  const Kernel kernels[] = {{SamplerKind::Gibbs, false},
                            {SamplerKind::GWG, true},
                            {SamplerKind::OrdinalGWG, true},
                            {SamplerKind::MHUniform, true},
                            {SamplerKind::NCG, true}};
  const std::pair<const Target*, std::string> targets[] = {{&ising, "ising-d4"}, {&ordinal, "ordinal-d2-k5"}};
  for (const auto& [target, label] : targets) {
    const auto exact = exact_distribution(*target);
    for (const auto& k : kernels) {
      SamplerConfig c;
      c.kind = k.kind;
      c.eps = label == "ising-d4" ? 0.5 : 0.3;
      c.radius = 2;
      const Matrix p = transition_matrix(*target, c);
      const std::string name = "stationarity " + to_string(k.kind) + " " + label;
      add(name, stationarity_error(p, exact.probs), 1e-10);
      add("row sums " + to_string(k.kind) + " " + label, row_sum_error(p), 1e-12);
      if (k.reversible) add("detailed balance " + to_string(k.kind) + " " + label, detailed_balance_error(p, exact.probs), 1e-10);
    }
    SamplerConfig ncg;
    ncg.kind = SamplerKind::NCG;
    ncg.eps = 0.5;
    TransitionOptions corrupt;
    corrupt.ignore_proposal_ratio = true;
    add("negative control ncg without proposal ratio " + label,
        stationarity_error(transition_matrix(*target, ncg, corrupt), exact.probs), 1e-6, true);
  }

  // PAVG with Sigma = J on a quadratic target needs no correction
  {
    const std::size_t d = 20;
    Vector qb(d);
    for (auto& v : qb) v = 0.5 * rng.normal();
    Matrix qj = Matrix::Zero(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t c = a + 1; c < d; ++c) qj(a, c) = qj(c, a) = 0.3 * rng.normal();
    const QuadraticTarget quad(make_ordinal_grid(7, -1.0, 2.0), qb, qj);
    PreconditionerState pre(qj, 1.0, 0.5);
    pre.refresh_sqrt();
    double worst = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
      Chain chain;
      chain.rng = Rng(cfg.seed + 1, i);
      chain.state = random_state(quad.space(), d, chain.rng);
      auto ev = quad.evaluate(chain.state);
      chain.log_f = ev.log_f;
      chain.grad = ev.grad;
      worst = std::max(worst, std::abs(pavg_step(quad, chain, pre).log_accept_ratio));
    }
    add("pavg quadratic exactness", worst, 1e-8);
  }

  // PAVG with Sigma = 0 retraces AVG
  {
    const OrdinalPolyMixture mix(5, PolyFamily::SecondOrder);
    const double eps = 0.05;
    PreconditionerState zero(5, eps);
    zero.refresh_sqrt();
    ChainEnsemble a(mix, 1, cfg.seed), p(mix, 1, cfg.seed);
    std::size_t mismatches = 0;
    for (int t = 0; t < 10000; ++t) {
      avg_step(mix, a[0], eps);
      pavg_step(mix, p[0], zero);
      mismatches += a[0].state != p[0].state;
    }
    add("pavg with zero preconditioner equals avg", static_cast<double>(mismatches), 0.5);
  }

  if (!cfg.out.empty()) {
    auto out = open_out(cfg.out + "/oracle_check.csv");
    out << "check,value,threshold,expect_failure,pass\n";
    for (const auto& c : checks)
      out << '"' << c.name << "\"," << c.value << ',' << c.threshold << ',' << c.expect_failure << ',' << c.pass << '\n';
    write_metadata(cfg.out + "/oracle_check.csv", cfg);
  }
  return checks;
}

SampleResult cmd_sample(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto target = make_target(cfg.target);
  const auto spec = cfg.samplers.empty() ? SamplerSpec{"ncg", std::nullopt, std::nullopt} : cfg.samplers.front();
  auto config = sampler_config(spec, cfg.target.kind);
  ChainEnsemble ensemble(*target, cfg.n_chains, cfg.seed);
  const Budget burn{cfg.budget == "wall", cfg.burn_in, cfg.burn_minutes * 60};
  burn_in(*target, config, ensemble, cfg, burn);

  RunOptions run;
  run.n_steps = cfg.n_steps;
  run.threads = cfg.threads;
  run.snapshot_every = cfg.snapshot_every;
  SampleResult result;
  result.trace = run_chain(*target, config, ensemble, run);
  result.final_states = ensemble.states();
  if (cfg.out.empty()) return result;

  const std::string name = to_string(config.kind);
  {
    auto out = open_out(cfg.out + "/sample_" + name + "_trace.csv");
    result.trace.write_csv(out);
    write_metadata(cfg.out + "/sample_" + name + "_trace.csv", cfg,
                   {{"acceptance_rate", result.trace.acceptance_rate()}, {"mean_l1_jump", result.trace.mean_l1_jump()}});
  }
  {
    auto out = open_out(cfg.out + "/sample_" + name + "_states.csv");
    out.precision(17);
    write_states_csv(out, result.final_states);
    write_metadata(cfg.out + "/sample_" + name + "_states.csv", cfg);
  }
  if (!result.trace.snapshots.empty()) {
    auto out = open_out(cfg.out + "/sample_" + name + "_snapshots.csv");
    out.precision(17);
    out << "step,chain";
    for (std::size_t i = 0; i < target->dim(); ++i) out << ",dim_" << i;
    out << '\n';
    for (std::size_t k = 0; k < result.trace.snapshots.size(); ++k) {
      const Matrix& s = result.trace.snapshots[k];
      for (Eigen::Index c = 0; c < s.rows(); ++c) {
        out << result.trace.snapshot_steps[k] << ',' << c;
        for (Eigen::Index i = 0; i < s.cols(); ++i) out << ',' << s(c, i);
        out << '\n';
      }
    }
    write_metadata(cfg.out + "/sample_" + name + "_snapshots.csv", cfg);
  }
  if (config.preconditioner) save_preconditioner(*config.preconditioner, cfg.out + "/sample_preconditioner");
  return result;
}

std::vector<TuneResult> cmd_tune(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto target = make_target(cfg.target);
  std::vector<TuneResult> results;
  std::vector<std::string> names;
  auto specs = resolved_samplers(cfg);
  TuneOptions opt = cfg.tune;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  for (const auto& spec : specs) {
    auto config = sampler_config(spec, cfg.target.kind);
    if (config.kind == SamplerKind::Gibbs || config.kind == SamplerKind::GWG) continue;
    if (config.kind == SamplerKind::PAVG) {
      ChainEnsemble ensemble(*target, cfg.n_chains, cfg.seed);
      burn_in(*target, config, ensemble, cfg, {false, cfg.burn_in, 0.0});
    }
    results.push_back(tune_step_size(*target, config, opt));
    names.push_back(to_string(config.kind));
  }
  if (cfg.out.empty()) return results;
  auto out = open_out(cfg.out + "/tune.csv");
  out << "sampler,value,mean_l1_jump,best\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    for (std::size_t v = 0; v < results[i].values.size(); ++v)
      out << names[i] << ',' << results[i].values[v] << ',' << results[i].mean_jumps[v] << ','
          << (results[i].values[v] == results[i].best) << '\n';
  write_metadata(cfg.out + "/tune.csv", cfg);
  return results;
}

}  // namespace dgs
