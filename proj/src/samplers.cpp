#include "dgs/samplers.hpp"

#include "dgs/parallel.hpp"
#include "dgs/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace dgs {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

StepOutcome finish(Chain& chain, Vector proposal, Evaluation ev, double log_ratio, bool accept) {
  StepOutcome out;
  out.log_accept_ratio = log_ratio;
  out.accepted = accept;
  if (accept) {
    out.l1_jump = (proposal - chain.state).lpNorm<1>();
    chain.state = std::move(proposal);
    chain.log_f = ev.log_f;
    chain.grad = std::move(ev.grad);
  }
  return out;
}

Vector apply_move(const StateSpace& space, const Vector& s, const SiteMove& move) {
  Vector out = s;
  space.set_option(out, move.site, move.option);
  return out;
}

StepOutcome local_step(const Target& target, Chain& chain, std::size_t radius, bool ordinal) {
  const auto& space = target.space();
  const auto fwd = ordinal ? build_ordinal_gwg(space, chain.state, chain.grad, radius)
                           : build_gwg(space, chain.state, chain.grad);
  const auto pick = fwd.sample(chain.rng);
  const auto& move = fwd.moves()[pick];
  const auto back_option = space.option_at(chain.state, move.site);
  Vector proposal = apply_move(space, chain.state, move);
  auto ev = target.evaluate(proposal);
  double log_ratio = kNegInf;
  if (std::isfinite(ev.log_f)) {
    const auto rev = ordinal ? build_ordinal_gwg(space, proposal, ev.grad, radius)
                             : build_gwg(space, proposal, ev.grad);
    const auto back = rev.find(move.site, back_option);
    log_ratio = mh_log_ratio(ev.log_f, chain.log_f, back ? rev.log_prob(*back) : kNegInf, fwd.log_prob(pick));
  }
  const bool accept = mh_accept(log_ratio, chain.rng);
  return finish(chain, std::move(proposal), std::move(ev), log_ratio, accept);
}

double gaussian_log_ratio(const Vector& z, const Vector& mean_new, const Vector& mean_old) {
  return -0.5 * ((z - mean_new).squaredNorm() - (z - mean_old).squaredNorm());
}

Vector standard_normal(Eigen::Index n, Rng& rng) {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = rng.normal();
  return out;
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Gibbs: return "gibbs";
    case SamplerKind::GWG: return "gwg";
    case SamplerKind::OrdinalGWG: return "ordinal-gwg";
    case SamplerKind::MHUniform: return "mh-uniform";
    case SamplerKind::NCG: return "ncg";
    case SamplerKind::AVG: return "avg";
    case SamplerKind::PAVG: return "pavg";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  std::replace(n.begin(), n.end(), '_', '-');
  for (auto k : {SamplerKind::Gibbs, SamplerKind::GWG, SamplerKind::OrdinalGWG, SamplerKind::MHUniform,
                 SamplerKind::NCG, SamplerKind::AVG, SamplerKind::PAVG})
    if (to_string(k) == n) return k;
  if (n == "gwg-ordinal") return SamplerKind::OrdinalGWG;
  if (n == "mhuniform" || n == "uniform") return SamplerKind::MHUniform;
  throw ParameterError("unknown sampler '" + name + "'");
}

void SamplerConfig::validate() const {
  switch (kind) {
    case SamplerKind::NCG:
    case SamplerKind::AVG:
      if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError(to_string(kind) + " needs eps > 0");
      break;
    case SamplerKind::PAVG:
      if (!preconditioner) throw ParameterError("pavg needs a preconditioner");
      if (!preconditioner->fresh()) throw StaleCacheError("preconditioner changed since the last refresh_sqrt()");
      break;
    case SamplerKind::OrdinalGWG:
    case SamplerKind::MHUniform:
      if (radius == 0) throw ParameterError(to_string(kind) + " needs radius >= 1");
      break;
    case SamplerKind::Gibbs:
      if (scan == GibbsScan::Random && gibbs_updates == 0) throw ParameterError("gibbs needs at least one update");
      break;
    case SamplerKind::GWG:
      break;
  }
}

double mh_log_ratio(double log_f_new, double log_f_old, double log_q_rev, double log_q_fwd, double log_aux_ratio) {
  return log_f_new - log_f_old + log_q_rev - log_q_fwd + log_aux_ratio;
}

bool mh_accept(double log_ratio, Rng& rng) {
  const double u = rng.uniform();
  if (std::isnan(log_ratio)) return false;
  return std::log(u) < log_ratio;
}

bool mh_accept(double log_f_new, double log_f_old, double log_q_rev, double log_q_fwd, double log_aux_ratio,
               Rng& rng) {
  return mh_accept(mh_log_ratio(log_f_new, log_f_old, log_q_rev, log_q_fwd, log_aux_ratio), rng);
}

StepOutcome ncg_step(const Target& target, Chain& chain, double eps) {
  const auto& space = target.space();
  const auto fwd = build_ncg(space, chain.state, chain.grad, eps);
  Vector proposal = fwd.sample(chain.rng);
  auto ev = target.evaluate(proposal);
  double log_ratio = kNegInf;
  if (std::isfinite(ev.log_f)) {
    const auto rev = build_ncg(space, proposal, ev.grad, eps);
    log_ratio = mh_log_ratio(ev.log_f, chain.log_f, rev.log_pmf(chain.state), fwd.log_pmf(proposal));
  }
  const bool accept = mh_accept(log_ratio, chain.rng);
  return finish(chain, std::move(proposal), std::move(ev), log_ratio, accept);
}

StepOutcome avg_step(const Target& target, Chain& chain, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("step size eps must be positive and finite");
  const auto& space = target.space();
  const double scale = std::sqrt(2.0 / eps);
  const Vector mean_old = scale * chain.state;
  const Vector z = mean_old + standard_normal(chain.state.size(), chain.rng);
  const auto fwd = build_avg(space, chain.state, chain.grad, z, eps);
  Vector proposal = fwd.sample(chain.rng);
  auto ev = target.evaluate(proposal);
  double log_ratio = kNegInf;
  if (std::isfinite(ev.log_f)) {
    const auto rev = build_avg(space, proposal, ev.grad, z, eps);
    const Vector mean_new = scale * proposal;
    log_ratio = mh_log_ratio(ev.log_f, chain.log_f, rev.log_pmf(chain.state), fwd.log_pmf(proposal),
                             gaussian_log_ratio(z, mean_new, mean_old));
  }
  const bool accept = mh_accept(log_ratio, chain.rng);
  return finish(chain, std::move(proposal), std::move(ev), log_ratio, accept);
}

StepOutcome pavg_step(const Target& target, Chain& chain, const PreconditionerState& pre) {
  if (pre.isotropic()) return avg_step(target, chain, pre.eps());
  const auto& space = target.space();
  const Matrix& root = pre.sqrt_shifted();
  const Vector mean_old = root * chain.state;
  const Vector z = mean_old + standard_normal(chain.state.size(), chain.rng);
  const auto fwd = build_pavg(space, chain.state, chain.grad, z, pre);
  Vector proposal = fwd.sample(chain.rng);
  auto ev = target.evaluate(proposal);
  double log_ratio = kNegInf;
  if (std::isfinite(ev.log_f)) {
    const auto rev = build_pavg(space, proposal, ev.grad, z, pre);
    const Vector mean_new = root * proposal;
    log_ratio = mh_log_ratio(ev.log_f, chain.log_f, rev.log_pmf(chain.state), fwd.log_pmf(proposal),
                             gaussian_log_ratio(z, mean_new, mean_old));
  }
  const bool accept = mh_accept(log_ratio, chain.rng);
  return finish(chain, std::move(proposal), std::move(ev), log_ratio, accept);
}

StepOutcome gwg_step(const Target& target, Chain& chain) { return local_step(target, chain, 0, false); }

StepOutcome ordinal_gwg_step(const Target& target, Chain& chain, std::size_t radius) {
  return local_step(target, chain, radius, true);
}

StepOutcome mh_uniform_step(const Target& target, Chain& chain, std::size_t radius) {
  const auto& space = target.space();
  const UniformBallProposal fwd(space, chain.state, radius);
  Vector proposal = fwd.sample(chain.rng);
  auto ev = target.evaluate(proposal);
  double log_ratio = kNegInf;
  if (std::isfinite(ev.log_f)) {
    const UniformBallProposal rev(space, proposal, radius);
    log_ratio = mh_log_ratio(ev.log_f, chain.log_f, -rev.log_support_size(), -fwd.log_support_size());
  }
  const bool accept = mh_accept(log_ratio, chain.rng);
  return finish(chain, std::move(proposal), std::move(ev), log_ratio, accept);
}

StepOutcome gibbs_step(const Target& target, Chain& chain, GibbsScan scan, std::size_t updates) {
  const auto& space = target.space();
  const auto sites = target.sites();
  const auto k = space.support_size();
  std::vector<double> logits(k);
  const Vector start = chain.state;
  const std::size_t n = scan == GibbsScan::Systematic ? sites : updates;
  for (std::size_t t = 0; t < n; ++t) {
    const auto site = scan == GibbsScan::Systematic ? t : chain.rng.uniform_index(sites);
    target.site_log_f(chain.state, site, logits);
    const double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& l : logits) {
      l = std::exp(l - mx);
      total += l;
    }
    double u = chain.rng.uniform() * total;
    std::size_t chosen = k - 1;
    for (std::size_t o = 0; o + 1 < k; ++o) {
      u -= logits[o];
      if (u < 0.0) {
        chosen = o;
        break;
      }
    }
    space.set_option(chain.state, site, chosen);
  }
  StepOutcome out;
  out.accepted = true;
  out.l1_jump = (chain.state - start).lpNorm<1>();
  if (out.l1_jump > 0.0) {
    auto ev = target.evaluate(chain.state);
    chain.log_f = ev.log_f;
    chain.grad = std::move(ev.grad);
  }
  return out;
}

StepOutcome step(const Target& target, const SamplerConfig& config, Chain& chain) {
  switch (config.kind) {
    case SamplerKind::Gibbs: return gibbs_step(target, chain, config.scan, config.gibbs_updates);
    case SamplerKind::GWG: return gwg_step(target, chain);
    case SamplerKind::OrdinalGWG: return ordinal_gwg_step(target, chain, config.radius);
    case SamplerKind::MHUniform: return mh_uniform_step(target, chain, config.radius);
    case SamplerKind::NCG: return ncg_step(target, chain, config.eps);
    case SamplerKind::AVG: return avg_step(target, chain, config.eps);
    case SamplerKind::PAVG:
      if (!config.preconditioner) throw ParameterError("pavg needs a preconditioner");
      return pavg_step(target, chain, *config.preconditioner);
  }
  throw ParameterError("unknown sampler kind");
}

double step_cost(const SamplerConfig& config, std::size_t sites, const CostModel& costs) {
  switch (config.kind) {
    case SamplerKind::NCG:
    case SamplerKind::AVG:
    case SamplerKind::PAVG: return costs.gradient_step;
    case SamplerKind::GWG:
    case SamplerKind::OrdinalGWG: return costs.local_step;
    case SamplerKind::MHUniform: return costs.uniform_step;
    case SamplerKind::Gibbs:
      return costs.gibbs_site *
             static_cast<double>(config.scan == GibbsScan::Systematic ? sites : config.gibbs_updates);
  }
  return 1.0;
}

// ---------------------------------------------------------------------------

double Trace::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  std::size_t n = 0;
  for (auto a : accepted) n += a;
  return static_cast<double>(n) / static_cast<double>(accepted.size());
}

double Trace::mean_l1_jump() const {
  if (l1_jump.empty()) return 0.0;
  double total = 0.0;
  for (double j : l1_jump) total += j;
  return total / static_cast<double>(l1_jump.size());
}

double Trace::step_mean_l1_jump(std::size_t step) const {
  double total = 0.0;
  for (std::size_t c = 0; c < n_chains; ++c) total += l1_jump[index(step, c)];
  return n_chains ? total / static_cast<double>(n_chains) : 0.0;
}

void Trace::write_csv(std::ostream& out) const {
  out << "step,chain,accepted,log_accept_ratio,l1_jump\n";
  out.precision(17);
  for (std::size_t t = 0; t < n_steps; ++t)
    for (std::size_t c = 0; c < n_chains; ++c) {
      const auto i = index(t, c);
      out << t << ',' << c << ',' << int(accepted[i]) << ',' << log_accept_ratio[i] << ',' << l1_jump[i] << '\n';
    }
}

Trace run_chain(const Target& target, const SamplerConfig& config, ChainEnsemble& ensemble,
                const RunOptions& options) {
  config.validate();
  Trace trace;
  trace.n_chains = ensemble.size();
  trace.n_steps = options.record ? options.n_steps : 0;
  const auto cells = trace.n_steps * trace.n_chains;
  trace.accepted.assign(cells, 0);
  trace.log_accept_ratio.assign(cells, 0.0);
  trace.l1_jump.assign(cells, 0.0);

  std::size_t done = 0;
  while (done < options.n_steps) {
    std::size_t segment = options.n_steps - done;
    if (options.callback_every) segment = std::min(segment, options.callback_every - done % options.callback_every);
    if (options.snapshot_every)
      segment = std::min(segment, options.snapshot_every - done % options.snapshot_every);
    const std::size_t first = done;
    parallel_for(ensemble.size(), options.threads, [&](std::size_t c) {
      auto& chain = ensemble[c];
      for (std::size_t t = first; t < first + segment; ++t) {
        const auto out = step(target, config, chain);
        if (options.record) {
          const auto i = trace.index(t, c);
          trace.accepted[i] = out.accepted;
          trace.log_accept_ratio[i] = out.log_accept_ratio;
          trace.l1_jump[i] = out.l1_jump;
        }
      }
    });
    done += segment;
    ensemble.advance(segment);
    if (options.snapshot_every && done % options.snapshot_every == 0) {
      trace.snapshot_steps.push_back(done);
      trace.snapshots.push_back(ensemble.states());
    }
    if (options.callback_every && options.on_checkpoint && done % options.callback_every == 0)
      options.on_checkpoint(done, ensemble);
  }
  return trace;
}

}  // namespace dgs
