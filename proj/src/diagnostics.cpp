#include "dgs/diagnostics.hpp"

#include "dgs/parallel.hpp"
#include "dgs/proposals.hpp"

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <sstream>

namespace dgs {
namespace {

bool is_binary_scalar(const StateSpace& space) { return !space.is_categorical() && space.support_size() == 2; }

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

// ---------------------------------------------------------------------------

ExactDistribution exact_distribution(const Target& target, std::size_t cap) {
  const auto& space = target.space();
  const auto sites = target.sites();
  const auto n = state_count(space, sites);
  if (n > cap) throw CapacityError("exact distribution needs " + std::to_string(n) + " states, cap is " +
                                   std::to_string(cap));
  const auto dim = static_cast<Eigen::Index>(target.dim());
  const auto k = static_cast<Eigen::Index>(space.support_size());
  Vector log_f(static_cast<Eigen::Index>(n));
  for_each_state(space, sites, cap, [&](const Vector& s, std::size_t i) {
    log_f[static_cast<Eigen::Index>(i)] = target.log_f(s);
  });
  ExactDistribution out;
  out.sites = sites;
  out.log_z = log_sum_exp(log_f);
  out.probs = (log_f.array() - out.log_z).exp().matrix();
  out.marginals = Matrix::Zero(static_cast<Eigen::Index>(sites), k);
  out.mean = Vector::Zero(dim);
  Matrix second = Matrix::Zero(dim, dim);
  const bool binary = is_binary_scalar(space);
  if (binary) {
    out.upper = Vector::Zero(dim);
    out.upper_pair = Matrix::Zero(dim, dim);
  }
  for_each_state(space, sites, cap, [&](const Vector& s, std::size_t i) {
    const double p = out.probs[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < sites; ++j)
      out.marginals(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(space.option_at(s, j))) += p;
    out.mean += p * s;
    second.noalias() += p * s * s.transpose();
    if (binary) {
      const Vector on = (s.array() == space.values()[1]).cast<double>();
      out.upper += p * on;
      out.upper_pair.noalias() += p * on * on.transpose();
    }
  });
  out.covariance = second - out.mean * out.mean.transpose();
  return out;
}

namespace {

struct StateTable {
  std::vector<Vector> states;
  std::vector<Evaluation> evals;
};

StateTable tabulate(const Target& target, std::size_t cap) {
  StateTable table;
  for_each_state(target.space(), target.sites(), cap, [&](const Vector& s, std::size_t) {
    table.states.push_back(s);
    table.evals.push_back(target.evaluate(s));
  });
  return table;
}

double acceptance(double log_ratio) {
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

Matrix gibbs_site_matrix(const Target& target, const StateTable& table, std::size_t site) {
  const auto& space = target.space();
  const auto n = static_cast<Eigen::Index>(table.states.size());
  const auto k = space.support_size();
  Matrix p = Matrix::Zero(n, n);
  std::vector<double> logits(k);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& s = table.states[static_cast<std::size_t>(a)];
    target.site_log_f(s, site, logits);
    const double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double l : logits) total += std::exp(l - mx);
    Vector next = s;
    for (std::size_t o = 0; o < k; ++o) {
      space.set_option(next, site, o);
      p(a, static_cast<Eigen::Index>(state_index(space, next))) += std::exp(logits[o] - mx) / total;
    }
  }
  return p;
}

}  // namespace

Matrix transition_matrix(const Target& target, const SamplerConfig& config, const TransitionOptions& options) {
  config.validate();
  const auto& space = target.space();
  const auto sites = target.sites();
  const auto table = tabulate(target, options.cap);
  const auto n = static_cast<Eigen::Index>(table.states.size());
  const bool drop_q = options.ignore_proposal_ratio;

  if (config.kind == SamplerKind::Gibbs) {
    if (config.scan == GibbsScan::Systematic) {
      Matrix p = Matrix::Identity(n, n);
      for (std::size_t i = 0; i < sites; ++i) p = p * gibbs_site_matrix(target, table, i);
      return p;
    }
    Matrix single = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < sites; ++i) single += gibbs_site_matrix(target, table, i);
    single /= static_cast<double>(sites);
    Matrix p = Matrix::Identity(n, n);
    for (std::size_t u = 0; u < config.gibbs_updates; ++u) p = p * single;
    return p;
  }

  Matrix p = Matrix::Zero(n, n);
  switch (config.kind) {
    case SamplerKind::NCG: {
      std::vector<FactorizedProposal> props;
      props.reserve(table.states.size());
      for (Eigen::Index a = 0; a < n; ++a)
        props.push_back(build_ncg(space, table.states[a], table.evals[a].grad, config.eps));
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
          if (a == b) continue;
          const double fwd = props[a].log_pmf(table.states[b]);
          const double rev = props[b].log_pmf(table.states[a]);
          const double lr = drop_q ? table.evals[b].log_f - table.evals[a].log_f
                                   : mh_log_ratio(table.evals[b].log_f, table.evals[a].log_f, rev, fwd);
          p(a, b) = std::exp(fwd) * acceptance(lr);
        }
      break;
    }
    case SamplerKind::GWG:
    case SamplerKind::OrdinalGWG: {
      const bool ordinal = config.kind == SamplerKind::OrdinalGWG;
      std::vector<SingleSiteProposal> props;
      props.reserve(table.states.size());
      for (Eigen::Index a = 0; a < n; ++a)
        props.push_back(ordinal ? build_ordinal_gwg(space, table.states[a], table.evals[a].grad, config.radius)
                                : build_gwg(space, table.states[a], table.evals[a].grad));
      for (Eigen::Index a = 0; a < n; ++a) {
        const auto& fwd = props[a];
        for (std::size_t m = 0; m < fwd.moves().size(); ++m) {
          const auto& move = fwd.moves()[m];
          Vector next = table.states[a];
          space.set_option(next, move.site, move.option);
          const auto b = static_cast<Eigen::Index>(state_index(space, next));
          const auto back = props[b].find(move.site, space.option_at(table.states[a], move.site));
          const double rev = back ? props[b].log_prob(*back) : -std::numeric_limits<double>::infinity();
          const double lr = drop_q ? table.evals[b].log_f - table.evals[a].log_f
                                   : mh_log_ratio(table.evals[b].log_f, table.evals[a].log_f, rev, fwd.log_prob(m));
          p(a, b) += std::exp(fwd.log_prob(m)) * acceptance(lr);
        }
      }
      break;
    }
    case SamplerKind::MHUniform: {
      std::vector<UniformBallProposal> balls;
      balls.reserve(table.states.size());
      for (Eigen::Index a = 0; a < n; ++a) balls.emplace_back(space, table.states[a], config.radius);
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
          if (a == b || !balls[a].contains(table.states[b])) continue;
          const double fwd = -balls[a].log_support_size();
          const double rev = -balls[b].log_support_size();
          const double lr = drop_q ? table.evals[b].log_f - table.evals[a].log_f
                                   : mh_log_ratio(table.evals[b].log_f, table.evals[a].log_f, rev, fwd);
          p(a, b) = std::exp(fwd) * acceptance(lr);
        }
      break;
    }
    default:
      throw ParameterError(to_string(config.kind) + " acts on an extended space and has no finite transition matrix");
  }
  for (Eigen::Index a = 0; a < n; ++a) {
    p(a, a) = 0.0;
    p(a, a) = 1.0 - p.row(a).sum();
  }
  return p;
}

double stationarity_error(const Matrix& p, const Vector& pi) {
  return (p.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

double detailed_balance_error(const Matrix& p, const Vector& pi) {
  const Matrix flow = pi.asDiagonal() * p;
  return (flow - flow.transpose()).cwiseAbs().maxCoeff();
}

double row_sum_error(const Matrix& p) { return (p.rowwise().sum().array() - 1.0).abs().maxCoeff(); }

// ---------------------------------------------------------------------------

ChainStatistics::ChainStatistics(const StateSpace& space, std::size_t dim, bool covariance, bool pairs)
    : space_(&space), dim_(dim), track_cov_(covariance), track_pairs_(pairs) {
  if (pairs && !is_binary_scalar(space)) throw ParameterError("pair statistics need a binary space");
  const auto d = static_cast<Eigen::Index>(dim);
  counts_ = Matrix::Zero(static_cast<Eigen::Index>(space.site_count(dim)),
                         static_cast<Eigen::Index>(space.support_size()));
  if (track_cov_) {
    sum_ = Vector::Zero(d);
    outer_ = Matrix::Zero(d, d);
  }
  if (track_pairs_) pair_counts_ = Matrix::Zero(d, d);
}

void ChainStatistics::add(const Vector& s) {
  if (pending_weight_ > 0.0 && s == pending_) {
    pending_weight_ += 1.0;
    return;
  }
  flush();
  pending_ = s;
  pending_weight_ = 1.0;
}

void ChainStatistics::flush() const {
  if (pending_weight_ == 0.0) return;
  const double w = pending_weight_;
  const auto& s = pending_;
  for (std::size_t j = 0; j < static_cast<std::size_t>(counts_.rows()); ++j)
    counts_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(space_->option_at(s, j))) += w;
  if (track_cov_) {
    if (total_ == 0.0) shift_ = s;
    const Vector c = s - shift_;
    sum_ += w * c;
    outer_.selfadjointView<Eigen::Lower>().rankUpdate(c, w);
  }
  if (track_pairs_) {
    const double up = space_->values()[1];
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] == up) active.push_back(i);
    for (auto a : active)
      for (auto b : active) pair_counts_(a, b) += w;
  }
  total_ += w;
  pending_weight_ = 0.0;
}

double ChainStatistics::count() const { return total_ + pending_weight_; }

Matrix ChainStatistics::counts() const {
  flush();
  return counts_;
}

Matrix ChainStatistics::marginals() const {
  flush();
  return total_ > 0.0 ? Matrix(counts_ / total_) : counts_;
}

Vector ChainStatistics::mean() const {
  if (!track_cov_) throw ParameterError("covariance tracking is off");
  flush();
  if (total_ == 0.0) return Vector::Zero(static_cast<Eigen::Index>(dim_));
  return shift_ + sum_ / total_;
}

Matrix ChainStatistics::covariance() const {
  if (!track_cov_) throw ParameterError("covariance tracking is off");
  flush();
  const auto d = static_cast<Eigen::Index>(dim_);
  if (total_ < 2.0) return Matrix::Zero(d, d);
  Matrix full = outer_.selfadjointView<Eigen::Lower>();
  Matrix cov = (full - sum_ * sum_.transpose() / total_) / (total_ - 1.0);
  return 0.5 * (cov + cov.transpose());
}

Vector ChainStatistics::upper() const {
  if (!track_pairs_) throw ParameterError("pair tracking is off");
  flush();
  return total_ > 0.0 ? Vector(pair_counts_.diagonal() / total_) : Vector(pair_counts_.diagonal());
}

Matrix ChainStatistics::upper_pair() const {
  if (!track_pairs_) throw ParameterError("pair tracking is off");
  flush();
  return total_ > 0.0 ? Matrix(pair_counts_ / total_) : pair_counts_;
}

// ---------------------------------------------------------------------------

double marginal_kl(const Matrix& empirical, const Matrix& exact, double n_samples) {
  if (empirical.rows() != exact.rows() || empirical.cols() != exact.cols())
    throw DimensionError("marginal tables differ in shape");
  if (empirical.rows() == 0) return 0.0;
  const double floor = 1.0 / (std::max(1.0, n_samples) * static_cast<double>(exact.cols()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < empirical.rows(); ++i)
    for (Eigen::Index o = 0; o < empirical.cols(); ++o) {
      const double q = empirical(i, o);
      if (q <= 0.0) continue;
      const double p = exact(i, o) > 0.0 ? exact(i, o) : floor;
      total += q * (std::log(q) - std::log(p));
    }
  return std::max(0.0, total / static_cast<double>(empirical.rows()));
}

double marginal_abs_error(const Vector& q_upper, const Vector& p_upper) {
  if (q_upper.size() != p_upper.size()) throw DimensionError("marginal vectors differ in length");
  if (q_upper.size() == 0) return 0.0;
  return (q_upper - p_upper).cwiseAbs().mean();
}

double covariance_error(const Matrix& cov_q, const Matrix& cov_p) {
  if (cov_q.rows() != cov_p.rows() || cov_q.cols() != cov_p.cols())
    throw DimensionError("covariance matrices differ in shape");
  return (cov_q - cov_p).norm();
}

double pairwise_error(const Vector& q_upper, const Matrix& q_pair, const Vector& p_upper, const Matrix& p_pair) {
  const auto d = q_upper.size();
  if (p_upper.size() != d || q_pair.rows() != d || q_pair.cols() != d || p_pair.rows() != d || p_pair.cols() != d)
    throw DimensionError("pairwise tables differ in shape");
  if (d == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double q11 = q_pair(i, j), p11 = p_pair(i, j);
      const double q10 = q_upper[i] - q11, p10 = p_upper[i] - p11;
      const double q01 = q_upper[j] - q11, p01 = p_upper[j] - p11;
      const double q00 = 1.0 - q_upper[i] - q_upper[j] + q11;
      const double p00 = 1.0 - p_upper[i] - p_upper[j] + p11;
      total += std::abs(q11 - p11) + std::abs(q10 - p10) + std::abs(q01 - p01) + std::abs(q00 - p00);
    }
  return total / static_cast<double>(d * d);
}

// ---------------------------------------------------------------------------

Vector autocorrelation(const Vector& trace) {
  const auto n = trace.size();
  if (n == 0) return {};
  const double mean = trace.mean();
  std::size_t m = 1;
  while (m < static_cast<std::size_t>(2 * n)) m <<= 1;
  std::vector<double> padded(m, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(i)] = trace[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& c : spectrum) c = std::norm(c);
  std::vector<double> acov;
  fft.inv(acov, spectrum);
  Vector rho(n);
  const double c0 = acov[0];
  for (Eigen::Index k = 0; k < n; ++k) rho[k] = c0 > 0.0 ? acov[static_cast<std::size_t>(k)] / c0 : 0.0;
  return rho;
}

double ess(const Vector& trace) {
  const auto n = trace.size();
  if (n < 2) return static_cast<double>(n);
  if ((trace.array() == trace[0]).all()) {
    std::clog << "warning: constant trace, ESS set to 0\n";
    return 0.0;
  }
  const Vector rho = autocorrelation(trace);
  double sum = 0.0;
  for (Eigen::Index k = 0; 2 * k < n; ++k) {
    const double pair = rho[2 * k] + (2 * k + 1 < n ? rho[2 * k + 1] : 0.0);
    if (pair <= 0.0) break;
    sum += pair;
  }
  // capped at n log10(n) for strongly antithetic traces
  const double tau = -1.0 + 2.0 * sum;
  const double min_tau = 1.0 / std::max(1.0, std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / std::max(tau, min_tau);
}

Vector ess(const Matrix& traces) {
  Vector out(traces.cols());
  for (Eigen::Index c = 0; c < traces.cols(); ++c) out[c] = ess(Vector(traces.col(c)));
  return out;
}

Vector l1_statistic(const Matrix& states, const Vector& reference) {
  return (states.rowwise() - reference.transpose()).cwiseAbs().rowwise().sum();
}

// ---------------------------------------------------------------------------

namespace {

bool uses_radius(SamplerKind kind) { return kind == SamplerKind::OrdinalGWG || kind == SamplerKind::MHUniform; }

bool uses_eps(SamplerKind kind) {
  return kind == SamplerKind::NCG || kind == SamplerKind::AVG || kind == SamplerKind::PAVG;
}

SamplerConfig with_value(const Target& target, const SamplerConfig& base, double value) {
  SamplerConfig c = base;
  if (uses_radius(base.kind)) {
    c.radius = static_cast<std::size_t>(value);
  } else {
    c.eps = value;
    if (base.kind == SamplerKind::PAVG) {
      auto pre = base.preconditioner ? std::make_shared<PreconditionerState>(*base.preconditioner)
                                     : std::make_shared<PreconditionerState>(target.dim(), value);
      pre->set_eps(value);
      pre->refresh_sqrt();
      c.preconditioner = pre;
    }
  }
  return c;
}

}  // namespace

TuneResult evaluate_step_sizes(const Target& target, const SamplerConfig& base, const std::vector<double>& values,
                               const TuneOptions& options) {
  if (values.empty()) throw ParameterError("no candidate step sizes");
  if (!uses_radius(base.kind) && !uses_eps(base.kind))
    throw ParameterError(to_string(base.kind) + " has no step size to tune");
  TuneResult result;
  result.best_jump = -1.0;
  for (double v : values) {
    ChainEnsemble ensemble(target, options.n_chains, options.seed);
    RunOptions run;
    run.n_steps = options.n_steps;
    run.threads = options.threads;
    const auto trace = run_chain(target, with_value(target, base, v), ensemble, run);
    const double jump = trace.mean_l1_jump();
    result.values.push_back(v);
    result.mean_jumps.push_back(jump);
    if (jump > result.best_jump) {
      result.best_jump = jump;
      result.best = v;
    }
  }
  return result;
}

TuneResult tune_step_size(const Target& target, const SamplerConfig& base, const TuneOptions& options) {
  std::vector<double> coarse;
  std::vector<double> fine;
  if (uses_radius(base.kind)) {
    const auto max_radius = std::max<std::size_t>(1, target.space().support_size() - 1);
    for (auto r : options.coarse_radii)
      if (r >= 1 && r <= max_radius) coarse.push_back(static_cast<double>(r));
    if (coarse.empty()) coarse.push_back(static_cast<double>(max_radius));
    const auto first = evaluate_step_sizes(target, base, coarse, options);
    const auto best = static_cast<std::size_t>(first.best);
    const auto lo = best > options.radius_refine ? best - options.radius_refine : 1;
    const auto hi = std::min(max_radius, best + options.radius_refine);
    for (auto r = lo; r <= hi; ++r)
      if (std::find(coarse.begin(), coarse.end(), static_cast<double>(r)) == coarse.end())
        fine.push_back(static_cast<double>(r));
    auto result = first;
    if (!fine.empty()) {
      const auto second = evaluate_step_sizes(target, base, fine, options);
      result.values.insert(result.values.end(), second.values.begin(), second.values.end());
      result.mean_jumps.insert(result.mean_jumps.end(), second.mean_jumps.begin(), second.mean_jumps.end());
      if (second.best_jump > result.best_jump) {
        result.best = second.best;
        result.best_jump = second.best_jump;
      }
    }
    return result;
  }
  for (int e = options.min_exponent; e <= options.max_exponent; ++e) coarse.push_back(std::pow(10.0, e));
  const auto first = evaluate_step_sizes(target, base, coarse, options);
  const double order = first.best;
  // deciles of the decade below and the decade above the best power of ten
  for (int m = 2; m <= 9; ++m) fine.push_back(m * order / 10.0);
  for (int m = 2; m <= 9; ++m) fine.push_back(m * order);
  auto result = first;
  const auto second = evaluate_step_sizes(target, base, fine, options);
  result.values.insert(result.values.end(), second.values.begin(), second.values.end());
  result.mean_jumps.insert(result.mean_jumps.end(), second.mean_jumps.begin(), second.mean_jumps.end());
  if (second.best_jump > result.best_jump) {
    result.best = second.best;
    result.best_jump = second.best_jump;
  }
  return result;
}

// ---------------------------------------------------------------------------

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  s.lo = s.mean - 1.96 * s.se;
  s.hi = s.mean + 1.96 * s.se;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const auto j = std::min(i + 1, sorted.size() - 1);
    return sorted[i] + (pos - static_cast<double>(i)) * (sorted[j] - sorted[i]);
  };
  s.median = quantile(0.5);
  s.q25 = quantile(0.25);
  s.q75 = quantile(0.75);
  return s;
}

namespace {

nlohmann::json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"se", s.se},         {"ci_lo", s.lo}, {"ci_hi", s.hi},
          {"median", s.median}, {"q25", s.q25}, {"q75", s.q75}};
}

}  // namespace

std::string to_json(const MetricReport& r) {
  nlohmann::json j{{"experiment", r.experiment},
                   {"sampler", r.sampler},
                   {"checkpoint", r.checkpoint},
                   {"steps", r.steps},
                   {"budget", r.budget},
                   {"marginal_error", summary_json(r.marginal_error)},
                   {"acceptance_rate", r.acceptance_rate},
                   {"mean_l1_jump", r.mean_l1_jump}};
  if (r.covariance_error) j["covariance_error"] = summary_json(*r.covariance_error);
  if (r.pairwise_error) j["pairwise_error"] = summary_json(*r.pairwise_error);
  if (r.ess) j["ess"] = summary_json(*r.ess);
  return j.dump();
}

std::vector<std::string> metric_csv_header() {
  return {"experiment",     "sampler",       "checkpoint",  "steps",          "budget",
          "marginal_error", "marginal_se",   "second_error", "second_se",     "ess_median",
          "ess_q25",        "ess_q75",       "acceptance_rate", "mean_l1_jump"};
}

std::string metric_csv_row(const MetricReport& r) {
  std::ostringstream out;
  out.precision(10);
  const Summary* second = r.covariance_error ? &*r.covariance_error : r.pairwise_error ? &*r.pairwise_error : nullptr;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << r.experiment << ',' << r.sampler << ',' << r.checkpoint << ',' << r.steps << ',' << r.budget << ','
      << r.marginal_error.mean << ',' << r.marginal_error.se << ',' << (second ? second->mean : nan) << ','
      << (second ? second->se : nan) << ',' << (r.ess ? r.ess->median : nan) << ',' << (r.ess ? r.ess->q25 : nan)
      << ',' << (r.ess ? r.ess->q75 : nan) << ',' << r.acceptance_rate << ',' << r.mean_l1_jump;
  return out.str();
}

}  // namespace dgs
