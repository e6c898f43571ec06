#include "dgs/learning.hpp"

#include "dgs/chains.hpp"
#include "dgs/parallel.hpp"

#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>

namespace dgs {

void PcdConfig::validate() const {
  if (n_batch == 0 || n_batch > n_buffer) throw ParameterError("need 0 < n_batch <= n_buffer");
  if (k_steps == 0) throw ParameterError("need at least one MCMC step per update");
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(l1_strength >= 0.0)) throw ParameterError("l1 strength must be non-negative");
  if (sampler.kind != SamplerKind::PAVG || !model_preconditioner) sampler.validate();
}

Matrix ising_coupling_gradient(const Vector& s) {
  Matrix g = 0.5 * s * s.transpose();
  g.diagonal().setZero();
  return g;
}

Matrix pcd_gradient(const Matrix& coupling, const Matrix& data_batch, const Matrix& buffer_batch, double l1_strength) {
  if (data_batch.rows() != buffer_batch.rows() || data_batch.rows() == 0)
    throw DimensionError("data and buffer batches must have the same non-zero size");
  const double n = static_cast<double>(data_batch.rows());
  Matrix g = 0.5 * (data_batch.transpose() * data_batch - buffer_batch.transpose() * buffer_batch) / n;
  g -= l1_strength * coupling.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
  g.diagonal().setZero();
  return 0.5 * (g + g.transpose());
}

Adam::Adam(Eigen::Index rows, Eigen::Index cols, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Matrix::Zero(rows, cols)),
      v_(Matrix::Zero(rows, cols)) {}

Matrix Adam::step(const Matrix& gradient) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * gradient;
  v_ = beta2_ * v_ + (1.0 - beta2_) * gradient.cwiseProduct(gradient);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  return lr_ * ((m_ / c1).array() / ((v_ / c2).array().sqrt() + eps_)).matrix();
}

namespace {

std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
  idx.resize(k);
  return idx;
}

}  // namespace

IsingEstimate pcd_train(const Matrix& data, const Vector& bias, const Matrix& true_coupling, const PcdConfig& config,
                        const std::function<void(const PcdCheckpoint&)>& on_checkpoint) {
  config.validate();
  const auto d = bias.size();
  if (data.cols() != d || true_coupling.rows() != d || true_coupling.cols() != d)
    throw DimensionError("data, bias and coupling dimensions disagree");
  if (static_cast<std::size_t>(data.rows()) < config.n_batch) throw ParameterError("dataset smaller than n_batch");

  Rng rng(config.seed, ~std::uint64_t{0});
  IsingEstimate est;
  est.bias = bias;
  est.coupling = Matrix::Zero(d, d);

  std::vector<Chain> buffer(config.n_buffer);
  const auto space = StateSpace::binary_pm1();
  for (std::size_t i = 0; i < config.n_buffer; ++i) {
    buffer[i].rng = Rng(config.seed, i);
    buffer[i].state = random_state(space, static_cast<std::size_t>(d), buffer[i].rng);
  }

  Adam adam(d, d, config.learning_rate);
  std::size_t accepted = 0;
  std::size_t proposed = 0;
  std::size_t window_accepted = 0;
  std::size_t window_proposed = 0;

  auto checkpoint = [&](std::size_t iter) {
    PcdCheckpoint c;
    c.iteration = iter;
    c.frobenius_error = (est.coupling - true_coupling).norm();
    c.acceptance_rate =
        window_proposed ? static_cast<double>(window_accepted) / static_cast<double>(window_proposed) : 0.0;
    window_accepted = window_proposed = 0;
    est.trace.push_back(c);
    if (on_checkpoint) on_checkpoint(c);
  };
  checkpoint(0);

  for (std::size_t iter = 1; iter <= config.n_iters; ++iter) {
    const IsingModel model(bias, est.coupling);
    SamplerConfig sampler = config.sampler;
    if (sampler.kind == SamplerKind::PAVG && config.model_preconditioner)
      sampler.preconditioner = std::make_shared<PreconditionerState>(est.coupling, 1.0, sampler.eps);

    const auto batch = draw_without_replacement(config.n_buffer, config.n_batch, rng);
    std::vector<std::size_t> accepts(batch.size(), 0);
    parallel_for(batch.size(), config.threads, [&](std::size_t b) {
      Chain& chain = buffer[batch[b]];
      auto ev = model.evaluate(chain.state);
      chain.log_f = ev.log_f;
      chain.grad = std::move(ev.grad);
      for (std::size_t k = 0; k < config.k_steps; ++k) accepts[b] += step(model, sampler, chain).accepted;
    });
    for (auto a : accepts) {
      accepted += a;
      window_accepted += a;
    }
    proposed += batch.size() * config.k_steps;
    window_proposed += batch.size() * config.k_steps;

    Matrix model_batch(static_cast<Eigen::Index>(batch.size()), d);
    for (std::size_t b = 0; b < batch.size(); ++b)
      model_batch.row(static_cast<Eigen::Index>(b)) = buffer[batch[b]].state.transpose();
    const auto rows = draw_without_replacement(static_cast<std::size_t>(data.rows()), config.n_batch, rng);
    Matrix data_batch(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t b = 0; b < rows.size(); ++b)
      data_batch.row(static_cast<Eigen::Index>(b)) = data.row(static_cast<Eigen::Index>(rows[b]));

    const Matrix g = pcd_gradient(est.coupling, data_batch, model_batch, config.l1_strength);
    if (config.optimizer == Optimizer::Adam)
      est.coupling += adam.step(g);
    else
      est.coupling += config.learning_rate * g;
    est.coupling.diagonal().setZero();

    if (config.checkpoint_every && (iter % config.checkpoint_every == 0 || iter == config.n_iters))
      checkpoint(iter);
  }
  est.error = (est.coupling - true_coupling).norm();
  est.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  return est;
}

void write_pcd_trace_csv(std::ostream& out, const std::vector<PcdCheckpoint>& trace) {
  out << "iteration,frobenius_error,acceptance_rate\n";
  out.precision(10);
  for (const auto& c : trace) out << c.iteration << ',' << c.frobenius_error << ',' << c.acceptance_rate << '\n';
}

Matrix generate_ground_truth(const IsingModel& model, const GroundTruthOptions& options) {
  if (options.n_samples == 0) throw ParameterError("need at least one sample");
  const auto d = static_cast<Eigen::Index>(model.dim());
  Matrix out(static_cast<Eigen::Index>(options.n_samples), d);
  if (options.single_chain) {
    ChainEnsemble ens(model, 1, options.seed);
    const auto thin = std::max<std::size_t>(1, options.n_sweeps / options.n_samples);
    const auto burn = options.n_sweeps > thin * options.n_samples ? options.n_sweeps - thin * options.n_samples : 0;
    for (std::size_t t = 0; t < burn; ++t) gibbs_step(model, ens[0], GibbsScan::Systematic);
    for (std::size_t i = 0; i < options.n_samples; ++i) {
      for (std::size_t t = 0; t < thin; ++t) gibbs_step(model, ens[0], GibbsScan::Systematic);
      out.row(static_cast<Eigen::Index>(i)) = ens[0].state.transpose();
    }
    return out;
  }
  ChainEnsemble ens(model, options.n_samples, options.seed);
  parallel_for(options.n_samples, options.threads, [&](std::size_t c) {
    for (std::size_t t = 0; t < options.n_sweeps; ++t) gibbs_step(model, ens[c], GibbsScan::Systematic);
  });
  return ens.states();
}

}  // namespace dgs
