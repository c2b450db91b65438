#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gaussphase/errors.hpp"
#include "gaussphase/fisher.hpp"
#include "gaussphase/gaussian_core.hpp"
#include "gaussphase/measurement.hpp"
#include "gaussphase/optim.hpp"

namespace gaussphase {

struct ExperimentConfig {
  StateParams state;
  ChannelParams channel;
  double phi_true = 0;
  MeasurementSpec spec;
  int shots_M = 1000;
  int trials = 1000;
  std::uint64_t seed = 0;
  double search_halfwidth = 0.5;
};

struct EstimationReport {
  double mse = 0;
  double bias = 0;
  double cr_bound = 0;
  double saturation_ratio = 0;
  double fi_used = 0;
  double mse_std_error = 0;
  int boundary_hits = 0;
  std::vector<double> estimates;
};

inline void check_config(const ExperimentConfig& c) {
  check_state(c.state);
  check_channel(c.channel);
  if (c.shots_M < 1 || c.trials < 1) throw Error(ErrorKind::Domain, "shots and trials must be >= 1");
  if (!(c.search_halfwidth > 0 && c.search_halfwidth <= kPi / 2))
    throw Error(ErrorKind::Domain, "search half-width must lie in (0, pi/2]");
}

// Outcome law of the lossy probe after the phase shift phi.
inline OutcomeDistribution encoded_distribution(const StateParams& state, const ChannelParams& channel, double phi,
                                                const MeasurementSpec& spec) {
  const auto lossy = apply_thermal_channel_moments(params_to_moments(state), channel);
  return outcome_distribution(rotate_moments(lossy, phi), spec);
}

// Sum and scatter of a record; the Gaussian log-likelihood depends on the data only through these.
struct SufficientStats {
  int count = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd scatter;

  explicit SufficientStats(const std::vector<Eigen::VectorXd>& ys) {
    if (ys.empty()) throw Error(ErrorKind::Domain, "empty outcome record");
    const auto dim = ys.front().size();
    sum = Eigen::VectorXd::Zero(dim);
    scatter = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& y : ys) {
      sum += y;
      scatter += y * y.transpose();
    }
    count = static_cast<int>(ys.size());
  }

  double log_likelihood(const OutcomeDistribution& d) const {
    Eigen::LLT<Eigen::MatrixXd> llt(d.cov);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::IllConditioned, "singular outcome covariance");
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d.dim(), d.dim()));
    double logdet = 0;
    for (int i = 0; i < d.dim(); ++i) logdet += 2 * std::log(llt.matrixL()(i, i));
    // sum_i (y_i - mu)^T inv (y_i - mu)
    const double quad = (inv * scatter).trace() - 2 * d.mean.dot(inv * sum) + count * d.mean.dot(inv * d.mean);
    return -0.5 * (quad + count * (logdet + d.dim() * std::log(2 * kPi)));
  }
};

inline double log_likelihood(const std::vector<Eigen::VectorXd>& outcomes, double phi, const StateParams& state,
                             const ChannelParams& channel, const MeasurementSpec& spec) {
  const auto dist = encoded_distribution(state, channel, phi, spec);
  double total = 0;
  for (const auto& y : outcomes) total += dist.log_density(y);
  return total;
}

struct MlResult {
  double phi_hat = 0;
  bool on_boundary = false;
};

inline MlResult ml_estimate_detailed(const std::vector<Eigen::VectorXd>& outcomes, const ExperimentConfig& c) {
  const SufficientStats stats(outcomes);
  auto neg_ll = [&](double phi) {
    return -stats.log_likelihood(encoded_distribution(c.state, c.channel, phi, c.spec));
  };
  constexpr int grid = 200;
  const double lo = c.phi_true - c.search_halfwidth, hi = c.phi_true + c.search_halfwidth;
  const double step = (hi - lo) / (grid - 1);
  int best = 0;
  double best_val = neg_ll(lo);
  for (int i = 1; i < grid; ++i) {
    const double v = neg_ll(lo + i * step);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = std::max(lo, lo + (best - 1) * step), b = std::min(hi, lo + (best + 1) * step);
  MlResult res;
  res.phi_hat = optim::golden_section_min(neg_ll, a, b, 1e-9);
  res.on_boundary = best == 0 || best == grid - 1 || std::abs(res.phi_hat - lo) < 1e-8 ||
                    std::abs(res.phi_hat - hi) < 1e-8;
  return res;
}

inline double ml_estimate(const std::vector<Eigen::VectorXd>& outcomes, const ExperimentConfig& c) {
  return ml_estimate_detailed(outcomes, c).phi_hat;
}

inline double experiment_fi(const ExperimentConfig& c) {
  return gaussian_fi(apply_thermal_channel(c.state, c.channel), c.phi_true, c.spec);
}

inline EstimationReport run_experiment(const ExperimentConfig& c) {
  check_config(c);
  const auto dist = encoded_distribution(c.state, c.channel, c.phi_true, c.spec);
  EstimationReport rep;
  rep.estimates.resize(c.trials);
  for (int t = 0; t < c.trials; ++t) {
    auto rng = make_engine(c.seed, static_cast<std::uint64_t>(t));
    const auto ys = sample_outcomes(dist, c.shots_M, rng);
    const auto ml = ml_estimate_detailed(ys, c);
    rep.estimates[t] = ml.phi_hat;
    rep.boundary_hits += ml.on_boundary;
  }
  // fixed summation order keeps the report bit-stable
  double sum_err = 0, sum_sq = 0, sum_quart = 0;
  for (double e : rep.estimates) {
    const double err = e - c.phi_true;
    sum_err += err;
    sum_sq += err * err;
    sum_quart += err * err * err * err;
  }
  const double n = c.trials;
  rep.bias = sum_err / n;
  rep.mse = sum_sq / n;
  const double var_sq = std::max(sum_quart / n - rep.mse * rep.mse, 0.0);
  rep.mse_std_error = std::sqrt(var_sq / n);
  rep.fi_used = experiment_fi(c);
  rep.cr_bound = rep.fi_used > 0 ? 1.0 / (c.shots_M * rep.fi_used) : std::numeric_limits<double>::infinity();
  rep.saturation_ratio = c.shots_M * rep.fi_used * rep.mse;
  return rep;
}

}  // namespace gaussphase
