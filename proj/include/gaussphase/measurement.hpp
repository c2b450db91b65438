#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "gaussphase/errors.hpp"
#include "gaussphase/gaussian_core.hpp"

namespace gaussphase {

enum class MeasurementKind { GeneralDyne, Homodyne };

// General-dyne: POVM seeded by the squeezed vacuum S(s e^{i psi})|0>.
// Homodyne: projective measurement of the quadrature at angle psi/2; s is +inf.
struct MeasurementSpec {
  MeasurementKind kind = MeasurementKind::GeneralDyne;
  double s = 0.0;
  double psi = 0.0;

  static MeasurementSpec general_dyne(double s, double psi) {
    if (!(s >= 0) || !std::isfinite(s))
      throw Error(ErrorKind::Domain, "general-dyne squeezing must be finite and >= 0");
    return {MeasurementKind::GeneralDyne, s, wrap_angle(psi)};
  }
  static MeasurementSpec heterodyne() { return general_dyne(0.0, 0.0); }
  static MeasurementSpec homodyne(double psi) {
    return {MeasurementKind::Homodyne, std::numeric_limits<double>::infinity(), wrap_angle(psi)};
  }
  static MeasurementSpec homodyne_at_angle(double theta) { return homodyne(2 * theta); }

  bool is_homodyne() const { return kind == MeasurementKind::Homodyne; }
  double quadrature_angle() const { return psi / 2; }
};

struct OutcomeDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }

  double log_density(const Eigen::VectorXd& y) const {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::IllConditioned, "outcome covariance not positive definite");
    const Eigen::VectorXd z = llt.matrixL().solve(y - mean);
    double logdet = 0;
    for (int i = 0; i < dim(); ++i) logdet += 2 * std::log(llt.matrixL()(i, i));
    return -0.5 * (z.squaredNorm() + logdet + dim() * std::log(2 * kPi));
  }
  double density(const Eigen::VectorXd& y) const { return std::exp(log_density(y)); }
};

inline Mat2 seed_covariance(const MeasurementSpec& spec) {
  if (spec.is_homodyne())
    throw Error(ErrorKind::UnsupportedKind, "homodyne has no finite seed covariance");
  return params_to_moments(StateParams{0.0, 0.0, spec.s, spec.psi, 0.0}).sigma;
}

inline Vec2 homodyne_direction(const MeasurementSpec& spec) {
  const double th = spec.quadrature_angle();
  return Vec2(std::cos(th), std::sin(th));
}

inline OutcomeDistribution outcome_distribution(const GaussianMoments& m,
                                                const MeasurementSpec& spec) {
  OutcomeDistribution out;
  if (spec.is_homodyne()) {
    const Vec2 u = homodyne_direction(spec);
    out.mean = Eigen::VectorXd::Constant(1, u.dot(m.d));
    out.cov = Eigen::MatrixXd::Constant(1, 1, u.dot(m.sigma * u));
  } else {
    out.mean = m.d;
    out.cov = m.sigma + seed_covariance(spec);
  }
  return out;
}

// Independent engine per (seed, stream); streams index MC trials.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

inline std::vector<Eigen::VectorXd> sample_outcomes(const OutcomeDistribution& dist, int count,
                                                    std::mt19937_64& rng) {
  if (count < 1) throw Error(ErrorKind::Domain, "sample count must be >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(dist.cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::IllConditioned, "outcome covariance not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  Eigen::VectorXd z(dist.dim());
  for (int i = 0; i < count; ++i) {
    for (int k = 0; k < dist.dim(); ++k) z(k) = normal(rng);
    out.push_back(dist.mean + chol * z);
  }
  return out;
}

inline std::vector<Eigen::VectorXd> sample_outcomes(const OutcomeDistribution& dist, int count,
                                                    std::uint64_t seed) {
  auto rng = make_engine(seed);
  return sample_outcomes(dist, count, rng);
}

// Beam-splitter transmittance of the general-dyne setup <-> seed squeezing.
inline double transmittance_to_s(double tau) {
  if (!(tau >= 0.5 && tau < 1.0)) throw Error(ErrorKind::Domain, "transmittance must lie in [1/2, 1)");
  return 0.5 * std::log(tau / (1 - tau));
}

inline double s_to_transmittance(double s) {
  if (!(s >= 0) || !std::isfinite(s)) throw Error(ErrorKind::Domain, "s must be finite and >= 0");
  return 1.0 / (1.0 + std::exp(-2 * s));
}

}  // namespace gaussphase
