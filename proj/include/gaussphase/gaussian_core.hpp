#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "gaussphase/errors.hpp"

namespace gaussphase {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPhysTol = 1e-12;

inline double wrap_angle(double a) {
  double w = std::fmod(a, 2 * kPi);
  if (w < 0) w += 2 * kPi;
  if (w >= 2 * kPi) w = 0.0;
  return w;
}

// Single-mode displaced squeezed thermal state D(alpha) S(xi) rho_T S^dag D^dag,
// alpha = alpha_mag e^{i theta_c}, xi = r e^{i theta_s}.
struct StateParams {
  double alpha_mag = 0.0;
  double theta_c = 0.0;
  double r = 0.0;
  double theta_s = 0.0;
  double n_th = 0.0;
};

// Quadratures x1 = (a + a^dag)/sqrt2, x2 = (a - a^dag)/(i sqrt2); vacuum sigma = I/2.
struct GaussianMoments {
  Mat2 sigma = 0.5 * Mat2::Identity();
  Vec2 d = Vec2::Zero();
};

struct ChannelParams {
  double eta = 1.0;
  double n_e = 0.0;
};

inline void check_state(const StateParams& p) {
  if (!(p.alpha_mag >= 0) || !(p.r >= 0) || !(p.n_th >= 0) || !std::isfinite(p.alpha_mag) ||
      !std::isfinite(p.r) || !std::isfinite(p.n_th) || !std::isfinite(p.theta_c) ||
      !std::isfinite(p.theta_s))
    throw Error(ErrorKind::InvalidState, "state needs finite |alpha|, r, n_th >= 0");
}

inline void check_channel(const ChannelParams& c) {
  if (!(c.eta >= 0 && c.eta <= 1) || !(c.n_e >= 0) || !std::isfinite(c.n_e))
    throw Error(ErrorKind::InvalidState, "channel needs 0 <= eta <= 1 and n_e >= 0");
}

inline StateParams make_state(double alpha_mag, double theta_c, double r, double theta_s,
                              double n_th) {
  StateParams p{alpha_mag, wrap_angle(theta_c), r, wrap_angle(theta_s), n_th};
  check_state(p);
  return p;
}

// theta_c = (pi + theta_s)/2 maximizes the QFI and is the frame used by the closed forms.
inline StateParams canonical_state(double alpha_mag, double r, double n_th,
                                   double theta_s = 0.0) {
  return make_state(alpha_mag, (kPi + theta_s) / 2, r, theta_s, n_th);
}

inline Mat2 rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat2 m;
  m << c, -s, s, c;
  return m;
}

inline Mat2 symplectic_j() {
  Mat2 j;
  j << 0, -1, 1, 0;
  return j;
}

inline GaussianMoments params_to_moments(const StateParams& p) {
  const double ch = std::cosh(2 * p.r), sh = std::sinh(2 * p.r);
  const double cs = std::cos(p.theta_s), ss = std::sin(p.theta_s);
  const double scale = (2 * p.n_th + 1) / 2;
  GaussianMoments m;
  m.sigma << ch - sh * cs, -sh * ss, -sh * ss, ch + sh * cs;
  m.sigma *= scale;
  m.d << std::sqrt(2.0) * p.alpha_mag * std::cos(p.theta_c),
      std::sqrt(2.0) * p.alpha_mag * std::sin(p.theta_c);
  return m;
}

inline bool is_physical(const GaussianMoments& m) {
  if (!m.sigma.allFinite() || !m.d.allFinite()) return false;
  if (std::abs(m.sigma(0, 1) - m.sigma(1, 0)) > kPhysTol * (1 + m.sigma.cwiseAbs().maxCoeff()))
    return false;
  if (m.sigma(0, 0) <= 0 || m.sigma(1, 1) <= 0) return false;
  return m.sigma.determinant() >= 0.25 - kPhysTol;
}

inline StateParams moments_to_params(const GaussianMoments& m) {
  if (!is_physical(m)) throw Error(ErrorKind::InvalidState, "covariance violates det sigma >= 1/4");
  const double s11 = m.sigma(0, 0), s22 = m.sigma(1, 1);
  const double s12 = 0.5 * (m.sigma(0, 1) + m.sigma(1, 0));
  const double nu = std::sqrt(std::max(s11 * s22 - s12 * s12, 0.25));
  const double aniso = std::hypot(s11 - s22, 2 * s12);
  StateParams p;
  p.n_th = std::max(nu - 0.5, 0.0);
  // asinh of the anisotropy keeps r accurate near zero squeezing
  p.r = 0.5 * std::asinh(aniso / (2 * nu));
  p.theta_s = p.r > 0 ? wrap_angle(std::atan2(-2 * s12, s22 - s11)) : 0.0;
  p.alpha_mag = m.d.norm() / std::sqrt(2.0);
  p.theta_c = p.alpha_mag > 0 ? wrap_angle(std::atan2(m.d(1), m.d(0))) : 0.0;
  return p;
}

inline double mean_photon_number(const GaussianMoments& m) {
  return 0.5 * (m.sigma.trace() + m.d.squaredNorm() - 1.0);
}

inline StateParams apply_phase_shift(const StateParams& p, double phi) {
  StateParams q = p;
  q.theta_s = wrap_angle(p.theta_s - 2 * phi);
  q.theta_c = wrap_angle(p.theta_c - phi);
  return q;
}

// R(phi) = exp(-i phi n) rotates phase space by -phi.
inline GaussianMoments rotate_moments(const GaussianMoments& m, double phi) {
  const Mat2 rot = rotation(-phi);
  GaussianMoments out;
  out.sigma = rot * m.sigma * rot.transpose();
  out.d = rot * m.d;
  return out;
}

inline GaussianMoments apply_thermal_channel_moments(const GaussianMoments& m,
                                                     const ChannelParams& c) {
  check_channel(c);
  GaussianMoments out;
  out.sigma = (1 - c.eta) * (c.n_e + 0.5) * Mat2::Identity() + c.eta * m.sigma;
  out.d = std::sqrt(c.eta) * m.d;
  return out;
}

inline StateParams apply_thermal_channel(const StateParams& p, const ChannelParams& c) {
  check_state(p);
  check_channel(c);
  const double env = (1 - c.eta) * (1 + 2 * c.n_e);
  const double sys = c.eta * (1 + 2 * p.n_th);
  const double sh = std::sinh(p.r);
  const double root = std::sqrt((sys + env) * (sys + env) + 4 * sys * env * sh * sh);
  StateParams q = p;
  q.alpha_mag = std::sqrt(c.eta) * p.alpha_mag;
  q.n_th = std::max(0.5 * root - 0.5, 0.0);
  q.r = root > 0 ? std::max(0.5 * std::log((env + sys * std::exp(2 * p.r)) / root), 0.0) : 0.0;
  return q;
}

inline double mean_photon_number(const StateParams& p) {
  return mean_photon_number(params_to_moments(p));
}

}  // namespace gaussphase
