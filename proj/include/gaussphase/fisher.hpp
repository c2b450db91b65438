#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gaussphase/errors.hpp"
#include "gaussphase/gaussian_core.hpp"
#include "gaussphase/measurement.hpp"
#include "gaussphase/optim.hpp"

namespace gaussphase {

enum class OptimalType { TypeI, TypeII, TypeIII };

inline const char* to_string(OptimalType t) {
  switch (t) {
    case OptimalType::TypeI: return "I";
    case OptimalType::TypeII: return "II";
    case OptimalType::TypeIII: return "III";
  }
  return "?";
}

// Optimal types at a state; more than one entry means the FIs tie.
struct TypeSet {
  std::vector<OptimalType> types;

  bool contains(OptimalType t) const {
    return std::find(types.begin(), types.end(), t) != types.end();
  }
  bool is_tie() const { return types.size() > 1; }
  std::string label() const {
    std::string out;
    for (auto t : types) out += (out.empty() ? "" : "/") + std::string(to_string(t));
    return out;
  }
};

struct BoundReport {
  double fi = 0;
  double qfi = 0;
  double ratio = 1;
  MeasurementSpec spec;
  std::optional<OptimalType> type_used;
  TypeSet ties;
};

// Moments after the phase shift together with their exact phi-derivatives.
struct EncodedMoments {
  GaussianMoments m;
  Mat2 dsigma;
  Vec2 dd;
};

inline EncodedMoments encoded_moments(const StateParams& p, double phi) {
  EncodedMoments e;
  e.m = rotate_moments(params_to_moments(p), phi);
  const Mat2 j = symplectic_j();
  e.dd = -j * e.m.d;
  e.dsigma = -j * e.m.sigma + e.m.sigma * j;
  return e;
}

inline double gaussian_fi(const StateParams& p, double phi, const MeasurementSpec& spec) {
  check_state(p);
  const EncodedMoments e = encoded_moments(p, phi);
  if (spec.is_homodyne()) {
    const Vec2 u = homodyne_direction(spec);
    const double v = u.dot(e.m.sigma * u);
    const double dmu = u.dot(e.dd), dv = u.dot(e.dsigma * u);
    return std::max(dmu * dmu / v + dv * dv / (2 * v * v), 0.0);
  }
  const Mat2 seed = seed_covariance(spec);
  const Mat2 cov = e.m.sigma + seed;
  Eigen::SelfAdjointEigenSolver<Mat2> eig(cov, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(1);
  if (!(lo > 0) || hi / lo > 1e14)
    throw Error(ErrorKind::IllConditioned, "outcome covariance condition number above 1e14");
  // det and adjugate of a sum of two positive 2x2 matrices split into positive pieces,
  // so a strongly squeezed seed does not cancel digits
  auto adj = [](const Mat2& a) {
    Mat2 o;
    o << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
    return o;
  };
  const Mat2 adj_sum = adj(e.m.sigma) + adj(seed);
  const double det = e.m.sigma.determinant() + 0.25 + (adj(e.m.sigma) * seed).trace();
  const Mat2 inv = adj_sum / det;
  const Mat2 w = inv * e.dsigma;
  return std::max(e.dd.dot(inv * e.dd) + 0.5 * (w * w).trace(), 0.0);
}

// Brute-force FI: central differences of the outcome density in phi, integrated over a
// +-8 sigma box in whitened outcome coordinates.
inline double numeric_fi_oracle(const StateParams& p, double phi, const MeasurementSpec& spec) {
  check_state(p);
  constexpr double h = 1e-5, box = 8.0;
  const auto centre = outcome_distribution(rotate_moments(params_to_moments(p), phi), spec);
  const auto plus = outcome_distribution(rotate_moments(params_to_moments(p), phi + h), spec);
  const auto minus = outcome_distribution(rotate_moments(params_to_moments(p), phi - h), spec);
  const int dim = centre.dim();
  Eigen::LLT<Eigen::MatrixXd> llt(centre.cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::IllConditioned, "outcome covariance not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();
  const double jac = chol.diagonal().prod();

  auto integrand = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd y = centre.mean + chol * t;
    const double pc = centre.density(y);
    if (pc <= 0) return 0.0;
    const double dp = (plus.density(y) - minus.density(y)) / (2 * h);
    return dp * dp / pc * jac;
  };

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr double tol = 1e-11;
  constexpr unsigned depth = 12;
  double err = 0;
  double total = 0;
  bool failed = false;
  if (dim == 1) {
    total = Quad::integrate(
        [&](double t) { return integrand(Eigen::VectorXd::Constant(1, t)); }, -box, box, depth, tol,
        &err);
    failed = err > 1e-7 * std::abs(total) + 1e-13;
  } else {
    // inner errors are judged against the total: far-tail slices are tiny and noisy
    double inner_err = 0;
    auto inner = [&](double t0) {
      double e_in = 0;
      const double v = Quad::integrate(
          [&](double t1) { return integrand(Eigen::Vector2d(t0, t1)); }, -box, box, depth, tol,
          &e_in);
      inner_err = std::max(inner_err, e_in);
      return v;
    };
    total = Quad::integrate(inner, -box, box, depth, tol, &err);
    failed = err + 2 * box * inner_err > 1e-7 * std::abs(total) + 1e-13;
  }
  if (failed || !std::isfinite(total))
    throw Error(ErrorKind::NumericFailure, "outcome-space quadrature did not converge");
  return total;
}

inline double qfi(const StateParams& p) {
  check_state(p);
  const double m = 2 * p.n_th + 1;
  const double sh2 = std::sinh(2 * p.r);
  const double delta = p.theta_s - 2 * p.theta_c;
  const double coherent_part = std::cosh(2 * p.r) - sh2 * std::cos(delta);
  return 2 * m * m * sh2 * sh2 / (2 * p.n_th * p.n_th + 2 * p.n_th + 1) +
         4 * p.alpha_mag * p.alpha_mag / m * coherent_part;
}

// theta_c = (pi + theta_s)/2 (mod pi) or a degenerate state where the relation is moot.
inline bool is_canonical(const StateParams& p, double tol = 1e-9) {
  if (p.r == 0 || p.alpha_mag == 0) return true;
  const double off = std::remainder(p.theta_s - 2 * p.theta_c - kPi, 2 * kPi);
  return std::abs(off) < tol;
}

// |alpha~| = |alpha| / (e^{-r} sinh 2r), the coordinate of the optimal-type map.
inline double alpha_tilde(const StateParams& p) {
  if (p.r == 0) throw Error(ErrorKind::Domain, "alpha~ undefined at r = 0");
  return p.alpha_mag / (std::exp(-p.r) * std::sinh(2 * p.r));
}

inline double alpha_tilde_sq_max_ii(double n_th) { return 2 * (2 * n_th + 1); }
inline double alpha_tilde_sq_max_iii(double n_th) { return std::pow(2 * n_th + 1, 3); }
// Below this alpha~^2 Type-II beats Type-III; defined for 0 < n_th <= 1/sqrt2.
inline double alpha_tilde_sq_ii_iii(double n_th) {
  const double m = 2 * n_th + 1;
  return m * (1 - (std::sqrt(2.0) - 1) * m) / n_th;
}

namespace detail {

struct FiParts {
  double m, sh, ch, e2r, a2;
};

inline FiParts parts(const StateParams& p) {
  return {2 * p.n_th + 1, std::sinh(2 * p.r), std::cosh(2 * p.r), std::exp(2 * p.r),
          p.alpha_mag * p.alpha_mag};
}

inline double f_type_i(const FiParts& q) { return 4 * q.e2r * q.a2 / q.m; }

inline double f_type_ii(const FiParts& q) {
  const double coth = q.ch / q.sh;
  const double num = 2 * q.m * q.sh + (1 + coth) * q.a2;
  return num * num / (2 * q.m * q.m);
}

// Rewritten so the n_th -> 0 limit does not cancel.
inline double f_type_iii(const FiParts& q, double n) {
  const double ea = q.e2r * q.a2;
  const double base = q.m * q.m * q.m * q.sh * q.sh;
  const double t = 4 * n * (n + 1) * ea / base;
  const double tail = 1 + std::sqrt(1 + t);
  return std::pow(q.m / (n + 1), 2) * q.sh * q.sh + 2 * ea / (n + 1) +
         4 * ea * ea / (base * tail * tail);
}

inline bool type_ii_available(const StateParams& p) {
  return p.r > 0 && std::pow(alpha_tilde(p), 2) <= alpha_tilde_sq_max_ii(p.n_th) * (1 + 1e-12);
}

inline bool type_iii_exists(const StateParams& p) {
  return p.r > 0 && std::pow(alpha_tilde(p), 2) < alpha_tilde_sq_max_iii(p.n_th);
}

}  // namespace detail

// F^(III) in its direct form, which cancels as n_th -> 0; only used to cross-check the stable form.
inline double closed_form_fi_iii_literal(const StateParams& p) {
  const auto q = detail::parts(p);
  const double n = p.n_th;
  const double ea = q.e2r * q.a2;
  const double den = 2 * n * n * (n + 1) * (n + 1);
  return (q.m * q.m * (2 * n * n + 2 * n + 1) * q.sh * q.sh + 2 * n * (n + 1) * q.m * ea -
          std::pow(q.m, 1.5) * q.sh * std::sqrt(std::pow(q.m, 3) * q.sh * q.sh + 4 * n * (n + 1) * ea)) /
         den;
}

inline double closed_form_fi(const StateParams& p, OptimalType t) {
  check_state(p);
  const auto q = detail::parts(p);
  switch (t) {
    case OptimalType::TypeI:
      return detail::f_type_i(q);
    case OptimalType::TypeII:
      if (p.r == 0) throw Error(ErrorKind::UndefinedType, "type-II needs r > 0");
      return detail::f_type_ii(q);
    case OptimalType::TypeIII:
      if (p.r == 0) throw Error(ErrorKind::UndefinedType, "type-III needs r > 0");
      if (!detail::type_iii_exists(p))
        throw Error(ErrorKind::NoRealSopt, "|alpha~| >= (1+2n_th)^{3/2}");
      return detail::f_type_iii(q, p.n_th);
  }
  return 0;
}

inline double s_opt(const StateParams& p) {
  check_state(p);
  if (p.r == 0) throw Error(ErrorKind::UndefinedType, "type-III needs r > 0");
  if (!detail::type_iii_exists(p)) throw Error(ErrorKind::NoRealSopt, "|alpha~| >= (1+2n_th)^{3/2}");
  const auto q = detail::parts(p);
  const double n = p.n_th;
  const double ea = q.e2r * q.a2;
  const double m3s2 = std::pow(q.m, 3) * q.sh * q.sh;
  const double num = q.m * q.e2r * ea +
                     std::pow(q.m, 1.5) * q.e2r * q.sh * std::sqrt(m3s2 + 4 * n * (n + 1) * ea);
  return 0.5 * std::log(num / (m3s2 - ea));
}

inline double type_ii_cos_chi(const StateParams& p) {
  if (p.r == 0) throw Error(ErrorKind::UndefinedType, "type-II needs r > 0");
  const auto q = detail::parts(p);
  const double coth = q.ch / q.sh;
  return (4 * q.m * q.sh + 2 * coth * (1 + coth) * q.a2) / (4 * q.m * q.ch + 2 * (1 + coth) * q.a2);
}

// Measurement realising closed_form_fi, with psi = theta_s - 2 phi - chi.
inline MeasurementSpec optimal_measurement_spec(const StateParams& p, double phi, OptimalType t) {
  check_state(p);
  if (p.r == 0) {
    if (t != OptimalType::TypeI) throw Error(ErrorKind::UndefinedType, "only type-I exists at r = 0");
    // chi_DTS = 2(theta_c - phi) - psi = pi
    return MeasurementSpec::homodyne(2 * (p.theta_c - phi) - kPi);
  }
  if (!is_canonical(p))
    throw Error(ErrorKind::InvalidState, "closed-form measurements assume theta_c = (pi + theta_s)/2");
  switch (t) {
    case OptimalType::TypeI:
      return MeasurementSpec::homodyne(p.theta_s - 2 * phi);
    case OptimalType::TypeII: {
      const double c = type_ii_cos_chi(p);
      if (std::abs(c) > 1 + 1e-12)
        throw Error(ErrorKind::UndefinedType, "type-II angle is not real here (|alpha~|^2 > 2(2n_th+1))");
      return MeasurementSpec::homodyne(p.theta_s - 2 * phi - std::acos(std::clamp(c, -1.0, 1.0)));
    }
    case OptimalType::TypeIII:
      return MeasurementSpec::general_dyne(s_opt(p), p.theta_s - 2 * phi);
  }
  return {};
}

// Argmax over the closed forms that are realisable at p; ties within 1e-9 relative.
// At the Type-III edge s_opt diverges and F^(III) meets F^(I), so the edge is kept.
inline TypeSet classify_optimal_type(const StateParams& p) {
  check_state(p);
  if (p.r == 0) return {{OptimalType::TypeI}};
  const auto q = detail::parts(p);
  const double at2 = std::pow(alpha_tilde(p), 2);
  std::vector<std::pair<OptimalType, double>> cand{{OptimalType::TypeI, detail::f_type_i(q)}};
  if (detail::type_ii_available(p)) cand.push_back({OptimalType::TypeII, detail::f_type_ii(q)});
  if (at2 <= alpha_tilde_sq_max_iii(p.n_th) * (1 + 1e-12))
    cand.push_back({OptimalType::TypeIII, detail::f_type_iii(q, p.n_th)});
  double best = 0;
  for (auto& c : cand) best = std::max(best, c.second);
  TypeSet out;
  for (auto& c : cand)
    if (c.second >= best * (1 - 1e-9)) out.types.push_back(c.first);
  return out;
}

// Closed-form optimum over the realisable types (canonical phases assumed).
inline double best_closed_form_fi(const StateParams& p) {
  if (p.r == 0) return closed_form_fi(p, OptimalType::TypeI);
  const auto q = detail::parts(p);
  double best = detail::f_type_i(q);
  if (detail::type_ii_available(p)) best = std::max(best, detail::f_type_ii(q));
  if (detail::type_iii_exists(p)) best = std::max(best, detail::f_type_iii(q, p.n_th));
  return best;
}

struct TripleCoincidence {
  double n_th;
  double alpha_tilde;
};

// Where alpha~_max^(II) = alpha~_max^(III); the II/III boundary passes through it too.
inline TripleCoincidence triple_coincidence() {
  auto gap = [](double n) { return alpha_tilde_sq_max_iii(n) - alpha_tilde_sq_max_ii(n); };
  boost::math::tools::eps_tolerance<double> tol(52);
  auto [lo, hi] = boost::math::tools::bisect(gap, 0.01, 1.0, tol);
  const double n = 0.5 * (lo + hi);
  return {n, std::sqrt(alpha_tilde_sq_max_ii(n))};
}

// STS prefactors of sinh^2 2r: QFI, homodyne, and general-dyne at s = r.
inline double c_h(double n) { return 2 * std::pow(2 * n + 1, 2) / (2 * n * n + 2 * n + 1); }
inline double c_f_homodyne(double) { return 2.0; }
inline double c_f_general_dyne(double n) { return std::pow((2 * n + 1) / (n + 1), 2); }

inline double sql_threshold(double n_th) {
  if (!(n_th >= 0)) throw Error(ErrorKind::Domain, "n_th must be >= 0");
  const double n = n_th;
  return (2 * n * n - 2 * n - 1 + std::sqrt(1 + 4 * n * (n + 1) * (n * n + n + 3))) / (4 * (2 * n + 1));
}

inline bool is_nonclassical_sts(double r, double n_th) {
  if (!(r >= 0) || !(n_th >= 0)) throw Error(ErrorKind::Domain, "r and n_th must be >= 0");
  return std::exp(-2 * r) * (2 * n_th + 1) < 1;
}

inline double qfi_turnaround_alpha(double r, double n_th) {
  if (!(r > 0)) throw Error(ErrorKind::Domain, "turnaround needs r > 0");
  if (!(n_th >= 0)) throw Error(ErrorKind::Domain, "n_th must be >= 0");
  const double m = 2 * n_th + 1;
  const double k = 1 + 2 * n_th * (n_th + 1);
  const double sh = std::sinh(2 * r);
  return std::sqrt(m * m * m * sh * sh * std::exp(-2 * r) / (2 * k * k));
}

inline BoundReport optimize_gaussian_fi(const StateParams& p, double phi) {
  check_state(p);
  constexpr int n_psi = 64;
  constexpr int n_s = 40;
  constexpr double s_step = 0.25, s_cap = 12.0;
  const double dpsi = 2 * kPi / n_psi;

  struct Cand {
    double f;
    MeasurementSpec spec;
  };
  std::vector<Cand> hom, gd;
  for (int k = 0; k < n_psi; ++k) {
    const auto spec = MeasurementSpec::homodyne(k * dpsi);
    hom.push_back({gaussian_fi(p, phi, spec), spec});
    for (int i = 0; i < n_s; ++i) {
      const auto g = MeasurementSpec::general_dyne(i * s_step, k * dpsi);
      gd.push_back({gaussian_fi(p, phi, g), g});
    }
  }
  auto by_f = [](const Cand& a, const Cand& b) { return a.f > b.f; };
  std::stable_sort(hom.begin(), hom.end(), by_f);
  std::stable_sort(gd.begin(), gd.end(), by_f);

  std::vector<Cand> refined;
  for (int c = 0; c < 3; ++c) {
    const double psi0 = hom[c].spec.psi;
    auto neg = [&](double psi) { return -gaussian_fi(p, phi, MeasurementSpec::homodyne(psi)); };
    const double psi = optim::golden_section_min(neg, psi0 - dpsi, psi0 + dpsi, 1e-11);
    const auto spec = MeasurementSpec::homodyne(psi);
    refined.push_back({gaussian_fi(p, phi, spec), spec});
    refined.push_back(hom[c]);
  }
  auto clamp_s = [&](double s) { return std::min(std::abs(s), s_cap); };
  for (int c = 0; c < 3; ++c) {
    auto neg = [&](const std::vector<double>& x) {
      return -gaussian_fi(p, phi, MeasurementSpec::general_dyne(clamp_s(x[0]), x[1]));
    };
    const auto res = optim::nelder_mead_min(neg, {gd[c].spec.s, gd[c].spec.psi}, {0.1, 0.05}, 1e-15,
                                            1e-11, 4000);
    const auto spec = MeasurementSpec::general_dyne(clamp_s(res.x[0]), res.x[1]);
    refined.push_back({gaussian_fi(p, phi, spec), spec});
    refined.push_back(gd[c]);
  }

  double best = 0;
  for (auto& c : refined) best = std::max(best, c.f);
  // among near-equal optima take the smallest seed squeezing; a seed pinned at the cap is
  // the homodyne limit and ranks with homodyne, which comes first
  auto rank = [&](const MeasurementSpec& s) {
    return s.s >= s_cap * (1 - 1e-12) ? std::numeric_limits<double>::infinity() : s.s;
  };
  const Cand* pick = nullptr;
  for (auto& c : refined) {
    if (c.f < best * (1 - 1e-9)) continue;
    if (!pick || rank(c.spec) < rank(pick->spec)) pick = &c;
  }

  BoundReport rep;
  rep.fi = pick->f;
  rep.spec = pick->spec;
  rep.qfi = qfi(p);
  rep.ratio = rep.qfi > 0 ? rep.fi / rep.qfi : 1.0;
  if (is_canonical(p)) {
    rep.ties = classify_optimal_type(p);
    for (auto t : {OptimalType::TypeIII, OptimalType::TypeII, OptimalType::TypeI})
      if (rep.ties.contains(t) && (t != OptimalType::TypeIII || detail::type_iii_exists(p))) {
        rep.type_used = t;
        break;
      }
    if (!rep.type_used && !rep.ties.types.empty()) rep.type_used = rep.ties.types.front();
  }
  return rep;
}

}  // namespace gaussphase
