#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "gaussphase/errors.hpp"
#include "gaussphase/fisher.hpp"
#include "gaussphase/gaussian_core.hpp"
#include "gaussphase/measurement.hpp"

namespace gaussphase {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using SpCMat = Eigen::SparseMatrix<cd>;

// Operator on span{|0>, ..., |cutoff-1>}.
struct FockOperator {
  CMat matrix;
  int cutoff = 0;
};

struct CutoffPolicy {
  double target_trace_deficit = 1e-10;
  int max_cutoff = 400;
};

inline constexpr int kMinCutoff = 8;

// Rows/columns kept in norm comparisons: the last ceil(cutoff/5) are edge-affected.
inline int safe_block(int cutoff) { return cutoff - (cutoff + 4) / 5; }

// ---- normal-ordered quadratic polynomials in a, a^dag and their Heisenberg images ----

// c0 + a*â + ad*â^dag + aa*â^2 + adad*â^dag^2 + n*â^dag â
struct QuadPoly {
  cd c0{}, a{}, ad{}, aa{}, adad{}, n{};

  QuadPoly operator+(const QuadPoly& o) const {
    return {c0 + o.c0, a + o.a, ad + o.ad, aa + o.aa, adad + o.adad, n + o.n};
  }
  QuadPoly operator-(const QuadPoly& o) const { return *this + o * cd(-1); }
  QuadPoly operator*(cd k) const { return {c0 * k, a * k, ad * k, aa * k, adad * k, n * k}; }
  double max_abs_diff(const QuadPoly& o) const {
    return std::max({std::abs(c0 - o.c0), std::abs(a - o.a), std::abs(ad - o.ad),
                     std::abs(aa - o.aa), std::abs(adad - o.adad), std::abs(n - o.n)});
  }
};

// Image of â under conjugation U â U^dag: ca*â + cad*â^dag + c0.
struct LinearMode {
  cd ca{1.0}, cad{}, c0{};
};

inline LinearMode adjoint(const LinearMode& m) {
  return {std::conj(m.cad), std::conj(m.ca), std::conj(m.c0)};
}

// (x)(y) as a normal-ordered polynomial, using â â^dag = â^dag â + 1.
inline QuadPoly product(const LinearMode& x, const LinearMode& y) {
  QuadPoly q;
  q.aa = x.ca * y.ca;
  q.adad = x.cad * y.cad;
  q.n = x.ca * y.cad + x.cad * y.ca;
  q.c0 = x.ca * y.cad + x.c0 * y.c0;
  q.a = x.ca * y.c0 + x.c0 * y.ca;
  q.ad = x.cad * y.c0 + x.c0 * y.cad;
  return q;
}

inline QuadPoly heisenberg(const QuadPoly& q, const LinearMode& img) {
  const LinearMode dag = adjoint(img);
  QuadPoly out;
  out.c0 = q.c0;
  out = out + QuadPoly{img.c0, img.ca, img.cad, 0, 0, 0} * q.a;
  out = out + QuadPoly{dag.c0, dag.ca, dag.cad, 0, 0, 0} * q.ad;
  out = out + product(img, img) * q.aa;
  out = out + product(dag, dag) * q.adad;
  out = out + product(dag, img) * q.n;
  return out;
}

// Image for U = Outer * Inner given the images of each factor.
inline LinearMode compose(const LinearMode& outer, const LinearMode& inner) {
  const LinearMode dag = adjoint(outer);
  return {inner.ca * outer.ca + inner.cad * dag.ca, inner.ca * outer.cad + inner.cad * dag.cad,
          inner.ca * outer.c0 + inner.cad * dag.c0 + inner.c0};
}

inline LinearMode rotation_image(double phi) { return {std::polar(1.0, phi), 0, 0}; }
inline LinearMode displacement_image(cd alpha) { return {1.0, 0, -alpha}; }
inline LinearMode squeeze_image(double r, double theta) {
  return {std::cosh(r), std::polar(std::sinh(r), theta), 0};
}

inline QuadPoly poly_x() { return {0, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0, 0, 0}; }
inline QuadPoly poly_p() { return {0, cd(0, -1) / std::sqrt(2.0), cd(0, 1) / std::sqrt(2.0), 0, 0, 0}; }
inline QuadPoly poly_xx() { return {0.5, 0, 0, 0.5, 0.5, 1.0}; }
inline QuadPoly poly_pp() { return {0.5, 0, 0, -0.5, -0.5, 1.0}; }
inline QuadPoly poly_xp_px() { return {0, 0, 0, cd(0, -1), cd(0, 1), 0}; }

inline SpCMat to_sparse(const QuadPoly& q, int dim) {
  std::vector<Eigen::Triplet<cd>> t;
  t.reserve(5 * dim);
  for (int k = 0; k < dim; ++k) {
    t.emplace_back(k, k, q.c0 + q.n * double(k));
    if (k + 1 < dim) {
      const double s1 = std::sqrt(double(k + 1));
      t.emplace_back(k, k + 1, q.a * s1);
      t.emplace_back(k + 1, k, q.ad * s1);
    }
    if (k + 2 < dim) {
      const double s2 = std::sqrt(double(k + 1) * (k + 2));
      t.emplace_back(k, k + 2, q.aa * s2);
      t.emplace_back(k + 2, k, q.adad * s2);
    }
  }
  SpCMat m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline FockOperator to_fock(const QuadPoly& q, int cutoff) {
  return {CMat(to_sparse(q, cutoff)), cutoff};
}

struct LadderOperators {
  FockOperator a, adag, x, p, n;
};

inline LadderOperators build_operators(int cutoff) {
  if (cutoff < 2) throw Error(ErrorKind::Domain, "cutoff must be >= 2");
  return {to_fock({0, 1, 0, 0, 0, 0}, cutoff), to_fock({0, 0, 1, 0, 0, 0}, cutoff),
          to_fock(poly_x(), cutoff), to_fock(poly_p(), cutoff), to_fock({0, 0, 0, 0, 0, 1}, cutoff)};
}

inline bool is_hermitian(const FockOperator& op, double tol = 1e-12) {
  return (op.matrix - op.matrix.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, op.matrix.cwiseAbs().maxCoeff());
}

// ---- state vectors ----

// Fock amplitudes of D(alpha) S(r e^{i theta}) |0>, by the exact three-term recurrence.
inline CVec displaced_squeezed_vacuum(cd alpha, double r, double theta, int dim) {
  const double mu = std::cosh(r);
  const cd g = std::polar(std::tanh(r), theta);
  const cd lin = alpha + g * std::conj(alpha);
  CVec c = CVec::Zero(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha) - 0.5 * g * std::conj(alpha) * std::conj(alpha)) / std::sqrt(mu);
  if (dim > 1) c(1) = lin * c(0);
  for (int k = 1; k + 1 < dim; ++k)
    c(k + 1) = (lin * c(k) - g * std::sqrt(double(k)) * c(k - 1)) / std::sqrt(double(k + 1));
  return c;
}

// <n|x_theta> = e^{i theta n} h_n(x) for n < dim, with normalized Hermite functions h_n.
inline CVec quadrature_eigenvector(double x, double theta, int dim) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
  h(0) = std::pow(kPi, -0.25) * std::exp(-x * x / 2);
  if (dim > 1) h(1) = std::sqrt(2.0) * x * h(0);
  for (int n = 1; n + 1 < dim; ++n)
    h(n + 1) = std::sqrt(2.0 / (n + 1)) * x * h(n) - std::sqrt(double(n) / (n + 1)) * h(n - 1);
  CVec out(dim);
  for (int n = 0; n < dim; ++n) out(n) = std::polar(h(n), theta * n);
  return out;
}

inline cd complex_alpha(const StateParams& p) { return std::polar(p.alpha_mag, p.theta_c); }

// Thermal weights n^k/(1+n)^{k+1}, built from powers of n/(1+n) to avoid overflow.
inline std::vector<double> thermal_weights(double n_th, int count) {
  std::vector<double> w(count, 0.0);
  if (n_th == 0) {
    w[0] = 1.0;
    return w;
  }
  const double q = n_th / (1 + n_th);
  double pw = 1.0 / (1 + n_th);
  for (int k = 0; k < count; ++k, pw *= q) w[k] = pw;
  return w;
}

// Eigenvectors D S|n>, n < K, of rho (before the phase rotation) on a working space large
// enough that every vector is resolved, plus the cutoffs derived from them.
struct StateBasis {
  StateParams params;
  double phi = 0;
  CMat vectors;                  // working_dim x K, already rotated by R(phi)
  std::vector<double> weights;   // p_n
  int working_dim = 0;
  int rho_cutoff = 0;            // trace deficit below the policy target
  int resolved_cutoff = 0;       // additionally every retained eigenvector resolved
  double thermal_tail = 0;       // sum of p_n for n >= K
};

namespace detail {

inline int eigen_count(double n_th, double deficit) {
  if (n_th == 0) return 1;
  const double q = n_th / (1 + n_th);
  const double tail_target = deficit * 1e-2;
  return std::max(1, static_cast<int>(std::ceil(std::log(tail_target) / std::log(q))));
}

inline CMat eigenvectors(const StateParams& p, int count, int dim) {
  const cd alpha = complex_alpha(p);
  const LinearMode b = compose(displacement_image(alpha), squeeze_image(p.r, p.theta_s));
  const LinearMode bdag = adjoint(b);
  const SpCMat number = to_sparse(product(bdag, b), dim);
  const SpCMat raise = to_sparse({bdag.c0, bdag.ca, bdag.cad, 0, 0, 0}, dim);

  CMat u(dim, count);
  u.col(0) = displaced_squeezed_vacuum(alpha, p.r, p.theta_s, dim);
  u.col(0).normalize();
  if (count == 1) return u;

  SpCMat ident(dim, dim);
  ident.setIdentity();
  Eigen::SparseLU<SpCMat> lu;
  lu.analyzePattern(number);
  for (int n = 1; n < count; ++n) {
    // one raising step gives the eigenvector up to amplified rounding; inverse iteration cleans it
    const CVec raw = raise * u.col(n - 1) / std::sqrt(double(n));
    const SpCMat shifted = number - (n + 1e-7) * ident;
    lu.factorize(shifted);
    if (lu.info() != Eigen::Success)
      throw Error(ErrorKind::NumericFailure, "sparse factorization failed in eigenvector build");
    CVec x = raw;
    for (int it = 0; it < 2; ++it) {
      x = lu.solve(x);
      x.normalize();
    }
    const cd ph = x.dot(raw);
    u.col(n) = x * (ph / std::abs(ph));
  }
  return u;
}

}  // namespace detail

inline StateBasis state_basis(const StateParams& p, double phi, const CutoffPolicy& policy) {
  check_state(p);
  if (!(policy.target_trace_deficit > 0 && policy.target_trace_deficit < 1))
    throw Error(ErrorKind::Domain, "trace deficit target must lie in (0, 1)");
  StateBasis sb;
  sb.params = p;
  sb.phi = phi;
  const int count = detail::eigen_count(p.n_th, policy.target_trace_deficit);
  sb.weights = thermal_weights(p.n_th, count);
  sb.thermal_tail = p.n_th == 0 ? 0.0 : std::pow(p.n_th / (1 + p.n_th), count);

  const double vec_tol = policy.target_trace_deficit * 1e-2;
  int dim = 150 + static_cast<int>(std::ceil(2.0 * count * std::exp(2 * p.r) + 10 * p.alpha_mag * p.alpha_mag));
  CMat u;
  for (int attempt = 0;; ++attempt) {
    u = detail::eigenvectors(p, count, dim);
    const int top = dim / 10;
    double worst = 0;
    for (int k = 0; k < count; ++k) worst = std::max(worst, u.col(k).tail(top).squaredNorm());
    if (worst < vec_tol * 1e-3) break;
    if (attempt == 6) throw Error(ErrorKind::NumericFailure, "working space failed to resolve eigenvectors");
    dim = dim * 3 / 2;
  }
  sb.working_dim = dim;

  // tail(c, k): weight of vector k at indices >= c; the rho cutoff weights it by (1 + index)
  // so that second moments converge along with the trace
  Eigen::ArrayXXd tail(dim + 1, count), heavy(dim + 1, count);
  tail.row(dim).setZero();
  heavy.row(dim).setZero();
  for (int c = dim - 1; c >= 0; --c) {
    tail.row(c) = tail.row(c + 1) + u.row(c).cwiseAbs2().array();
    heavy.row(c) = heavy.row(c + 1) + (1.0 + c) * u.row(c).cwiseAbs2().array();
  }
  const Eigen::Map<const Eigen::ArrayXd> w(sb.weights.data(), count);
  int rho_c = dim, vec_c = dim;
  for (int c = dim; c >= 1; --c) {
    if (sb.thermal_tail + (heavy.row(c).transpose() * w).sum() < policy.target_trace_deficit) rho_c = c;
    if (tail.row(c).maxCoeff() < vec_tol) vec_c = c;
  }
  sb.rho_cutoff = std::max(rho_c, kMinCutoff);
  sb.resolved_cutoff = std::max({rho_c, vec_c, kMinCutoff});

  for (int k = 0; k < dim; ++k) u.row(k) *= std::polar(1.0, -phi * k);
  sb.vectors = std::move(u);
  return sb;
}

inline void require_cutoff(int cutoff, const CutoffPolicy& policy) {
  if (cutoff > policy.max_cutoff)
    throw Error(ErrorKind::CutoffExceeded, "needs cutoff " + std::to_string(cutoff) + " > max " +
                                               std::to_string(policy.max_cutoff));
}

inline FockOperator density_from_basis(const StateBasis& sb, int cutoff) {
  const int k = static_cast<int>(sb.weights.size());
  const CMat v = sb.vectors.topRows(cutoff);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(sb.weights.data(), k);
  return {v * w.asDiagonal() * v.adjoint(), cutoff};
}

inline FockOperator build_density_matrix(const StateParams& p, double phi, const CutoffPolicy& policy = {}) {
  const StateBasis sb = state_basis(p, phi, policy);
  require_cutoff(sb.rho_cutoff, policy);
  return density_from_basis(sb, sb.rho_cutoff);
}

// d rho / d phi = -i [n, rho]
inline FockOperator phase_derivative(const FockOperator& rho) {
  const Eigen::VectorXd n = Eigen::VectorXd::LinSpaced(rho.cutoff, 0, rho.cutoff - 1);
  CMat out = rho.matrix;
  for (int i = 0; i < rho.cutoff; ++i)
    for (int j = 0; j < rho.cutoff; ++j) out(i, j) *= cd(0, -(n(i) - n(j)));
  return {out, rho.cutoff};
}

// Spectral-sum SLD over the retained eigenpairs; the pure-state rule 2 d rho/d phi at n_th = 0.
inline FockOperator sld_spectral_from_basis(const StateBasis& sb, int cutoff) {
  if (sb.params.n_th == 0) return {2 * phase_derivative(density_from_basis(sb, cutoff)).matrix, cutoff};
  const int k = static_cast<int>(sb.weights.size());
  const Eigen::VectorXd num = Eigen::VectorXd::LinSpaced(sb.working_dim, 0, sb.working_dim - 1);
  const CMat gen = sb.vectors.adjoint() * (num.asDiagonal() * sb.vectors);
  CMat kern = CMat::Zero(k, k);
  for (int m = 0; m < k; ++m)
    for (int n = 0; n < k; ++n) {
      const double pm = sb.weights[m], pn = sb.weights[n];
      if (m == n || pm + pn < 1e-300) continue;
      kern(m, n) = 2 * (pn - pm) / (pn + pm) * cd(0, -1) * gen(m, n);
    }
  const CMat v = sb.vectors.topRows(cutoff);
  return {v * kern * v.adjoint(), cutoff};
}

inline FockOperator sld_spectral(const StateParams& p, double phi, const CutoffPolicy& policy = {}) {
  const StateBasis sb = state_basis(p, phi, policy);
  require_cutoff(sb.resolved_cutoff, policy);
  return sld_spectral_from_basis(sb, sb.resolved_cutoff);
}

// Product-quadrature prefactor of the closed-form SLD.
inline double sld_scale(const StateParams& p) {
  const double n = p.n_th;
  return (2 * n + 1) * std::sinh(2 * p.r) / (2 * n * n + 2 * n + 1);
}

inline cd sld_zeta(const StateParams& p) {
  const cd alpha = complex_alpha(p);
  const double m = 2 * p.n_th + 1;
  return alpha * std::cosh(2 * p.r) +
         std::conj(alpha) * std::polar(1.0, p.theta_s) * (std::sinh(2 * p.r) + 1 / (sld_scale(p) * m));
}

inline double sld_identity_coefficient(const StateParams& p) {
  const double m = 2 * p.n_th + 1;
  return 2 * p.alpha_mag * p.alpha_mag / (sld_scale(p) * m * m) * std::sin(2 * p.theta_c - p.theta_s);
}

// scale * V (XP + PX) V^dag + C, V = R(phi) S(2 xi) D(zeta) R(-theta_s/2).
// r = 0 uses the displaced-thermal form 2 sqrt2 |alpha|/(2n+1) X_{theta_c - phi - pi/2}.
inline QuadPoly sld_closed_form_poly(const StateParams& p, double phi) {
  check_state(p);
  if (p.r == 0) {
    const double k = 2 * std::sqrt(2.0) * p.alpha_mag / (2 * p.n_th + 1);
    const double th = p.theta_c - phi - kPi / 2;
    // X_theta = (â e^{-i theta} + â^dag e^{i theta}) / sqrt2
    return {0, k * std::polar(1.0, -th) / std::sqrt(2.0), k * std::polar(1.0, th) / std::sqrt(2.0), 0, 0, 0};
  }
  LinearMode v = rotation_image(-p.theta_s / 2);
  v = compose(displacement_image(sld_zeta(p)), v);
  v = compose(squeeze_image(2 * p.r, p.theta_s), v);
  v = compose(rotation_image(phi), v);
  QuadPoly l = heisenberg(poly_xp_px(), v) * sld_scale(p);
  l.c0 += sld_identity_coefficient(p);
  return l;
}

// The same operator assembled from the spectral-sum derivation: R D S (L1 + L2) S^dag D^dag R^dag.
inline QuadPoly sld_derivation_poly(const StateParams& p, double phi) {
  check_state(p);
  const cd alpha = complex_alpha(p);
  const double m = 2 * p.n_th + 1;
  const cd e_s = std::polar(1.0, p.theta_s);
  const cd lin = cd(0, 2 / m) * (std::conj(alpha) * std::cosh(p.r) - alpha * std::conj(e_s) * std::sinh(p.r));
  QuadPoly inner{0, lin, std::conj(lin), 0, 0, 0};
  const cd quad = cd(0, 1) * sld_scale(p) * e_s;
  inner = inner + QuadPoly{0, 0, 0, std::conj(quad), quad, 0};
  LinearMode u = squeeze_image(p.r, p.theta_s);
  u = compose(displacement_image(alpha), u);
  u = compose(rotation_image(phi), u);
  return heisenberg(inner, u);
}

inline FockOperator sld_closed_form(const StateParams& p, double phi, int cutoff) {
  return to_fock(sld_closed_form_poly(p, phi), cutoff);
}

inline FockOperator sld_closed_form(const StateParams& p, double phi, const CutoffPolicy& policy = {}) {
  const StateBasis sb = state_basis(p, phi, policy);
  require_cutoff(sb.resolved_cutoff, policy);
  return sld_closed_form(p, phi, sb.resolved_cutoff);
}

inline double qfi_from_sld(const FockOperator& rho, const FockOperator& l) {
  if (rho.cutoff != l.cutoff) throw Error(ErrorKind::Domain, "cutoff mismatch");
  const CMat rl = rho.matrix * l.matrix;
  return (rl.cwiseProduct(l.matrix.transpose())).sum().real();
}

inline double trace_norm_hermitian(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().sum();
}

// || d rho/d phi - (L rho + rho L)/2 ||_1 on the safe block.
inline double sld_residual(const FockOperator& rho, const FockOperator& l) {
  if (rho.cutoff != l.cutoff) throw Error(ErrorKind::Domain, "cutoff mismatch");
  const int b = safe_block(rho.cutoff);
  const CMat lr = l.matrix * rho.matrix;
  const CMat r = phase_derivative(rho).matrix - 0.5 * (lr + lr.adjoint());
  const CMat block = r.topLeftCorner(b, b);
  return trace_norm_hermitian(0.5 * (block + block.adjoint()));
}

// Operator-norm distance compressed onto the span of the retained eigenvectors.
inline double subspace_distance(const StateBasis& sb, const FockOperator& l1, const FockOperator& l2) {
  const CMat v = sb.vectors.topRows(l1.cutoff);
  const CMat d = v.adjoint() * (l1.matrix - l2.matrix) * v;
  Eigen::JacobiSVD<CMat> svd(d);
  return svd.singularValues()(0);
}

inline GaussianMoments fock_moments(const FockOperator& rho) {
  const auto ops = build_operators(rho.cutoff);
  auto expect = [&](const CMat& o) { return (rho.matrix * o).trace(); };
  const cd tr = rho.matrix.trace();
  const cd ea = expect(ops.a.matrix) / tr;
  const cd eaa = expect((ops.a.matrix * ops.a.matrix).eval()) / tr;
  // <a^dag a> without truncating a product
  const cd en = expect(ops.n.matrix) / tr;
  GaussianMoments m;
  m.d << std::sqrt(2.0) * ea.real(), std::sqrt(2.0) * ea.imag();
  // x1 = (a + a^dag)/sqrt2, x2 = (a - a^dag)/(i sqrt2)
  const double x1x1 = (eaa.real() + en.real() + 0.5);
  const double x2x2 = (-eaa.real() + en.real() + 0.5);
  const double sym12 = eaa.imag();
  m.sigma << x1x1 - m.d(0) * m.d(0), sym12 - m.d(0) * m.d(1), sym12 - m.d(0) * m.d(1),
      x2x2 - m.d(1) * m.d(1);
  return m;
}

// (1/pi) Tr[D(y) Pi0 D(y)^dag rho], y = (u1 + i u2)/sqrt2 for outcome u in quadrature units.
inline double povm_probability(const FockOperator& rho, const MeasurementSpec& spec, const Eigen::Vector2d& u) {
  if (spec.is_homodyne()) throw Error(ErrorKind::UnsupportedKind, "POVM oracle covers general-dyne only");
  const cd y(u(0) / std::sqrt(2.0), u(1) / std::sqrt(2.0));
  const CVec v = displaced_squeezed_vacuum(y, spec.s, spec.psi, rho.cutoff);
  return std::max((v.dot(rho.matrix * v)).real() / kPi, 0.0);
}

// <x_theta| rho |x_theta>
inline double homodyne_probability(const FockOperator& rho, double theta, double x) {
  const CVec v = quadrature_eigenvector(x, theta, rho.cutoff);
  return std::max((v.dot(rho.matrix * v)).real(), 0.0);
}

struct QuadraticDecomposition {
  double l0 = 0;
  Vec2 l1 = Vec2::Zero();
  Mat2 l2 = Mat2::Zero();
  double residual = 0;
};

// L ~ l0 + l1.(X, P) + (X, P) l2 (X, P)^T by least squares on the safe block.
inline QuadraticDecomposition sld_quadratic_decomposition(const FockOperator& l, double tol = 1e-8) {
  const int b = safe_block(l.cutoff);
  const std::vector<QuadPoly> basis{{1, 0, 0, 0, 0, 0}, poly_x(), poly_p(), poly_xx(), poly_pp(), poly_xp_px()};
  std::vector<CMat> mats;
  for (const auto& q : basis) mats.push_back(CMat(to_sparse(q, l.cutoff)).topLeftCorner(b, b));
  const CMat target = l.matrix.topLeftCorner(b, b);

  std::vector<std::pair<int, int>> band;
  for (int i = 0; i < b; ++i)
    for (int j = std::max(0, i - 2); j <= std::min(b - 1, i + 2); ++j) band.push_back({i, j});
  const int rows = 2 * static_cast<int>(band.size());
  Eigen::MatrixXd design(rows, 6);
  Eigen::VectorXd rhs(rows);
  for (std::size_t e = 0; e < band.size(); ++e) {
    const auto [i, j] = band[e];
    for (int c = 0; c < 6; ++c) {
      design(2 * e, c) = mats[c](i, j).real();
      design(2 * e + 1, c) = mats[c](i, j).imag();
    }
    rhs(2 * e) = target(i, j).real();
    rhs(2 * e + 1) = target(i, j).imag();
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  CMat fit = CMat::Zero(b, b);
  for (int c = 0; c < 6; ++c) fit += coef(c) * mats[c];
  QuadraticDecomposition out;
  out.residual = (target - fit).norm() / std::max(1.0, target.norm());
  if (out.residual > tol)
    throw Error(ErrorKind::DecompositionFailure, "operator is not quadratic in the quadratures");
  out.l0 = coef(0);
  out.l1 << coef(1), coef(2);
  out.l2 << coef(3), coef(5), coef(5), coef(4);
  return out;
}

struct HomodyneOptimalityReport {
  std::vector<double> x;
  std::vector<double> re;          // Re Tr(rho Pi_x L)
  std::vector<double> im;          // Im Tr(rho Pi_x L)
  std::vector<double> stated;      // exp(-x^2 c)(2x^2 c - 1) sqrt(c)/sqrt(2 pi), c = cosh 2r
  std::vector<double> dp_dphi;     // derivative of the homodyne outcome density
  double max_imag = 0;
  double max_real_deviation = 0;   // against the stated closed form
  double max_derivative_deviation = 0;
};

// Squeezed vacuum probed by homodyne at cos chi = tanh 2r, psi = theta_s - 2 phi - chi.
inline HomodyneOptimalityReport svs_homodyne_optimality_check(double r, double phi, const std::vector<double>& x_grid,
                                                              double theta_s = 0.0, int chi_sign = 1,
                                                              const CutoffPolicy& policy = {}) {
  if (!(r > 0)) throw Error(ErrorKind::Domain, "check needs r > 0");
  const StateParams p = make_state(0, 0, r, theta_s, 0);
  const StateBasis sb = state_basis(p, phi, policy);
  const int dim = sb.working_dim;
  const CVec psi_vec = sb.vectors.col(0);
  const CVec l_psi = to_sparse(sld_closed_form_poly(p, phi), dim) * psi_vec;

  const double chi = (chi_sign >= 0 ? 1 : -1) * std::acos(std::tanh(2 * r));
  const auto spec = MeasurementSpec::homodyne(theta_s - 2 * phi - chi);
  const double theta = spec.quadrature_angle();
  const EncodedMoments enc = encoded_moments(p, phi);
  const Vec2 u = homodyne_direction(spec);
  const double v = u.dot(enc.m.sigma * u), dv = u.dot(enc.dsigma * u);
  const double c = std::cosh(2 * r);

  HomodyneOptimalityReport rep;
  for (double x : x_grid) {
    const CVec xv = quadrature_eigenvector(x, theta, dim);
    const cd val = xv.dot(l_psi) * psi_vec.dot(xv);
    const double dens = std::exp(-x * x / (2 * v)) / std::sqrt(2 * kPi * v);
    const double deriv = dens * (x * x / (2 * v * v) - 1 / (2 * v)) * dv;
    const double stated = std::exp(-x * x * c) * (2 * x * x * c - 1) * std::sqrt(c) / std::sqrt(2 * kPi);
    rep.x.push_back(x);
    rep.re.push_back(val.real());
    rep.im.push_back(val.imag());
    rep.stated.push_back(stated);
    rep.dp_dphi.push_back(deriv);
    rep.max_imag = std::max(rep.max_imag, std::abs(val.imag()));
    rep.max_real_deviation = std::max(rep.max_real_deviation, std::abs(val.real() - stated));
    rep.max_derivative_deviation = std::max(rep.max_derivative_deviation, std::abs(val.real() - deriv));
  }
  return rep;
}

}  // namespace gaussphase
