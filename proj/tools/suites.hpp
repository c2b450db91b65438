#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaussphase/gaussphase.hpp"
#include "output.hpp"

namespace tools {

struct Check {
  std::string name;
  double value = 0;  // measured error
  double tol = 0;
  bool pass = false;
  std::string point;  // parameter point, shown on failure
  std::string note;
};

inline Check make_check(std::string name, double value, double tol, std::string point = {}, std::string note = {}) {
  return {std::move(name), value, tol, value < tol, std::move(point), std::move(note)};
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0 ? 0 : std::abs(a - b) / s;
}

inline std::string point_str(const gaussphase::StateParams& p) {
  std::ostringstream o;
  o.precision(6);
  o << "alpha=" << p.alpha_mag << " theta_c=" << p.theta_c << " r=" << p.r << " theta_s=" << p.theta_s
    << " n_th=" << p.n_th;
  return o.str();
}

// Keeps the worst case of a family of checks so the report stays one line per property.
struct Worst {
  Worst(std::string name, double tol) : name(std::move(name)), tol(tol) {}
  std::string name;
  double tol;
  double value = 0;
  std::string point;
  void update(double v, const std::string& pt) {
    if (!(v <= value)) {
      value = v;
      point = pt;
    }
  }
  Check check(std::string note = {}) const {
    Check c = make_check(name, value, tol, point, std::move(note));
    if (std::isnan(value)) c.pass = false;
    return c;
  }
};

inline const gaussphase::CutoffPolicy kWidePolicy{1e-10, 2000};

inline std::vector<Check> suite_fi() {
  using namespace gaussphase;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0, 1);
  Worst vs_oracle{"gaussian_fi vs quadrature oracle (relative), 50 pairs", 1e-5};
  Worst below_qfi{"gaussian_fi <= QFI (relative excess)", 1e-9};
  for (int i = 0; i < 50; ++i) {
    const auto p = make_state(1.5 * u(rng), 2 * kPi * u(rng), u(rng), 2 * kPi * u(rng), 1.5 * u(rng));
    const double phi = 2 * kPi * u(rng);
    MeasurementSpec spec;
    if (i % 5 == 0) spec = MeasurementSpec::heterodyne();
    else if (i % 5 < 3) spec = MeasurementSpec::homodyne(2 * kPi * u(rng));
    else spec = MeasurementSpec::general_dyne(1.5 * u(rng), 2 * kPi * u(rng));
    const double f = gaussian_fi(p, phi, spec);
    const std::string pt = point_str(p) + " phi=" + num(phi) + " s=" + num(spec.s) + " psi=" + num(spec.psi);
    vs_oracle.update(rel_err(f, numeric_fi_oracle(p, phi, spec)), pt);
    const double h = qfi(p);
    below_qfi.update(h > 0 ? std::max(f / h - 1, 0.0) : f, pt);
  }
  return {vs_oracle.check(), below_qfi.check()};
}

inline std::vector<Check> suite_sld() {
  using namespace gaussphase;
  Worst closed{"closed-form SLD residual ||d rho - (L rho + rho L)/2||_1", 1e-8};
  Worst spectral{"spectral SLD residual (n_th > 0)", 1e-8};
  Worst agree{"spectral vs closed-form SLD on retained eigenspace", 1e-6};
  Worst qfi_match{"Tr[rho L^2] vs closed-form QFI (relative)", 1e-6};
  for (double a : {0.0, 1.0})
    for (double r : {0.0, 0.4, 0.8})
      for (double n : {0.0, 0.3, 1.0}) {
        if (a == 0 && r == 0) continue;
        const auto p = canonical_state(a, r, n);
        const double phi = 0.35;
        const auto sb = state_basis(p, phi, kWidePolicy);
        const int c = sb.resolved_cutoff;
        require_cutoff(c, kWidePolicy);
        const auto rho = density_from_basis(sb, c);
        const auto lc = sld_closed_form(p, phi, c);
        const std::string pt = point_str(p) + " cutoff=" + std::to_string(c);
        closed.update(sld_residual(rho, lc), pt);
        qfi_match.update(rel_err(qfi_from_sld(rho, lc), qfi(p)), pt);
        if (n > 0) {
          const auto ls = sld_spectral_from_basis(sb, c);
          spectral.update(sld_residual(rho, ls), pt);
          agree.update(subspace_distance(sb, ls, lc), pt);
        }
      }
  return {closed.check(), spectral.check(), agree.check(), qfi_match.check()};
}

inline std::vector<Check> suite_reductions() {
  using namespace gaussphase;
  auto realised = [](const StateParams& p, OptimalType t) {
    return gaussian_fi(p, 0.4, optimal_measurement_spec(p, 0.4, t));
  };
  Worst dts{"type I at r = 0: 4|alpha|^2/(2n+1)", 1e-12};
  for (double a : {0.5, 1.3})
    for (double n : {0.2, 1.0}) {
      const auto p = canonical_state(a, 0, n);
      const double expect = 4 * a * a / (2 * n + 1);
      dts.update(std::max(rel_err(closed_form_fi(p, OptimalType::TypeI), expect),
                          rel_err(realised(p, OptimalType::TypeI), expect)),
                 point_str(p));
    }
  Worst sts2{"type II at alpha = 0: 2 sinh^2 2r", 1e-12};
  Worst sts3{"type III at alpha = 0: ((2n+1)/(n+1))^2 sinh^2 2r", 1e-12};
  Worst sopt{"type III at alpha = 0: s_opt = r", 1e-12};
  Worst dsvs1{"type I at n_th = 0: 4 e^{2r}|alpha|^2", 1e-12};
  Worst dsvs2{"type II at n_th = 0: (2 sinh 2r + (1 + coth 2r)|alpha|^2)^2 / 2", 1e-12};
  for (double r : {0.3, 0.8}) {
    const double sh = std::sinh(2 * r);
    for (double n : {0.2, 1.0}) {
      const auto p = canonical_state(0, r, n);
      const double e2 = 2 * sh * sh, e3 = std::pow((2 * n + 1) / (n + 1), 2) * sh * sh;
      sts2.update(std::max(rel_err(closed_form_fi(p, OptimalType::TypeII), e2),
                           rel_err(realised(p, OptimalType::TypeII), e2)),
                  point_str(p));
      sts3.update(std::max(rel_err(closed_form_fi(p, OptimalType::TypeIII), e3),
                           rel_err(realised(p, OptimalType::TypeIII), e3)),
                  point_str(p));
      sopt.update(rel_err(s_opt(p), r), point_str(p));
    }
    for (double a : {0.5, 1.0}) {
      const auto p = canonical_state(a, r, 0);
      const double e1 = 4 * std::exp(2 * r) * a * a;
      const double e2 = std::pow(2 * sh + (1 + std::cosh(2 * r) / sh) * a * a, 2) / 2;
      dsvs1.update(std::max(rel_err(closed_form_fi(p, OptimalType::TypeI), e1),
                            rel_err(realised(p, OptimalType::TypeI), e1)),
                   point_str(p));
      if (gaussphase::detail::type_ii_available(p))
        dsvs2.update(std::max(rel_err(closed_form_fi(p, OptimalType::TypeII), e2),
                              rel_err(realised(p, OptimalType::TypeII), e2)),
                     point_str(p));
    }
  }
  Worst dts_opt{"DTS: optimised Gaussian FI = QFI", 1e-9};
  for (double n : {0.0, 0.5, 1.0, 3.0})
    for (double a : {0.3, 1.0, 2.0}) {
      const auto p = canonical_state(a, 0, n);
      dts_opt.update(rel_err(optimize_gaussian_fi(p, 0.4).fi, qfi(p)), point_str(p));
    }
  Worst svs_opt{"SVS: F = 2 sinh^2 2r = QFI", 1e-12};
  for (double r : {0.3, 0.8, 1.2}) {
    const auto p = canonical_state(0, r, 0);
    const double e = 2 * std::pow(std::sinh(2 * r), 2);
    svs_opt.update(std::max(rel_err(realised(p, OptimalType::TypeII), e), rel_err(qfi(p), e)), point_str(p));
  }
  return {dts.check(), sts2.check(), sts3.check(), sopt.check(), dsvs1.check(), dsvs2.check(),
          dts_opt.check(), svs_opt.check()};
}

inline std::vector<double> homodyne_check_grid() {
  std::vector<double> xs;
  for (int i = 0; i <= 80; ++i) xs.push_back(-4 + 0.1 * i);
  return xs;
}

inline std::vector<Check> suite_homodyne_optimality() {
  using namespace gaussphase;
  std::vector<Check> out;
  const auto xs = homodyne_check_grid();
  for (double r : {0.3, 0.8}) {
    const auto rep = svs_homodyne_optimality_check(r, 0.25, xs, 0.0, 1, kWidePolicy);
    const std::string pt = "r=" + num(r) + " cos chi = tanh 2r";
    out.push_back(make_check("Im Tr(rho Pi_x L), 81 points", rep.max_imag, 1e-10, pt));
    out.push_back(make_check("Re Tr(rho Pi_x L) = dp(x)/dphi", rep.max_derivative_deviation, 1e-8, pt));
    const std::size_t mid = xs.size() / 2;  // x = 0
    out.push_back(make_check("Re Tr(rho Pi_x L) vs exp(-x^2 c)(2x^2 c - 1) sqrt(c)/sqrt(2 pi)",
                             rep.max_real_deviation, 1e-8, pt,
                             "measured/stated ratio at x=0: " + num(rep.re[mid] / rep.stated[mid]) +
                                 ", -sqrt2 sinh 2r = " + num(-std::sqrt(2.0) * std::sinh(2 * r))));
  }
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"fi", "sld", "reductions", "appendixD", "all"};
  return names;
}

inline std::vector<std::pair<std::string, std::function<std::vector<Check>()>>> suites_for(const std::string& name) {
  std::vector<std::pair<std::string, std::function<std::vector<Check>()>>> all{
      {"fi", suite_fi}, {"sld", suite_sld}, {"reductions", suite_reductions}, {"appendixD", suite_homodyne_optimality}};
  if (name == "all") return all;
  for (auto& s : all)
    if (s.first == name) return {s};
  throw std::invalid_argument("unknown suite " + name);
}

}  // namespace tools
