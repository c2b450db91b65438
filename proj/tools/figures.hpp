#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaussphase/gaussphase.hpp"
#include "output.hpp"

namespace tools {

struct FigureGrid {
  int points = 21;           // per axis for the density maps, per line elsewhere
  int eta_points = 5;        // 1 down to 0.2 along the loss trajectories
  double x_max = -1;         // |alpha|^2 or sinh^2 r axis; <0 picks the figure default
  double nth_max = -1;
};

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6"};
  return names;
}

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

inline double or_default(double v, double fallback) { return v < 0 ? fallback : v; }

inline double delta_phi(double fi) {
  return fi > 0 ? 1 / std::sqrt(fi) : std::numeric_limits<double>::infinity();
}

struct Trajectory {
  std::string label;
  double n_e;
};

// Rows for one probe state: best Gaussian FI, QFI, and the single-shot error bound.
inline std::vector<std::string> state_row(const std::string& series, double eta, double n_e,
                                          const gaussphase::StateParams& p, double x) {
  using namespace gaussphase;
  const double fi = best_closed_form_fi(p);
  const double h = qfi(p);
  std::string type = "I";
  if (p.r > 0) type = classify_optimal_type(p).label();
  return {series, num(eta), num(n_e), num(x), num(p.n_th), num(mean_photon_number(p)),
          num(fi), num(h), num(delta_phi(fi)), type};
}

inline const std::vector<std::string> kStateHeader{"series", "eta", "n_e", "x", "n_th", "N",
                                                   "fi", "qfi", "delta_phi", "type"};

// (i) n_e > N_in, (ii) n_e = N_in, (iii) n_e = n_th,in, (iv) n_e < n_th,in
inline void add_trajectories(Table& t, const gaussphase::StateParams& in, const std::vector<Trajectory>& traj,
                             int eta_points, bool squeezed) {
  using namespace gaussphase;
  for (const auto& tr : traj)
    for (double eta : linspace(1.0, 0.2, eta_points)) {
      const auto p = apply_thermal_channel(in, {eta, tr.n_e});
      const double x = squeezed ? std::pow(std::sinh(p.r), 2) : p.alpha_mag * p.alpha_mag;
      t.add(state_row("traj_" + tr.label, eta, tr.n_e, p, x));
    }
}

}  // namespace detail

// Columns:
//   fig3a/3b/5a/5b: series, eta, n_e, x, n_th, N, fi, qfi, delta_phi, type
//     x is |alpha|^2 (fig3) or sinh^2 r (fig5); delta_phi = 1/sqrt(fi) for one shot
//   fig4: n_th, C_H, C_F_I, C_F_II
//   fig6: n_th, alpha_tilde_sq_I_II, alpha_tilde_sq_III_edge, alpha_tilde_sq_II_III
inline Table figure_table(const std::string& name, const FigureGrid& g) {
  using namespace gaussphase;
  using detail::linspace;
  Table t;
  if (name == "fig3a" || name == "fig3b") {
    t.header = detail::kStateHeader;
    const double xmax = detail::or_default(g.x_max, 2.0), nmax = detail::or_default(g.nth_max, 2.0);
    if (name == "fig3a") {
      for (double a2 : linspace(0, xmax, g.points))
        for (double n : linspace(0, nmax, g.points))
          t.add(detail::state_row("grid", 1, 0, canonical_state(std::sqrt(a2), 0, n), a2));
    } else {
      for (double a2 : linspace(xmax / 4, xmax, 4))
        for (double n : linspace(0, nmax, g.points))
          t.add(detail::state_row("alpha_sq=" + num(a2), 1, 0, canonical_state(std::sqrt(a2), 0, n), a2));
    }
    detail::add_trajectories(t, canonical_state(1.0, 0, 1.0), {{"i", 4}, {"ii", 2}, {"iii", 1}, {"iv", 0}},
                             g.eta_points, false);
    return t;
  }
  if (name == "fig5a" || name == "fig5b") {
    t.header = detail::kStateHeader;
    const double xmax = detail::or_default(g.x_max, 2.0), nmax = detail::or_default(g.nth_max, 3.0);
    auto sts = [](double sh2, double n) { return canonical_state(0, std::asinh(std::sqrt(sh2)), n); };
    if (name == "fig5a") {
      for (double sh2 : linspace(0, xmax, g.points))
        for (double n : linspace(0, nmax, g.points)) t.add(detail::state_row("grid", 1, 0, sts(sh2, n), sh2));
    } else {
      for (double sh2 : linspace(xmax / 4, xmax, 4))
        for (double n : linspace(0, nmax, g.points))
          t.add(detail::state_row("sinh_sq_r=" + num(sh2), 1, 0, sts(sh2, n), sh2));
      for (double sh2 : linspace(0, xmax, g.points)) t.add(detail::state_row("svs", 1, 0, sts(sh2, 0), sh2));
    }
    detail::add_trajectories(t, sts(1.0, 2.0), {{"i", 14}, {"ii", 7}, {"iii", 2}, {"iv", 1}}, g.eta_points, true);
    return t;
  }
  if (name == "fig4") {
    t.header = {"n_th", "C_H", "C_F_I", "C_F_II"};
    auto ns = linspace(0, detail::or_default(g.nth_max, 3.0), g.points);
    ns.push_back(1 / std::sqrt(2.0));  // the I/II crossover gets its own row
    std::sort(ns.begin(), ns.end());
    for (double n : ns) t.add({num(n), num(c_h(n)), num(c_f_homodyne(n)), num(c_f_general_dyne(n))});
    return t;
  }
  if (name == "fig6") {
    t.header = {"n_th", "alpha_tilde_sq_I_II", "alpha_tilde_sq_III_edge", "alpha_tilde_sq_II_III"};
    auto ns = linspace(0, detail::or_default(g.nth_max, 1.2), g.points);
    ns.push_back(triple_coincidence().n_th);
    std::sort(ns.begin(), ns.end());
    for (double n : ns) {
      // the II/III curve only exists for 0 < n_th <= 1/sqrt2
      const bool has_ii_iii = n > 0 && n <= 1 / std::sqrt(2.0) + 1e-15;
      t.add({num(n), num(alpha_tilde_sq_max_ii(n)), num(alpha_tilde_sq_max_iii(n)),
             has_ii_iii ? num(std::max(alpha_tilde_sq_ii_iii(n), 0.0)) : ""});
    }
    return t;
  }
  throw std::invalid_argument("unknown figure " + name);
}

}  // namespace tools
