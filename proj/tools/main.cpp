#include <cstdio>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "figures.hpp"
#include "gaussphase/gaussphase.hpp"
#include "output.hpp"
#include "suites.hpp"

using namespace gaussphase;
using tools::json;
using tools::num;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2 };

struct ProbeFlags {
  double alpha = 0, theta_c = 0, r = 0, theta_s = 0, nth = 0;
  double eta = 1, ne = 0, phi = 0;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "coherent amplitude |alpha|")->check(CLI::NonNegativeNumber);
    app->add_option("--theta-c", theta_c, "displacement phase (rad)");
    app->add_option("--r", r, "squeezing strength")->check(CLI::NonNegativeNumber);
    app->add_option("--theta-s", theta_s, "squeezing phase (rad)");
    app->add_option("--nth", nth, "thermal photons of the probe")->check(CLI::NonNegativeNumber);
    app->add_option("--eta", eta, "channel transmission")->check(CLI::Range(0.0, 1.0));
    app->add_option("--ne", ne, "environment thermal photons")->check(CLI::NonNegativeNumber);
    app->add_option("--phi", phi, "phase shift (rad)");
  }
  StateParams state() const { return make_state(alpha, theta_c, r, theta_s, nth); }
  ChannelParams channel() const { return {eta, ne}; }
  json to_json() const {
    return {{"alpha", alpha}, {"theta_c", theta_c}, {"r", r}, {"theta_s", theta_s}, {"nth", nth},
            {"eta", eta},     {"ne", ne},           {"phi", phi}};
  }
};

json spec_json(const MeasurementSpec& s) {
  if (s.is_homodyne()) return {{"kind", "homodyne"}, {"psi", s.psi}, {"quadrature_angle", s.quadrature_angle()}};
  return {{"kind", "general-dyne"}, {"s", s.s}, {"psi", s.psi}};
}

std::string spec_text(const MeasurementSpec& s) {
  if (s.is_homodyne()) return "homodyne, quadrature angle " + num(s.quadrature_angle()) + " (psi " + num(s.psi) + ")";
  return "general-dyne, s " + num(s.s) + ", psi " + num(s.psi);
}

int cmd_bound(const ProbeFlags& f, bool as_json, const std::string& out) {
  const auto lossy = apply_thermal_channel(f.state(), f.channel());
  const auto rep = optimize_gaussian_fi(lossy, f.phi);
  json j{{"qfi", rep.qfi}, {"fi", rep.fi}, {"ratio", rep.ratio}, {"measurement", spec_json(rep.spec)}};
  j["type"] = rep.type_used ? json(to_string(*rep.type_used)) : json(nullptr);
  j["ties"] = rep.ties.label();
  tools::RunManifest m{"bound", f.to_json()};
  if (!out.empty()) {
    json doc = j;
    doc["manifest_hash"] = m.hash();
    tools::write_text(out, doc.dump(2) + "\n");
    tools::write_manifest(out, m);
  }
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "QFI          " << num(rep.qfi) << "\n"
              << "Gaussian FI  " << num(rep.fi) << "\n"
              << "ratio FI/QFI " << num(rep.ratio) << "\n"
              << "measurement  " << spec_text(rep.spec) << "\n"
              << "type         " << (rep.type_used ? to_string(*rep.type_used) : "n/a (non-canonical frame)")
              << (rep.ties.is_tie() ? " (tie " + rep.ties.label() + ")" : "") << "\n";
  }
  return kOk;
}

int cmd_figure(const std::string& name, const tools::FigureGrid& g, const std::string& out) {
  const auto table = tools::figure_table(name, g);
  tools::RunManifest m{"figure",
                       {{"name", name}, {"points", g.points}, {"eta_points", g.eta_points}, {"x_max", g.x_max},
                        {"nth_max", g.nth_max}}};
  const auto path = tools::resolve(out, name + ".csv");
  tools::write_csv(path, table, m);
  std::cout << path.string() << "  (" << table.rows.size() << " rows)\n";
  return kOk;
}

int cmd_verify(const std::string& suite) {
  bool ok = true;
  for (const auto& [name, run] : tools::suites_for(suite)) {
    std::cout << "== " << name << "\n";
    for (const auto& c : run()) {
      ok &= c.pass;
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  err=" << num(c.value) << " tol=" << num(c.tol);
      if (!c.pass && !c.point.empty()) std::cout << "  at " << c.point;
      if (!c.note.empty()) std::cout << "  [" << c.note << "]";
      std::cout << "\n";
    }
  }
  std::cout << (ok ? "all checks passed" : "some checks failed") << "\n";
  return ok ? kOk : kFailure;
}

struct SimFlags {
  int shots = 1000, trials = 1000;
  std::uint64_t seed = 0;
  double window = 0.5;
  std::string measurement = "optimal";
  double s = 0, psi = 0;
  std::string out;
};

int cmd_simulate(const ProbeFlags& f, const SimFlags& sf) {
  ExperimentConfig c;
  c.state = f.state();
  c.channel = f.channel();
  c.phi_true = f.phi;
  c.shots_M = sf.shots;
  c.trials = sf.trials;
  c.seed = sf.seed;
  c.search_halfwidth = sf.window;
  if (sf.measurement == "optimal")
    c.spec = optimize_gaussian_fi(apply_thermal_channel(c.state, c.channel), c.phi_true).spec;
  else if (sf.measurement == "homodyne")
    c.spec = MeasurementSpec::homodyne(sf.psi);
  else if (sf.measurement == "heterodyne")
    c.spec = MeasurementSpec::heterodyne();
  else
    c.spec = MeasurementSpec::general_dyne(sf.s, sf.psi);

  const auto rep = run_experiment(c);

  json params = f.to_json();
  params.update({{"shots", sf.shots}, {"trials", sf.trials}, {"window", sf.window},
                 {"measurement", sf.measurement}, {"s", sf.s}, {"psi", sf.psi}});
  tools::RunManifest m{"simulate", params};
  m.seed = sf.seed;

  json j{{"mse", rep.mse},
         {"bias", rep.bias},
         {"cr_bound", rep.cr_bound},
         {"saturation_ratio", rep.saturation_ratio},
         {"fi_used", rep.fi_used},
         {"mse_std_error", rep.mse_std_error},
         {"boundary_hits", rep.boundary_hits},
         {"measurement", spec_json(c.spec)},
         {"manifest", m.hashed()},
         {"manifest_hash", m.hash()}};

  const auto base = tools::resolve(sf.out, "simulate");
  const std::string json_path = base.string() + ".json", csv_path = base.string() + ".csv";
  tools::write_text(json_path, j.dump(2) + "\n");
  tools::write_manifest(json_path, m);
  tools::Table t;
  t.header = {"trial", "phi_hat", "error"};
  for (std::size_t i = 0; i < rep.estimates.size(); ++i)
    t.add({std::to_string(i), num(rep.estimates[i]), num(rep.estimates[i] - c.phi_true)});
  tools::write_csv(csv_path, t, m);

  std::cout << "saturation_ratio " << num(rep.saturation_ratio) << "  (M F MSE)\n"
            << "mse " << num(rep.mse) << " +- " << num(rep.mse_std_error) << ", CR bound " << num(rep.cr_bound)
            << "\n"
            << "bias " << num(rep.bias) << ", boundary hits " << rep.boundary_hits << "\n"
            << json_path << "\n"
            << csv_path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-estimation bounds for single-mode Gaussian probes"};
  app.set_version_flag("--version", GAUSSPHASE_VERSION);
  app.require_subcommand(1);

  ProbeFlags bound_flags;
  bool bound_json = false;
  std::string bound_out;
  auto* bound = app.add_subcommand("bound", "QFI, optimal Gaussian FI and the measurement achieving it");
  bound_flags.attach(bound);
  bound->add_flag("--json", bound_json, "print the report as JSON");
  bound->add_option("--out", bound_out, "also write the JSON report here");

  std::string fig_name, fig_out;
  tools::FigureGrid grid;
  auto* figure = app.add_subcommand("figure", "write a figure dataset as CSV");
  figure->add_option("name", fig_name, "fig3a | fig3b | fig4 | fig5a | fig5b | fig6")
      ->required()
      ->check(CLI::IsMember(tools::figure_names()));
  figure->add_option("--points", grid.points, "samples per axis")->check(CLI::Range(2, 2000));
  figure->add_option("--eta-points", grid.eta_points, "samples along each loss trajectory")
      ->check(CLI::Range(2, 1000));
  figure->add_option("--x-max", grid.x_max, "upper end of |alpha|^2 (fig3) or sinh^2 r (fig5)")
      ->check(CLI::PositiveNumber);
  figure->add_option("--nth-max", grid.nth_max, "upper end of the n_th axis")->check(CLI::PositiveNumber);
  figure->add_option("--out", fig_out, "output CSV (default $GAUSSPHASE_OUT_DIR/<name>.csv)");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run a verification suite; exit 0 iff every check passes");
  verify->add_option("suite", suite, "fi | sld | reductions | appendixD | all")
      ->check(CLI::IsMember(tools::suite_names()));

  ProbeFlags sim_flags;
  SimFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo ML estimation experiment");
  sim_flags.attach(simulate);
  simulate->add_option("--seed", sim.seed, "RNG seed")->required();
  simulate->add_option("--shots", sim.shots, "outcomes per trial (M)")->check(CLI::PositiveNumber);
  simulate->add_option("--trials", sim.trials, "independent trials")->check(CLI::PositiveNumber);
  simulate->add_option("--window", sim.window, "ML search half-width around phi (rad)")
      ->check(CLI::Range(1e-6, 1.5707963267948966));
  simulate->add_option("--measurement", sim.measurement, "optimal | homodyne | heterodyne | general")
      ->check(CLI::IsMember({"optimal", "homodyne", "heterodyne", "general"}));
  simulate->add_option("--s", sim.s, "general-dyne seed squeezing")->check(CLI::NonNegativeNumber);
  simulate->add_option("--psi", sim.psi, "measurement phase psi (rad)");
  simulate->add_option("--out", sim.out, "output path without extension (default $GAUSSPHASE_OUT_DIR/simulate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*bound) return cmd_bound(bound_flags, bound_json, bound_out);
    if (*figure) return cmd_figure(fig_name, grid, fig_out);
    if (*verify) return cmd_verify(suite);
    if (*simulate) return cmd_simulate(sim_flags, sim);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool bad_input = e.kind() == ErrorKind::InvalidState || e.kind() == ErrorKind::Domain;
    return bad_input ? kUsage : kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
