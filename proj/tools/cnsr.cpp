#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cnsr/harness.hpp"
#include "cnsr/picard.hpp"

using namespace cnsr;
namespace fs = std::filesystem;

namespace {

RunConfig config_from(const std::string& path, const std::vector<std::string>& sets) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    apply_config_entry(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

template <class T, class Fn>
T read_file(const fs::path& path, Fn&& fn) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return fn(is);
}

std::vector<CutoffPsi> parse_psi(const std::string& text, const RunConfig& cfg, double T, double sample_dt) {
  if (text.rfind("random:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(7));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.empty() || parts.size() > 2) throw std::invalid_argument("--psi random:K[:seed]");
    const int K = std::stoi(parts[0]);
    const std::uint64_t seed = parts.size() == 2 ? std::stoull(parts[1]) : cfg.seed;
    return random_psi_suite(K, seed, cfg.box_length, T, sample_dt);
  }
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) v.push_back(std::stod(p));
  if (v.size() != 6 && v.size() != 7) throw std::invalid_argument("--psi expects cx,cy,cz,r,t1,t2[,sharpness]");
  return {make_psi({v[0], v[1], v[2]}, v[3], v[4], v[5], cfg.box_length, v.size() == 7 ? v[6] : 3.0)};
}

int cmd_simulate(const RunConfig& cfg) {
  const auto res = simulate(cfg);
  res.invariants.print(std::cout);
  if (!res.message.empty()) std::cout << res.message << '\n';
  std::cout << "rows " << res.rows.size() << ", output " << cfg.output << '\n';
  return res.exit_code;
}

int cmd_picard(const RunConfig& cfg, double T, int m, double tol, int max_iter) {
  const GridPtr g = cfg.make_grid();
  Sensitivities sens = cfg.sensitivities();
  const RegParams rp = cfg.reg_params(g);
  const State s0 = cfg.initial_state(g);
  if (s0.c.max_abs() > 0.0) sens.s_max = 2.0 * s0.c.max_abs();
  try {
    const auto res = picard_solve(s0, T, m, tol, max_iter, sens, rp);
    for (std::size_t k = 0; k < res.history.size(); ++k) {
      std::cout << "iter " << k << " d=" << res.history[k];
      if (k > 0) std::cout << " ratio=" << res.history[k] / res.history[k - 1];
      std::cout << '\n';
    }
    StepConfig sc = cfg.step_config();
    sc.t_end = T;
    sc.dt = T / m;
    const State ref = advance(s0, sc, sens, rp, PositivityPolicy::from_initial(s0));
    const State& fp = res.fixed_point.samples.back();
    auto rel = [](double diff, double norm) { return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff); };
    std::cout << "timestepper agreement (relative L2): n " << rel((fp.n - ref.n).l2_squared(), ref.n.l2_squared())
              << ", c " << rel((fp.c - ref.c).l2_squared(), ref.c.l2_squared()) << ", u "
              << rel((fp.u - ref.u).l2_squared(), ref.u.l2_squared()) << '\n';
    std::cout << (res.converged ? "converged" : "not converged") << '\n';
    return res.converged ? exit_ok : exit_violation;
  } catch (const PicardDivergence& e) {
    std::cout << e.what() << "; try --horizon " << e.suggested_horizon() << '\n';
    return exit_violation;
  }
}

int cmd_ledger(const fs::path& dir) {
  const RunConfig cfg = load_config(dir / "run.cfg");
  const auto rows = read_file<std::vector<LedgerRow>>(dir / "ledger.csv", [](std::istream& is) { return read_ledger_csv(is); });
  const auto forcing =
      read_file<std::vector<ForcingSample>>(dir / "forcing.csv", [](std::istream& is) { return read_forcing_csv(is); });
  InvariantSuite suite = ledger_invariants(rows);
  suite.print(std::cout);
  if (rows.size() >= 3) {
    try {
      std::cout << "kinetic balance max|residual| " << kinetic_balance_residual(rows, forcing).max_abs << '\n';
      if (cfg.mu == 0) {
        const GridPtr g = cfg.make_grid();
        std::cout << "fractional balance max|residual| "
                  << frac_balance_residual(rows, forcing, cfg.reg_params(g)).max_abs << '\n';
      }
    } catch (const std::invalid_argument& e) {
      std::cout << "balance residuals unavailable: " << e.what() << '\n';
    }
  }
  if (rows.size() >= 10) {
    const auto gr = global_inequality_report(rows);
    std::cout << "global G: affine deviation " << gr.fit.max_rel_dev << ", slopes " << gr.slope_first << " / "
              << gr.slope_second << (gr.superlinear ? ", superlinear growth flagged" : ", no superlinear growth")
              << '\n';
    suite.items.push_back({"global_growth", !gr.superlinear, 0.0, 0.0});
  }
  return suite.all_pass() ? exit_ok : exit_violation;
}

int cmd_lei(const fs::path& dir, const std::vector<std::string>& specs, const std::string& out) {
  const RunConfig cfg = load_config(dir / "run.cfg");
  const GridPtr g = cfg.make_grid();
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir / "snapshots"))
    if (e.path().extension() == ".cnsr" && e.path().stem() != "last_good") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<State> traj;
  for (const auto& f : files) traj.push_back(load_snapshot(f, g).state);
  if (traj.size() < 2) throw std::runtime_error("lei: need at least two snapshots");
  Sensitivities sens = cfg.sensitivities();
  const double c0 = traj.front().c.max_abs();
  if (c0 > 0.0) sens.s_max = 2.0 * c0;
  const double spacing = cfg.snapshot_every > 0 ? cfg.dt * cfg.snapshot_every : traj.back().t;
  std::vector<CutoffPsi> psis;
  for (const auto& s : specs) {
    auto more = parse_psi(s, cfg, traj.back().t, spacing);
    psis.insert(psis.end(), more.begin(), more.end());
  }
  LeiOptions lo;
  lo.c0_inf = c0;
  lo.c_floor = 1e-12 * c0;
  lo.max_gap = spacing;
  const auto reps = evaluate_lei(traj, psis, sens, cfg.reg_params(g), lo);
  if (out.empty()) {
    write_lei_csv(std::cout, reps);
  } else {
    std::ofstream os(out);
    write_lei_csv(os, reps);
  }
  bool ok = true;
  for (const auto& r : reps) {
    std::cerr << "psi residual " << r.residual << " eta " << r.eta << '\n';
    ok = ok && r.residual >= -r.eta;
  }
  return ok ? exit_ok : exit_violation;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, int levels) {
  const auto res = sweep(cfg, parse_sweep_param(param), levels);
  fs::create_directories(cfg.output);
  std::ofstream os(fs::path(cfg.output) / ("sweep_" + param + ".csv"));
  res.write_csv(os);
  for (auto q : sweep_quantities())
    for (int p : {2, 3}) {
      std::cout << to_string(q) << " L" << p << "L" << p << ":";
      for (double d : res.differences.at({q, p})) std::cout << ' ' << d;
      std::cout << (res.strictly_decreasing(q, p) ? "  decreasing" : "  not decreasing") << '\n';
    }
  if (res.partial) {
    std::cout << "partial ladder: " << res.failure << '\n';
    return exit_abort;
  }
  return res.all_strictly_decreasing() ? exit_ok : exit_violation;
}

int cmd_check(const RunConfig& base) {
  int code = exit_ok;
  for (const auto& pc : check_presets(base)) {
    std::cout << "== preset " << pc.preset << " exit " << pc.result.exit_code << '\n';
    pc.result.invariants.print(std::cout);
    if (!pc.result.message.empty()) std::cout << pc.result.message << '\n';
    code = std::max(code, pc.result.exit_code);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral chemotaxis-fluid solver and verification harness"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  auto add_config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--config", config, "key=value run configuration file");
    if (required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override one configuration entry (key=value)");
  };

  auto* sim = app.add_subcommand("simulate", "run the solver and write ledger, LEI report and snapshots");
  add_config(sim, true);

  double horizon = 0.01;
  int samples = 64, max_iter = 50;
  double tol = 1e-10;
  auto* pic = app.add_subcommand("picard", "iterate the mild-solution map on [0, T]");
  add_config(pic, true);
  pic->add_option("--horizon", horizon, "horizon T")->required();
  pic->add_option("--samples", samples, "time samples m")->required();
  pic->add_option("--tol", tol, "S-distance tolerance");
  pic->add_option("--max-iter", max_iter, "maximum iterations");

  std::string run_dir;
  auto* led = app.add_subcommand("ledger", "check the energy ledger of a run directory");
  led->add_option("--run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  std::vector<std::string> psi_specs{"random:5"};
  std::string lei_out;
  auto* lei = app.add_subcommand("lei", "evaluate the local energy inequality on saved snapshots");
  lei->add_option("--run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  lei->add_option("--psi", psi_specs, "random:K[:seed] or cx,cy,cz,r,t1,t2[,sharpness]");
  lei->add_option("--out", lei_out, "CSV output path (default stdout)");

  std::string param;
  int levels = 3;
  auto* swp = app.add_subcommand("sweep", "tau or epsilon halving sweep");
  add_config(swp, true);
  swp->add_option("--param", param, "tau or epsilon")->required()->check(CLI::IsMember({"tau", "epsilon"}));
  swp->add_option("--levels", levels, "number of halvings");

  auto* chk = app.add_subcommand("check", "run the invariant suite on every built-in preset");
  add_config(chk, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(config_from(config, sets));
    if (*pic) return cmd_picard(config_from(config, sets), horizon, samples, tol, max_iter);
    if (*led) return cmd_ledger(run_dir);
    if (*lei) return cmd_lei(run_dir, psi_specs, lei_out);
    if (*swp) return cmd_sweep(config_from(config, sets), param, levels);
    if (*chk) {
      RunConfig base = config_from(config, sets);
      if (config.empty() && sets.empty()) base.t_end = 0.2;
      return cmd_check(base);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
