#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cnsr/harness.hpp"
#include "cnsr/presets.hpp"
#include "cnsr/spectral.hpp"

namespace cnsr {

namespace {

InvariantResult bound(const std::string& name, double worst, double limit) {
  return {name, worst <= limit, worst, limit};
}

std::string snapshot_name(long step) {
  std::ostringstream os;
  os << "snap_" << std::setw(6) << std::setfill('0') << step << ".cnsr";
  return os.str();
}

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("simulate: cannot write " + path.string());
  fn(os);
}

}  // namespace

bool InvariantSuite::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const auto& i) { return i.pass; });
}

const InvariantResult& InvariantSuite::find(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return i;
  throw std::out_of_range("invariant suite: no entry named " + name);
}

void InvariantSuite::print(std::ostream& os) const {
  for (const auto& i : items)
    os << (i.pass ? "PASS " : "FAIL ") << i.name << " worst=" << std::setprecision(3) << std::scientific << i.worst
       << " limit=" << i.limit << std::defaultfloat << '\n';
}

InvariantSuite ledger_invariants(const std::vector<LedgerRow>& rows) {
  InvariantSuite out;
  if (rows.empty()) return out;
  const double m0 = rows.front().mass_n;
  const double c1 = rows.front().l1_c;
  double mass = 0.0, maxc = 0.0, l1c = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    mass = std::max(mass, std::abs(r.mass_n - m0) / (m0 > 0.0 ? m0 : 1.0));
    if (k > 0) {
      maxc = std::max(maxc, r.linf_c - rows[k - 1].linf_c);
      l1c = std::max(l1c, (r.l1_c - rows[k - 1].l1_c) / (c1 > 0.0 ? c1 : 1.0));
    }
  }
  out.items.push_back(bound("mass_drift", mass, 1e-12));
  out.items.push_back(bound("max_c_increase", maxc, 1e-8));
  out.items.push_back(bound("l1_c_increase", l1c, 1e-12));
  return out;
}

void StepChecks::observe(const State& s, const RegParams& rp) {
  max_divergence = std::max(max_divergence, divergence(s.u, Dealias::skip).max_abs());
  const SpectralField src = pressure_source(s, rp);
  const SpectralField ph = to_spectral(s.p);
  const auto k2 = s.grid().k_squared();
  double res = 0.0, scale = 0.0;
  for (std::size_t m = 0; m < ph.size(); ++m) {
    if (k2[m] == 0.0) continue;
    res = std::max(res, std::abs(k2[m] * ph[m] - src[m]));
    scale = std::max(scale, std::abs(src[m]));
  }
  max_pressure_residual = std::max(max_pressure_residual, scale > 0.0 ? res / scale : res);
  max_pressure_mean = std::max(max_pressure_mean, std::abs(s.p.mean()));
  min_n = std::min(min_n, s.n.min());
  min_c = std::min(min_c, s.c.min());
}

SimulationResult simulate(const RunConfig& cfg, const SimulateOptions& opt) {
  cfg.validate();
  const GridPtr g = cfg.make_grid();
  Sensitivities sens = cfg.sensitivities();
  const RegParams rp = cfg.reg_params(g);
  const State s0 = cfg.initial_state(g);
  const double c0_inf = s0.c.max_abs();
  if (c0_inf > 0.0) sens.s_max = 2.0 * c0_inf;
  const PositivityPolicy policy = PositivityPolicy::from_initial(s0);
  const LedgerOptions lopt{1e-12 * c0_inf};
  const SnapshotMeta meta{cfg.mu, cfg.epsilon, cfg.tau};
  const long steps = cfg.steps();

  const std::filesystem::path dir = cfg.output;
  if (opt.write_files) {
    std::filesystem::create_directories(dir / "snapshots");
    write_file(dir / "run.cfg", [&](std::ostream& os) { write_config(os, cfg); });
  }

  SimulationResult res;
  res.checks.min_n = s0.n.min();
  res.checks.min_c = s0.c.min();
  auto take = [&](const State& s) {
    res.rows.push_back(compute_row(s, sens, rp, lopt));
    res.forcing.push_back(forcing_sample(s, rp));
  };
  auto snap = [&](const State& s, long k) {
    if (opt.write_files) save_snapshot(s, meta, dir / "snapshots" / snapshot_name(k));
  };

  // cut-off windows live on the ledger cadence
  const double sample_dt = cfg.dt * cfg.ledger_every;
  const long samples = steps / cfg.ledger_every;
  std::optional<LeiAccumulator> lei;
  if (opt.evaluate_lei && cfg.lei_psi_count > 0 && samples >= 2) {
    LeiOptions lo;
    lo.c0_inf = c0_inf;
    lo.c_floor = 1e-12 * c0_inf;
    lo.max_gap = sample_dt;
    lei.emplace(random_psi_suite(cfg.lei_psi_count, cfg.seed, cfg.box_length, samples * sample_dt, sample_dt), sens,
                rp, lo);
    lei->add(s0);
  }

  take(s0);
  snap(s0, 0);
  auto observer = [&](long k, const State& s) {
    res.checks.observe(s, rp);
    const bool on_ledger = k % cfg.ledger_every == 0;
    if (on_ledger || k == steps) take(s);
    if (lei && on_ledger) lei->add(s);
    if ((cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0) || k == steps) snap(s, k);
  };

  bool aborted = false;
  try {
    res.final_state = advance(s0, cfg.step_config(), sens, rp, policy, observer);
  } catch (const SolverAbort& e) {
    aborted = true;
    res.exit_code = e.kind() == AbortKind::positivity ? exit_violation : exit_abort;
    res.message = std::string("solver abort (") + to_string(e.kind()) + "): " + e.what();
    res.final_state = e.last_good();
    if (opt.write_files) save_snapshot(e.last_good(), meta, dir / "snapshots" / "last_good.cnsr");
  } catch (const std::domain_error& e) {
    aborted = true;
    res.exit_code = exit_abort;
    res.message = std::string("solver abort: ") + e.what();
  }

  res.invariants = ledger_invariants(res.rows);
  auto& items = res.invariants.items;
  items.push_back(bound("divergence", res.checks.max_divergence, 1e-12));
  items.push_back(bound("pressure_residual", res.checks.max_pressure_residual, 1e-12));
  items.push_back(bound("pressure_mean", res.checks.max_pressure_mean, 1e-13));
  items.push_back(bound("positivity_n", std::max(-res.checks.min_n, 0.0), policy.tol_n));
  items.push_back(bound("positivity_c", std::max(-res.checks.min_c, 0.0), policy.tol_c));
  if (c0_inf > 0.0) {
    const auto report = validate_sensitivities(sens, sens.s_max);
    double worst = 0.0;
    for (const auto& p : report.predicates) worst = std::max(worst, p.worst);
    items.push_back({"sensitivity_assumptions", report.all_pass(), worst, 0.0});
  }
  if (!aborted) {
    if (lei) {
      res.lei = lei->finish();
      double worst = 0.0;
      for (const auto& r : res.lei) worst = std::max(worst, -r.residual - r.eta);
      items.push_back(bound("lei_residual", std::max(worst, 0.0), 0.0));
    }
    if (res.rows.size() >= 10) {
      const auto gr = global_inequality_report(res.rows);
      items.push_back({"global_growth", !gr.superlinear, std::max(gr.slope_second - std::max(gr.slope_first, 0.0), 0.0), 0.0});
    }
    if (!res.invariants.all_pass()) {
      res.exit_code = exit_violation;
      res.message = "invariant violation";
    }
  }

  if (opt.write_files) {
    write_file(dir / "ledger.csv", [&](std::ostream& os) { write_ledger_csv(os, res.rows); });
    write_file(dir / "forcing.csv", [&](std::ostream& os) { write_forcing_csv(os, res.forcing); });
    if (!res.lei.empty()) write_file(dir / "lei.csv", [&](std::ostream& os) { write_lei_csv(os, res.lei); });
    write_file(dir / "invariants.txt", [&](std::ostream& os) {
      res.invariants.print(os);
      os << "exit_code " << res.exit_code << '\n';
      if (!res.message.empty()) os << "message " << res.message << '\n';
    });
  }
  return res;
}

std::vector<PresetCheck> check_presets(const RunConfig& base) {
  std::vector<PresetCheck> out;
  for (const auto& name : initial_preset_names()) {
    RunConfig cfg = base;
    cfg.initial = name;
    out.push_back({name, simulate(cfg, {false, true})});
  }
  return out;
}

}  // namespace cnsr
