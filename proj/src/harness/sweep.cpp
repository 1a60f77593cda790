#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "cnsr/harness.hpp"
#include "cnsr/spectral.hpp"

namespace cnsr {

namespace {

struct Member {
  SweepTrajectory traj;
  bool ok = false;
  std::string error;
};

Member run_member(RunConfig cfg) {
  Member m;
  try {
    const GridPtr g = cfg.make_grid();
    Sensitivities sens = cfg.sensitivities();
    const RegParams rp = cfg.reg_params(g);
    const State s0 = cfg.initial_state(g);
    if (s0.c.max_abs() > 0.0) sens.s_max = 2.0 * s0.c.max_abs();
    m.traj.samples.push_back(s0);
    advance(s0, cfg.step_config(), sens, rp, PositivityPolicy::from_initial(s0), [&](long k, const State& s) {
      if (k % cfg.ledger_every == 0) m.traj.samples.push_back(s);
    });
    m.ok = true;
  } catch (const SolverAbort& e) {
    m.error = std::string("solver abort (") + to_string(e.kind()) + "): " + e.what();
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  return m;
}

ScalarField clip(const ScalarField& f) {
  return f.map([](double v) { return v > 0.0 ? v : 0.0; });
}

// Pointwise magnitude of the difference of one tracked quantity.
ScalarField pointwise_difference(const State& a, const State& b, SweepQuantity q) {
  switch (q) {
    case SweepQuantity::u: return (a.u - b.u).magnitude();
    case SweepQuantity::grad_c: return (gradient(a.c, Dealias::skip) - gradient(b.c, Dealias::skip)).magnitude();
    case SweepQuantity::grad_sqrt_c: {
      auto root = [](const ScalarField& c) { return clip(c).map([](double v) { return std::sqrt(v); }); };
      return (gradient(root(a.c), Dealias::skip) - gradient(root(b.c), Dealias::skip)).magnitude();
    }
    case SweepQuantity::n: return (a.n - b.n).map([](double v) { return std::abs(v); });
    case SweepQuantity::n_log_n: {
      auto xlx = [](const ScalarField& n) { return clip(n).map([](double v) { return v > 0.0 ? v * std::log(v) : 0.0; }); };
      return (xlx(a.n) - xlx(b.n)).map([](double v) { return std::abs(v); });
    }
  }
  throw std::invalid_argument("sweep: unknown quantity");
}

}  // namespace

const char* to_string(SweepParam p) { return p == SweepParam::tau ? "tau" : "epsilon"; }

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "tau") return SweepParam::tau;
  if (name == "epsilon") return SweepParam::epsilon;
  throw std::invalid_argument("sweep: parameter must be 'tau' or 'epsilon', got '" + name + "'");
}

std::vector<SweepQuantity> sweep_quantities() {
  return {SweepQuantity::u, SweepQuantity::grad_c, SweepQuantity::grad_sqrt_c, SweepQuantity::n,
          SweepQuantity::n_log_n};
}

const char* to_string(SweepQuantity q) {
  switch (q) {
    case SweepQuantity::u: return "u";
    case SweepQuantity::grad_c: return "grad_c";
    case SweepQuantity::grad_sqrt_c: return "grad_sqrt_c";
    case SweepQuantity::n: return "n";
    case SweepQuantity::n_log_n: return "n_log_n";
  }
  return "?";
}

double lq_difference(const SweepTrajectory& a, const SweepTrajectory& b, SweepQuantity quantity, int q) {
  if (q < 1) throw std::invalid_argument("lq_difference: exponent must be >= 1");
  if (a.samples.size() != b.samples.size() || a.samples.empty())
    throw std::invalid_argument("lq_difference: trajectories must have the same nonzero number of samples");
  std::vector<double> t, y;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const State& sa = a.samples[k];
    const State& sb = b.samples[k];
    if (!sa.grid().same_shape(sb.grid())) throw std::invalid_argument("lq_difference: grids differ");
    if (std::abs(sa.t - sb.t) > 1e-12 * std::max(1.0, std::abs(sa.t)))
      throw std::invalid_argument("lq_difference: sample times differ");
    const ScalarField d = pointwise_difference(sa, sb, quantity);
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += std::pow(d[i], q);
    t.push_back(sa.t);
    y.push_back(s * sa.grid().cell_volume());
  }
  const double integral = y.size() == 1 ? y[0] : cumulative_trapezoid(t, y).back();
  return std::pow(integral, 1.0 / q);
}

bool SweepResult::strictly_decreasing(SweepQuantity quantity, int q) const {
  const auto it = differences.find({quantity, q});
  if (it == differences.end() || it->second.size() < 2) return false;
  for (std::size_t k = 1; k < it->second.size(); ++k)
    if (!(it->second[k] < it->second[k - 1])) return false;
  return true;
}

bool SweepResult::all_strictly_decreasing() const {
  if (partial) return false;
  for (auto quantity : sweep_quantities())
    for (int q : {2, 3})
      if (!strictly_decreasing(quantity, q)) return false;
  return true;
}

void SweepResult::write_csv(std::ostream& os) const {
  os.precision(17);
  os << "param,quantity,q,value_a,value_b,difference\n";
  for (const auto& [key, diffs] : differences)
    for (std::size_t k = 0; k < diffs.size(); ++k)
      os << to_string(param) << ',' << to_string(key.first) << ',' << key.second << ',' << ladder[k] << ','
         << ladder[k + 1] << ',' << diffs[k] << '\n';
}

int worker_threads() {
  if (const char* env = std::getenv("CNSR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult sweep(const RunConfig& cfg, SweepParam param, int levels) {
  cfg.validate();
  if (levels < 1) throw std::invalid_argument("sweep: need at least one halving");
  const double start = param == SweepParam::tau ? cfg.tau : cfg.epsilon;
  if (!(start > 0.0)) throw std::invalid_argument(std::string("sweep: starting ") + to_string(param) + " must be positive");

  std::vector<RunConfig> cfgs;
  for (int k = 0; k <= levels; ++k) {
    RunConfig c = cfg;
    const double v = std::ldexp(start, -k);
    if (param == SweepParam::tau) {
      c.tau = v;
    } else {
      c.tau = 0.0;
      c.epsilon = v;
    }
    cfgs.push_back(c);
  }

  std::vector<Member> members(cfgs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < cfgs.size(); k = next++) members[k] = run_member(cfgs[k]);
  };
  const int nthreads = std::min<int>(worker_threads(), static_cast<int>(cfgs.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  SweepResult out;
  out.param = param;
  std::size_t done = 0;
  while (done < members.size() && members[done].ok) {
    members[done].traj.value = param == SweepParam::tau ? cfgs[done].tau : cfgs[done].epsilon;
    out.ladder.push_back(members[done].traj.value);
    ++done;
  }
  if (done < members.size()) {
    out.partial = true;
    out.failure = std::string("member ") + to_string(param) + " = " + std::to_string(param == SweepParam::tau ? cfgs[done].tau : cfgs[done].epsilon) +
                  " failed: " + members[done].error;
  }
  for (auto quantity : sweep_quantities())
    for (int q : {2, 3}) {
      auto& d = out.differences[{quantity, q}];
      for (std::size_t k = 0; k + 1 < done; ++k) d.push_back(lq_difference(members[k].traj, members[k + 1].traj, quantity, q));
    }
  return out;
}

}  // namespace cnsr
