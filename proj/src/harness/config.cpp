#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cnsr/harness.hpp"
#include "cnsr/presets.hpp"

namespace cnsr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

void require_name(const std::string& key, const std::string& v, const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), v) != allowed.end()) return;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  throw std::invalid_argument("config: key '" + key + "' must be one of {" + list + "}, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> config_keys() {
  return {"grid",   "box_length", "sensitivity", "theta0",       "epsilon",           "tau",
          "mu",     "grad_phi",   "grad_phi_strength", "initial", "initial_amplitude", "noise",
          "dt",     "t_end",      "scheme_order", "safety",      "ledger_every",      "snapshot_every",
          "lei_psi_count", "output", "seed"};
}

void apply_config_entry(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "grid") c.grid = to_int<int>(key, v);
  else if (key == "box_length") c.box_length = to_double(key, v);
  else if (key == "sensitivity") c.sensitivity = v;
  else if (key == "theta0") c.theta0 = to_double(key, v);
  else if (key == "epsilon") c.epsilon = to_double(key, v);
  else if (key == "tau") c.tau = to_double(key, v);
  else if (key == "mu") c.mu = to_int<int>(key, v);
  else if (key == "grad_phi") c.grad_phi = v;
  else if (key == "grad_phi_strength") c.grad_phi_strength = to_double(key, v);
  else if (key == "initial") c.initial = v;
  else if (key == "initial_amplitude") c.initial_amplitude = to_double(key, v);
  else if (key == "noise") c.noise = to_double(key, v);
  else if (key == "dt") c.dt = to_double(key, v);
  else if (key == "t_end") c.t_end = to_double(key, v);
  else if (key == "scheme_order") c.scheme_order = to_int<int>(key, v);
  else if (key == "safety") c.safety = to_double(key, v);
  else if (key == "ledger_every") c.ledger_every = to_int<int>(key, v);
  else if (key == "snapshot_every") c.snapshot_every = to_int<int>(key, v);
  else if (key == "lei_psi_count") c.lei_psi_count = to_int<int>(key, v);
  else if (key == "output") c.output = v;
  else if (key == "seed") c.seed = to_int<std::uint64_t>(key, v);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path.string());
  return parse_config(is);
}

void write_config(std::ostream& os, const RunConfig& c) {
  os << "grid = " << c.grid << '\n'
     << "box_length = " << fmt(c.box_length) << '\n'
     << "sensitivity = " << c.sensitivity << '\n'
     << "theta0 = " << fmt(c.theta0) << '\n'
     << "epsilon = " << fmt(c.epsilon) << '\n'
     << "tau = " << fmt(c.tau) << '\n'
     << "mu = " << c.mu << '\n'
     << "grad_phi = " << c.grad_phi << '\n'
     << "grad_phi_strength = " << fmt(c.grad_phi_strength) << '\n'
     << "initial = " << c.initial << '\n'
     << "initial_amplitude = " << fmt(c.initial_amplitude) << '\n'
     << "noise = " << fmt(c.noise) << '\n'
     << "dt = " << fmt(c.dt) << '\n'
     << "t_end = " << fmt(c.t_end) << '\n'
     << "scheme_order = " << c.scheme_order << '\n'
     << "safety = " << fmt(c.safety) << '\n'
     << "ledger_every = " << c.ledger_every << '\n'
     << "snapshot_every = " << c.snapshot_every << '\n'
     << "lei_psi_count = " << c.lei_psi_count << '\n'
     << "output = " << c.output << '\n'
     << "seed = " << c.seed << '\n';
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (grid < 4 || grid % 2 != 0) fail("grid must be an even integer >= 4");
  if (!(box_length > 0.0)) fail("box_length must be positive");
  require_name("sensitivity", sensitivity, Sensitivities::preset_names());
  if (!(theta0 > 0.0)) fail("theta0 must be positive");
  if (!(epsilon >= 0.0)) fail("epsilon must be >= 0");
  if (!(tau >= 0.0)) fail("tau must be >= 0");
  if (mu != 0 && mu != 1) fail("mu must be 0 or 1");
  require_name("grad_phi", grad_phi, grad_phi_preset_names());
  if (!(grad_phi_strength >= 0.0)) fail("grad_phi_strength must be >= 0");
  require_name("initial", initial, initial_preset_names());
  if (!(initial_amplitude >= 0.0)) fail("initial_amplitude must be >= 0");
  if (!(noise >= 0.0 && noise < 1.0)) fail("noise must lie in [0, 1)");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(t_end > 0.0)) fail("t_end must be positive");
  if (std::abs(t_end / dt - std::round(t_end / dt)) > 1e-9 * (t_end / dt)) fail("t_end must be a multiple of dt");
  if (scheme_order != 1 && scheme_order != 2) fail("scheme_order must be 1 or 2");
  if (!(safety > 0.0 && safety < 1.0)) fail("safety must lie in (0, 1)");
  if (ledger_every < 1) fail("ledger_every must be >= 1");
  if (snapshot_every < 0) fail("snapshot_every must be >= 0");
  if (lei_psi_count < 0) fail("lei_psi_count must be >= 0");
  if (output.empty()) fail("output must not be empty");
}

long RunConfig::steps() const { return std::lround(t_end / dt); }

GridPtr RunConfig::make_grid() const { return Grid::make(grid, box_length); }

Sensitivities RunConfig::sensitivities() const { return Sensitivities::preset(sensitivity, theta0); }

RegParams RunConfig::reg_params(const GridPtr& g) const {
  RegParams rp;
  rp.epsilon = epsilon;
  rp.tau = tau;
  rp.mu = mu;
  rp.grad_phi = grad_phi_preset(grad_phi, g, grad_phi_strength);
  rp.validate();
  return rp;
}

State RunConfig::initial_state(const GridPtr& g) const {
  InitialData d = initial_preset(initial, g, initial_amplitude);
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < d.n0.size(); ++i) d.n0[i] *= 1.0 + noise * u(rng);
  }
  State s = prepare_initial(d.n0, d.c0, d.u0, epsilon);
  s.p = recover_pressure(s, reg_params(g));
  return s;
}

StepConfig RunConfig::step_config() const {
  StepConfig sc;
  sc.dt = dt;
  sc.t_end = t_end;
  sc.scheme_order = scheme_order;
  sc.safety = safety;
  sc.validate();
  return sc;
}

}  // namespace cnsr
