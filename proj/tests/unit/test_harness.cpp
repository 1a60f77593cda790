#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cnsr/harness.hpp"
#include "cnsr/presets.hpp"
#include "cnsr/spectral.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cnsr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cnsr_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

RunConfig short_run(const std::string& initial, const fs::path& out) {
  RunConfig cfg;
  cfg.initial = initial;
  cfg.t_end = 0.2;
  cfg.dt = 0.01;
  cfg.snapshot_every = 5;
  cfg.output = out.string();
  return cfg;
}

bool same_bits(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    if (std::memcmp(&x, &y, sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("configuration parsing") {
  std::istringstream is("# comment\n grid = 24 \n\ntau=0.05 # trailing\ninitial = two-blob\nseed=7\n");
  const RunConfig cfg = parse_config(is);
  CHECK(cfg.grid == 24);
  CHECK(cfg.tau == 0.05);
  CHECK(cfg.initial == "two-blob");
  CHECK(cfg.seed == 7);
  CHECK(cfg.epsilon == RunConfig{}.epsilon);

  std::ostringstream os;
  write_config(os, cfg);
  std::istringstream back(os.str());
  const RunConfig again = parse_config(back);
  std::ostringstream os2;
  write_config(os2, again);
  CHECK(os.str() == os2.str());
  for (const auto& key : config_keys()) CHECK(os.str().find(key + " = ") != std::string::npos);

  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  CHECK_THROWS_WITH_AS(bad("gird = 16\n"), doctest::Contains("unknown key 'gird'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(bad("grid = 16x\n"), doctest::Contains("line 1"), std::invalid_argument);
  CHECK_THROWS_AS(bad("grid 16\n"), std::invalid_argument);
  CHECK_THROWS_AS(bad("grid = 15\n"), std::invalid_argument);
  CHECK_THROWS_AS(bad("dt = -1\n"), std::invalid_argument);
  CHECK_THROWS_AS(bad("dt = 0.03\nt_end = 0.1\n"), std::invalid_argument);
  CHECK_THROWS_AS(bad("mu = 2\n"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(bad("initial = bubble\n"), doctest::Contains("blob"), std::invalid_argument);
  CHECK_THROWS_AS(bad("sensitivity = cubic\n"), std::invalid_argument);
  CHECK_THROWS_AS(bad("noise = 1\n"), std::invalid_argument);
}

TEST_CASE("initial state from configuration") {
  RunConfig cfg;
  cfg.grid = 8;
  const GridPtr g = cfg.make_grid();
  const State a = cfg.initial_state(g);
  CHECK(a.c.max_abs() > 0.0);
  CHECK(divergence(a.u, Dealias::skip).max_abs() < 1e-13);
  cfg.noise = 0.1;
  const State b = cfg.initial_state(g);
  const State c = cfg.initial_state(g);
  CHECK(same_bits(b.n, c.n));
  CHECK_FALSE(same_bits(a.n, b.n));
  cfg.seed = 2;
  CHECK_FALSE(same_bits(b.n, cfg.initial_state(g).n));
}

TEST_CASE("snapshot persistence") {
  const fs::path dir = scratch("snap");
  auto g = Grid::make(8, 2.5);
  State s = State::zero(g);
  s.n = oracle::random_field(g, 1);
  s.c = oracle::random_field(g, 2);
  s.u = oracle::random_vector(g, 3);
  s.p = oracle::random_field(g, 4);
  s.t = 0.123456789;
  const fs::path file = dir / "s.cnsr";
  save_snapshot(s, {0, 0.3, 0.07}, file);
  CHECK(fs::file_size(file) == 4 + 4 + 4 + 5 * 8 + 6 * 512 * 8);

  const auto loaded = load_snapshot(file);
  CHECK(loaded.state.t == s.t);
  CHECK(loaded.meta.mu == 0);
  CHECK(loaded.meta.epsilon == 0.3);
  CHECK(loaded.meta.tau == 0.07);
  CHECK(loaded.state.grid().n() == 8);
  CHECK(loaded.state.grid().length() == 2.5);
  CHECK(same_bits(loaded.state.n, s.n));
  CHECK(same_bits(loaded.state.c, s.c));
  for (int a = 0; a < 3; ++a) CHECK(same_bits(loaded.state.u[a], s.u[a]));
  CHECK(same_bits(loaded.state.p, s.p));

  const std::string bytes = slurp(file);
  CHECK(bytes.substr(0, 4) == "CNSR");
  SUBCASE("truncation names the missing section") {
    auto cut = [&](std::size_t len, const std::string& section) {
      std::ofstream(dir / "cut.cnsr", std::ios::binary) << bytes.substr(0, len);
      CHECK_THROWS_WITH(load_snapshot(dir / "cut.cnsr"), doctest::Contains(("missing section '" + section + "'").c_str()));
    };
    cut(2, "magic");
    cut(6, "version");
    cut(14, "box_length");
    cut(4 + 4 + 4 + 5 * 8 + 100, "n");
    cut(bytes.size() - 8, "p");
    cut(4 + 4 + 4 + 5 * 8 + 3 * 512 * 8 + 10, "u_y");
  }
  SUBCASE("header validation") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream(dir / "bad.cnsr", std::ios::binary) << bad;
    CHECK_THROWS_WITH(load_snapshot(dir / "bad.cnsr"), doctest::Contains("magic"));
    bad = bytes;
    bad[4] = 9;
    std::ofstream(dir / "ver.cnsr", std::ios::binary) << bad;
    CHECK_THROWS_WITH(load_snapshot(dir / "ver.cnsr"), doctest::Contains("version"));
    std::ofstream(dir / "long.cnsr", std::ios::binary) << bytes << "x";
    CHECK_THROWS_WITH(load_snapshot(dir / "long.cnsr"), doctest::Contains("trailing"));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_WITH(load_snapshot(file, Grid::make(12, 2.5)), doctest::Contains("shape mismatch"));
    CHECK_THROWS_WITH(load_snapshot(file, Grid::make(8, 3.0)), doctest::Contains("shape mismatch"));
    CHECK_NOTHROW(load_snapshot(file, Grid::make(8, 2.5)));
  }
  fs::remove_all(dir);
}

TEST_CASE("simulate on the zero preset") {
  const fs::path dir = scratch("zero");
  const auto res = simulate(short_run("zero", dir));
  CHECK(res.exit_code == exit_ok);
  REQUIRE(res.rows.size() == 21);
  for (const auto& r : res.rows)
    for (double v : {r.mass_n, r.l1_c, r.linf_c, r.entropy, r.kinetic, r.U, r.V, r.diss_u}) CHECK(v == 0.0);
  REQUIRE(res.lei.size() == 5);
  for (const auto& r : res.lei) {
    CHECK(r.residual == 0.0);
    CHECK(r.eta == 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("simulate on the blob preset") {
  const fs::path dir = scratch("blob");
  RunConfig cfg = short_run("blob", dir);
  cfg.ledger_every = 2;
  const auto res = simulate(cfg);
  CHECK(res.exit_code == exit_ok);
  CHECK(res.invariants.all_pass());
  CHECK(res.rows.size() == 11);
  const double m0 = res.rows.front().mass_n;
  for (std::size_t k = 1; k < res.rows.size(); ++k) {
    CHECK(std::abs(res.rows[k].mass_n - m0) <= 1e-12 * m0);
    CHECK(res.rows[k].linf_c <= res.rows[k - 1].linf_c + 1e-8);
  }
  for (const char* f : {"run.cfg", "ledger.csv", "forcing.csv", "lei.csv", "invariants.txt"}) CHECK(fs::exists(dir / f));
  int snaps = 0;
  for (const auto& e : fs::directory_iterator(dir / "snapshots")) snaps += e.path().extension() == ".cnsr";
  CHECK(snaps == 5);
  CHECK(load_config(dir / "run.cfg").initial == "blob");

  const auto last = load_snapshot(dir / "snapshots" / "snap_000020.cnsr", cfg.make_grid());
  CHECK(last.state.t == doctest::Approx(0.2));
  CHECK(same_bits(last.state.n, res.final_state.n));

  SUBCASE("deterministic") {
    const fs::path dir2 = scratch("blob2");
    cfg.output = dir2.string();
    simulate(cfg);
    CHECK(slurp(dir / "ledger.csv") == slurp(dir2 / "ledger.csv"));
    CHECK(slurp(dir / "lei.csv") == slurp(dir2 / "lei.csv"));
    CHECK(slurp(dir / "snapshots/snap_000020.cnsr") == slurp(dir2 / "snapshots/snap_000020.cnsr"));
    fs::remove_all(dir2);
  }
  fs::remove_all(dir);
}

TEST_CASE("simulate exit codes") {
  const fs::path dir = scratch("abort");
  SUBCASE("positivity violation") {
    RunConfig cfg = short_run("blob", dir);
    cfg.grid = 8;
    cfg.initial_amplitude = 50;
    cfg.epsilon = 0.0;
    cfg.dt = 0.05;
    cfg.t_end = 1.0;
    const auto res = simulate(cfg);
    CHECK(res.exit_code == exit_violation);
    CHECK(res.message.find("positivity") != std::string::npos);
    CHECK(fs::exists(dir / "snapshots/last_good.cnsr"));
    CHECK(fs::exists(dir / "ledger.csv"));
  }
  SUBCASE("CFL abort") {
    RunConfig cfg = short_run("taylor-green-u", dir);
    cfg.initial_amplitude = 10;
    cfg.dt = 0.5;
    cfg.t_end = 1.0;
    const auto res = simulate(cfg);
    CHECK(res.exit_code == exit_abort);
    CHECK(res.message.find("cfl") != std::string::npos);
    const auto last = load_snapshot(dir / "snapshots/last_good.cnsr");
    CHECK(last.state.t == 0.0);
  }
  SUBCASE("sensitivity assumptions") {
    RunConfig cfg = short_run("blob", dir);
    cfg.sensitivity = "saturating-negative-test";
    const auto res = simulate(cfg, {false, false});
    CHECK(res.exit_code == exit_violation);
    CHECK_FALSE(res.invariants.find("sensitivity_assumptions").pass);
  }
  fs::remove_all(dir);
}

TEST_CASE("ledger invariant suite") {
  std::vector<LedgerRow> rows(3);
  for (auto& r : rows) {
    r.mass_n = 10.0;
    r.l1_c = 5.0;
    r.linf_c = 1.0;
  }
  CHECK(ledger_invariants(rows).all_pass());
  rows[2].mass_n = 10.0 + 1e-9;
  CHECK_FALSE(ledger_invariants(rows).find("mass_drift").pass);
  rows[2].mass_n = 10.0;
  rows[1].linf_c = 1.0 + 2e-8;
  CHECK_FALSE(ledger_invariants(rows).find("max_c_increase").pass);
  rows[1].linf_c = 1.0;
  rows[2].l1_c = 5.0 * (1 + 1e-11);
  CHECK_FALSE(ledger_invariants(rows).find("l1_c_increase").pass);
}

TEST_CASE("sweep differences") {
  RunConfig cfg;
  cfg.grid = 8;
  cfg.t_end = 0.1;
  cfg.dt = 0.01;
  cfg.ledger_every = 2;

  SUBCASE("decoupled dynamics do not see tau") {
    cfg.sensitivity = "none";
    const auto res = sweep(cfg, SweepParam::tau, 2);
    CHECK_FALSE(res.partial);
    CHECK(res.ladder == std::vector<double>{0.1, 0.05, 0.025});
    for (const auto& [key, d] : res.differences) {
      REQUIRE(d.size() == 2);
      for (double v : d) CHECK(v == 0.0);
    }
    CHECK_FALSE(res.all_strictly_decreasing());
  }
  SUBCASE("epsilon enters nowhere for vanishing data") {
    cfg.initial = "zero";
    const auto res = sweep(cfg, SweepParam::epsilon, 2);
    for (const auto& [key, d] : res.differences)
      for (double v : d) CHECK(v == 0.0);
  }
  SUBCASE("blob tau ladder") {
    const auto res = sweep(cfg, SweepParam::tau, 2);
    CHECK(res.all_strictly_decreasing());
    std::ostringstream os;
    res.write_csv(os);
    CHECK(os.str().rfind("param,quantity,q,value_a,value_b,difference\n", 0) == 0);
  }
  SUBCASE("failing member gives a partial ladder") {
    cfg.initial_amplitude = 50;
    cfg.epsilon = 0.0;
    cfg.grid = 8;
    cfg.dt = 0.05;
    cfg.t_end = 1.0;
    cfg.tau = 1e-6;
    const auto res = sweep(cfg, SweepParam::tau, 1);
    CHECK(res.partial);
    CHECK_MESSAGE(res.failure.find("positivity") != std::string::npos, res.failure);
    CHECK_FALSE(res.all_strictly_decreasing());
  }
}

TEST_CASE("sweep difference norms") {
  auto g = Grid::make(8, 2.0);
  SweepTrajectory a, b;
  for (int k = 0; k < 3; ++k) {
    State sa = State::zero(g), sb = State::zero(g);
    sa.t = sb.t = 0.1 * k;
    sa.n = oracle::random_field(g, 10 + k, 0.0, 2.0);
    sb.n = oracle::random_field(g, 20 + k, 0.0, 2.0);
    sa.c = oracle::random_field(g, 30 + k, 0.0, 1.0);
    sb.c = oracle::random_field(g, 40 + k, 0.0, 1.0);
    sa.u = oracle::random_vector(g, 50 + k);
    sb.u = oracle::random_vector(g, 60 + k);
    a.samples.push_back(sa);
    b.samples.push_back(sb);
  }
  for (auto q : sweep_quantities())
    for (int p : {2, 3}) {
      const double ab = lq_difference(a, b, q, p), ba = lq_difference(b, a, q, p);
      CHECK(std::abs(ab - ba) <= 1e-13 * ab);
      CHECK(lq_difference(a, a, q, p) == 0.0);
    }
  // direct oracle for the density in L2L2: trapezoid weights 0.05, 0.1, 0.05
  double direct = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double w = k == 1 ? 0.1 : 0.05;
    for (std::size_t i = 0; i < g->size(); ++i)
      direct += w * std::pow(a.samples[k].n[i] - b.samples[k].n[i], 2) * g->cell_volume();
  }
  CHECK(lq_difference(a, b, SweepQuantity::n, 2) == doctest::Approx(std::sqrt(direct)).epsilon(1e-13));

  b.samples.pop_back();
  CHECK_THROWS_AS(lq_difference(a, b, SweepQuantity::n, 2), std::invalid_argument);
}

TEST_CASE("frozen-field limits behind the sweeps") {
  auto g = Grid::make(16, 2 * std::numbers::pi);
  const ScalarField n = oracle::band_limited_random(g, 2, 8, 2.0).map([](double v) { return 0.5 * std::abs(v); });
  double prev = 0.0;
  for (double tau : {0.01, 0.005, 0.0025, 0.00125}) {
    const double d = (log_consumption(n, tau) - n).max_abs();
    if (prev > 0.0) CHECK(prev / d == doctest::Approx(2.0).epsilon(0.05));
    prev = d;
  }
  const ScalarField f = oracle::band_limited_random(g, 3, 9);
  prev = 0.0;
  for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
    const double d = std::sqrt((mollify(f, eps) - f).l2_squared());
    if (prev > 0.0) CHECK(prev / d >= 3.0);
    prev = d;
  }
}

TEST_CASE("worker thread cap") {
  setenv("CNSR_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  setenv("CNSR_THREADS", "zero", 1);
  CHECK(worker_threads() >= 1);
  unsetenv("CNSR_THREADS");
  CHECK(worker_threads() >= 1);
}
