#include <cmath>
#include <numbers>

#include "cnsr/presets.hpp"
#include "cnsr/timestepper.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cnsr;

namespace {

const double pi = std::numbers::pi;

struct Setup {
  GridPtr g;
  Sensitivities sens;
  RegParams rp;
  State s0;
};

Setup coupled(int n, const std::string& initial = "blob") {
  Setup su{Grid::make(n, 2 * pi), Sensitivities::preset("linear"), {}, {}};
  su.rp.epsilon = 0.2;
  su.rp.tau = 0.1;
  su.rp.mu = 1;
  su.rp.grad_phi = grad_phi_preset("gravity", su.g, 1.0);
  auto d = initial_preset(initial, su.g);
  su.s0 = prepare_initial(d.n0, d.c0, d.u0, su.rp.epsilon);
  return su;
}

double state_distance(const State& a, const State& b) {
  double s = (a.n - b.n).l2_squared() + (a.c - b.c).l2_squared() + (a.u - b.u).l2_squared();
  return std::sqrt(s);
}

State run(const Setup& su, double dt, double T, int order) {
  StepConfig cfg;
  cfg.dt = dt;
  cfg.t_end = T;
  cfg.scheme_order = order;
  return advance(su.s0, cfg, su.sens, su.rp, PositivityPolicy::from_initial(su.s0));
}

}  // namespace

TEST_CASE("zero state stays zero") {
  auto g = Grid::make(8, 1.0);
  RegParams rp;
  rp.grad_phi = grad_phi_preset("gravity", g, 1.0);
  StepConfig cfg;
  cfg.dt = 0.01;
  auto s = step(State::zero(g), cfg, Sensitivities::preset("linear"), rp, PositivityPolicy{});
  CHECK(s.t == doctest::Approx(0.01));
  CHECK(s.n.max_abs() == 0.0);
  CHECK(s.c.max_abs() == 0.0);
  CHECK(s.u.max_magnitude() == 0.0);
  CHECK(s.p.max_abs() == 0.0);
}

TEST_CASE("decoupled heat flow is exact") {
  auto g = Grid::make(8, 2 * pi);
  RegParams rp;
  rp.grad_phi = VectorField(g);
  auto s = State::zero(g);
  s.n = ScalarField::from_function(g, [](double x, double, double) { return std::sin(x); });
  for (int order : {1, 2}) {
    StepConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 0.5;
    cfg.scheme_order = order;
    auto out = advance(s, cfg, Sensitivities::preset("none"), rp, PositivityPolicy::disabled());
    CHECK(out.t == doctest::Approx(0.5));
    CHECK((out.n - s.n * std::exp(-0.5)).max_abs() < 1e-10);
  }
}

TEST_CASE("self-convergence order") {
  auto su = coupled(16);
  const double T = 0.1;
  for (int order : {1, 2}) {
    const double dt = 0.02;
    auto a = run(su, dt, T, order);
    auto b = run(su, dt / 2, T, order);
    auto c = run(su, dt / 4, T, order);
    const double ratio = state_distance(a, b) / state_distance(b, c);
    MESSAGE("order " << order << " ratio " << ratio);
    if (order == 1) {
      CHECK(ratio >= 1.7);
      CHECK(ratio <= 2.3);
    } else {
      CHECK(ratio >= 3.4);
      CHECK(ratio <= 4.6);
    }
  }
}

TEST_CASE("per-step invariants on a coupled run") {
  auto su = coupled(16);
  StepConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.3;
  const double mass0 = su.s0.n.integral();
  double l1c = su.s0.c.integral(), maxc = su.s0.c.max();
  const double l1c0 = l1c, maxc0 = maxc;
  long count = 0;
  advance(su.s0, cfg, su.sens, su.rp, PositivityPolicy::from_initial(su.s0), [&](long, const State& s) {
    ++count;
    CHECK(std::abs(s.n.integral() - mass0) <= 1e-12 * mass0);
    CHECK(s.c.integral() <= l1c + 1e-12 * l1c0);
    CHECK(s.c.max() <= maxc + 1e-8 * maxc0);
    CHECK(divergence(s.u).max_abs() <= 1e-12);
    CHECK(std::abs(s.p.mean()) <= 1e-13);
    CHECK(s.n.min() >= 0.0);
    CHECK(s.c.min() >= 0.0);
    l1c = s.c.integral();
    maxc = s.c.max();
  });
  CHECK(count == 30);
}

TEST_CASE("kinetic energy decays without coupling") {
  auto su = coupled(16, "taylor-green-u");
  su.sens = Sensitivities::preset("none");
  su.rp.grad_phi = VectorField(su.g);
  StepConfig cfg;
  cfg.dt = 0.02;
  cfg.t_end = 0.4;
  double prev = su.s0.u.l2_squared();
  CHECK(prev > 0.0);
  advance(su.s0, cfg, su.sens, su.rp, PositivityPolicy::from_initial(su.s0), [&](long, const State& s) {
    CHECK(s.u.l2_squared() <= prev);
    prev = s.u.l2_squared();
  });
}

TEST_CASE("choose_dt") {
  auto g = Grid::make(16, 1.6);  // dx = 0.1
  auto sens = Sensitivities::preset("linear");
  StepConfig cfg;
  cfg.dt = 0.3;
  cfg.safety = 0.5;
  CHECK(choose_dt(State::zero(g), cfg, sens) == 0.3);

  auto s = State::zero(g);
  s.u[0] = ScalarField(g, 10.0);
  CHECK(choose_dt(s, cfg, sens) <= 5e-3 + 1e-15);

  auto r = State::zero(g);
  r.c = oracle::band_limited_random(g, 3, 12, 10.0);
  r.u = leray_project(oracle::random_vector(g, 99));
  const double dt = choose_dt(r, cfg, sens);
  CHECK(dt > 0.0);
  CHECK(dt <= cfg.dt);
  CHECK(dt <= cfg.safety * g->dx() / r.u.max_magnitude() * (1 + 1e-15));
  auto gc = gradient(r.c);
  CHECK(dt <= cfg.safety * g->dx() / gc.max_magnitude() * (1 + 1e-15));
}

TEST_CASE("abort paths keep the last good state") {
  auto su = coupled(8);
  StepConfig cfg;
  cfg.dt = 0.01;
  SUBCASE("positivity") {
    auto s = su.s0;
    s.t = 0.25;
    for (std::size_t i = 0; i < s.n.size(); ++i) s.n[i] -= 0.45;  // blob background 0.5 becomes barely positive
    // a strong negative dip that diffusion cannot fill in one step
    s.n[0] = -1.0;
    try {
      step(s, cfg, su.sens, su.rp, PositivityPolicy::from_initial(su.s0));
      FAIL("expected abort");
    } catch (const SolverAbort& e) {
      CHECK(e.kind() == AbortKind::positivity);
      CHECK(e.last_good().t == 0.25);
    }
  }
  SUBCASE("cfl") {
    auto s = su.s0;
    s.u[0] = ScalarField(su.g, 1e3);
    CHECK_THROWS_AS(step(s, cfg, su.sens, su.rp, PositivityPolicy{}), SolverAbort);
  }
  SUBCASE("small negatives are clipped") {
    auto s = State::zero(su.g);
    s.c = ScalarField(su.g, 1.0);
    s.c[7] = -1e-12;
    auto out = step(s, cfg, Sensitivities::preset("none"), su.rp, PositivityPolicy{0.0, 1e-10, true});
    CHECK(out.c.min() >= 0.0);
  }
  CHECK_THROWS_AS(step(su.s0, StepConfig{-1.0}, su.sens, su.rp, PositivityPolicy{}), std::invalid_argument);
}
