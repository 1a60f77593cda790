#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cnsr/lei.hpp"
#include "cnsr/presets.hpp"
#include "cnsr/timestepper.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cnsr;

namespace {

const double pi = std::numbers::pi;

struct Run {
  GridPtr g;
  Sensitivities sens;
  RegParams rp;
  std::vector<State> traj;
  double c0_inf = 0.0;
};

Run blob_run(int n, double dt, double T, int mu = 1) {
  Run r{Grid::make(n, 2 * pi), Sensitivities::preset("linear"), {}, {}};
  r.rp.epsilon = 0.2;
  r.rp.tau = 0.1;
  r.rp.mu = mu;
  r.rp.grad_phi = grad_phi_preset("gravity", r.g, 1.0);
  auto d = initial_preset("blob", r.g);
  State s0 = prepare_initial(d.n0, d.c0, d.u0, r.rp.epsilon);
  s0.p = recover_pressure(s0, r.rp);
  r.c0_inf = s0.c.max_abs();
  StepConfig cfg;
  cfg.dt = dt;
  cfg.t_end = T;
  r.traj.push_back(s0);
  advance(s0, cfg, r.sens, r.rp, PositivityPolicy::from_initial(s0), [&](long, const State& s) { r.traj.push_back(s); });
  return r;
}

LeiOptions options(const Run& r) {
  LeiOptions o;
  o.c0_inf = r.c0_inf;
  o.c_floor = 1e-12 * r.c0_inf;
  return o;
}

}  // namespace

TEST_CASE("cut-off function shape") {
  const double L = 2 * pi;
  auto psi = make_psi({1.0, 2.0, 6.0}, 1.5, 0.2, 0.8, L);
  CHECK(psi.value(1.0, 2.0, 6.0, 0.8) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(psi.value(1.0, 2.0, 6.0, 0.2) == 0.0);
  CHECK(psi.value(1.0, 2.0, 6.0, 0.1) == 0.0);
  CHECK(psi.value(1.0, 2.0, 6.0, 0.9) == doctest::Approx(1.0).epsilon(1e-15));
  // nearest periodic image: 6.0 + 1.0 wraps to 7.0 - L
  CHECK(psi.value(1.0, 2.0, 7.0 - L, 0.8) == doctest::Approx(psi.value(1.0, 2.0, 7.0, 0.8)).epsilon(1e-14));
  CHECK(psi.value(1.0, 2.0, 7.0 - L, 0.8) > 0.0);
  CHECK(psi.value(1.0 + 1.5, 2.0, 6.0, 0.8) == 0.0);
  CHECK(psi.value(1.0, 2.0 - 1.6, 6.0, 0.8) == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.0, L), ut(0.0, 1.0);
  double peak = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double v = psi.value(ux(rng), ux(rng), ux(rng), ut(rng));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    peak = std::max(peak, v);
  }
  CHECK(peak > 0.0);
  auto scaled = make_psi({1.0, 2.0, 6.0}, 1.5, 0.2, 0.8, L, 4.0, 2.5);
  CHECK(scaled.value(1.0, 2.0, 6.0, 0.8) == doctest::Approx(2.5));
}

TEST_CASE("cut-off derivatives match finite differences") {
  const double L = 2 * pi;
  for (double p : {3.0, 4.0, 5.5}) {
    auto psi = make_psi({0.5, 3.0, 5.9}, 2.0, 0.1, 0.7, L, p);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.0, L), ut(0.0, 0.8);
    const double h = 1e-4;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double x = ux(rng), y = ux(rng), z = ux(rng), t = ut(rng);
      const auto P = psi.eval(x, y, z, t);
      auto f = [&](double a, double b, double c, double s) { return psi.value(a, b, c, s); };
      const double dt = (f(x, y, z, t + h) - f(x, y, z, t - h)) / (2 * h);
      const double gx = (f(x + h, y, z, t) - f(x - h, y, z, t)) / (2 * h);
      const double gy = (f(x, y + h, z, t) - f(x, y - h, z, t)) / (2 * h);
      const double gz = (f(x, y, z + h, t) - f(x, y, z - h, t)) / (2 * h);
      const double c = f(x, y, z, t);
      const double lap = (f(x + h, y, z, t) + f(x - h, y, z, t) + f(x, y + h, z, t) + f(x, y - h, z, t) +
                          f(x, y, z + h, t) + f(x, y, z - h, t) - 6 * c) / (h * h);
      worst = std::max({worst, std::abs(dt - P.dt), std::abs(gx - P.grad[0]), std::abs(gy - P.grad[1]),
                        std::abs(gz - P.grad[2])});
      worst = std::max(worst, std::abs(lap - P.lap) * 1e-2);
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("cut-off preconditions") {
  const double L = 4.0;
  CHECK_THROWS_AS(make_psi({0, 0, 0}, 2.0, 0.0, 1.0, L), std::invalid_argument);
  CHECK_THROWS_AS(make_psi({0, 0, 0}, 0.0, 0.0, 1.0, L), std::invalid_argument);
  CHECK_THROWS_AS(make_psi({0, 0, 0}, 1.0, 1.0, 1.0, L), std::invalid_argument);
  CHECK_THROWS_AS(make_psi({0, 0, 0}, 1.0, 0.0, 1.0, L, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(make_psi({0, 0, 0}, 1.0, 0.0, 1.0, L, 3.0, -1.0), std::invalid_argument);
  CHECK_NOTHROW(make_psi({0, 0, 0}, 1.99, 0.0, 1.0, L));
}

TEST_CASE("random cut-off suite") {
  const double L = 2 * pi, T = 0.5, dt = 0.01;
  auto suite = random_psi_suite(40, 9, L, T, dt);
  REQUIRE(suite.size() == 40);
  for (const auto& p : suite) {
    CHECK(p.r >= 0.2 * L - 1e-12);
    CHECK(p.r <= 0.45 * L + 1e-12);
    CHECK(p.t1 >= 0.0);
    CHECK(p.t2 <= T + 1e-12);
    CHECK(p.t1 < p.t2);
    CHECK(std::abs(p.t1 / dt - std::round(p.t1 / dt)) < 1e-9);
    CHECK(std::abs(p.t2 / dt - std::round(p.t2 / dt)) < 1e-9);
    for (double c : p.center) {
      CHECK(c >= 0.0);
      CHECK(c < L);
    }
  }
  auto again = random_psi_suite(40, 9, L, T, dt);
  CHECK(again[17].center == suite[17].center);
  CHECK_THROWS_AS(random_psi_suite(3, 1, L, 0.01, dt), std::invalid_argument);
}

TEST_CASE("local inequality terms vanish for trivial input") {
  auto g = Grid::make(8, 2 * pi);
  auto sens = Sensitivities::preset("linear");
  RegParams rp;
  rp.epsilon = 0.2;
  rp.tau = 0.1;
  rp.grad_phi = grad_phi_preset("gravity", g, 1.0);
  std::vector<State> traj;
  for (int k = 0; k <= 4; ++k) {
    auto s = State::zero(g);
    s.t = 0.1 * k;
    traj.push_back(s);
  }
  LeiOptions o;
  o.c0_inf = 1.0;
  o.c_floor = 1e-12;
  auto reps = evaluate_lei(traj, {make_psi({3, 3, 3}, 2.0, 0.0, 0.4, 2 * pi)}, sens, rp, o);
  for (const auto& [name, v] : reps.at(0).named_terms())
    if (name != "lhs_entropy_shifted") CHECK_MESSAGE(v == 0.0, name);
  CHECK(reps[0].lhs_entropy_shifted > 0.0);

  auto r = blob_run(8, 0.02, 0.1);
  auto zero_amp = evaluate_lei(r.traj, {make_psi({3, 3, 3}, 2.0, 0.0, 0.1, 2 * pi, 3.0, 0.0)}, r.sens, r.rp, options(r));
  for (const auto& [name, v] : zero_amp.at(0).named_terms()) CHECK_MESSAGE(v == 0.0, name);
}

TEST_CASE("final-time terms match direct summation") {
  auto r = blob_run(8, 0.02, 0.1);
  const auto& s = r.traj.back();
  const auto psi = make_psi({2.0, 3.5, 4.0}, 2.5, 0.0, s.t, 2 * pi);
  auto rep = evaluate_lei(r.traj, {psi}, r.sens, r.rp, options(r)).at(0);
  const Grid& g = s.grid();
  std::array<ScalarField, 3> d;
  const ScalarField sc = s.c.map([](double v) { return std::sqrt(std::max(v, 0.0)); });
  for (int a = 0; a < 3; ++a) d[a] = oracle::direct_derivative(sc, a);
  double ent = 0, gsc = 0, kin = 0;
  for (int iz = 0; iz < g.n(); ++iz)
    for (int iy = 0; iy < g.n(); ++iy)
      for (int ix = 0; ix < g.n(); ++ix) {
        const std::size_t i = g.index(ix, iy, iz);
        const double w = psi.value(g.coordinate(ix), g.coordinate(iy), g.coordinate(iz), s.t) * g.cell_volume();
        const double n = std::max(s.n[i], 0.0);
        ent += (n > 0 ? n * std::log(n) : 0.0) * w;
        gsc += 2.0 * (d[0][i] * d[0][i] + d[1][i] * d[1][i] + d[2][i] * d[2][i]) * w;
        kin += 18.0 * r.c0_inf * (s.u[0][i] * s.u[0][i] + s.u[1][i] * s.u[1][i] + s.u[2][i] * s.u[2][i]) * w;
      }
  CHECK(rep.lhs_entropy == doctest::Approx(ent).epsilon(1e-12));
  CHECK(rep.lhs_grad_sqrt_c == doctest::Approx(gsc).epsilon(1e-10));
  CHECK(rep.lhs_kinetic == doctest::Approx(kin).epsilon(1e-12));
}

TEST_CASE("local inequality structure") {
  auto r = blob_run(16, 0.01, 0.2);
  auto psis = random_psi_suite(6, 3, 2 * pi, 0.2, 0.01);
  auto reps = evaluate_lei(r.traj, psis, r.sens, r.rp, options(r));
  REQUIRE(reps.size() == psis.size());

  SUBCASE("signed terms") {
    for (const auto& rep : reps) {
      CHECK(rep.lhs_fisher_n >= 0.0);
      CHECK(rep.lhs_grad_sqrt_c >= 0.0);
      CHECK(rep.lhs_lap_sqrt_c >= 0.0);
      CHECK(rep.lhs_quartic_c >= 0.0);
      CHECK(rep.lhs_kinetic >= 0.0);
      CHECK(rep.lhs_grad_u >= 0.0);
      CHECK(rep.lhs_entropy_shifted >= 0.0);
      CHECK(rep.lhs_quartic_c_diag >= 0.0);
      CHECK(rep.lhs_quartic_c_diag <= rep.lhs_quartic_c * (1 + 1e-12));
      CHECK(rep.lhs_quartic_c_diag >= rep.lhs_quartic_c / 3.0 * (1 - 1e-12));
      CHECK(rep.residual == doctest::Approx(rep.rhs_total - rep.lhs_total));
    }
  }
  SUBCASE("pressure is defined up to a constant") {
    auto shifted = r.traj;
    for (auto& s : shifted) s.p += 3.0;
    LeiAccumulator acc(psis, r.sens, r.rp, options(r));
    for (const auto& s : shifted) acc.add(s);
    auto other = acc.finish();
    for (std::size_t k = 0; k < reps.size(); ++k)
      CHECK(other[k].rhs_pressure_work == doctest::Approx(reps[k].rhs_pressure_work).epsilon(1e-12));
    CHECK_THROWS_AS(evaluate_lei(shifted, psis, r.sens, r.rp, options(r)), std::invalid_argument);
  }
  SUBCASE("linear in the cut-off amplitude") {
    std::vector<CutoffPsi> scaled = psis;
    for (auto& p : scaled) p.amplitude = 2.5;
    auto other = evaluate_lei(r.traj, scaled, r.sens, r.rp, options(r));
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const auto a = reps[k].named_terms(), b = other[k].named_terms();
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j].first == "eta" || a[j].first == "lhs_entropy_shifted") continue;
        // defects and totals are differences of O(1) terms, so compare against the term scale
        const double scale = std::abs(reps[k].lhs_total) + std::abs(reps[k].rhs_total) + std::abs(a[j].second);
        CHECK_MESSAGE(std::abs(b[j].second - 2.5 * a[j].second) <= 1e-12 * scale, a[j].first);
      }
    }
  }
  SUBCASE("exact identities hold up to discretization error") {
    for (const auto& rep : reps) {
      const double scale_n = std::abs(rep.lhs_entropy) + rep.lhs_fisher_n + std::abs(rep.rhs_entropy_heat) +
                             std::abs(rep.rhs_chemo) + std::abs(rep.cross_term);
      CHECK(std::abs(rep.defect_n) < 2e-2 * scale_n);
      const double scale_u = rep.lhs_kinetic + rep.lhs_grad_u + std::abs(rep.rhs_kinetic_heat) +
                             std::abs(rep.rhs_gravity_work);
      CHECK(18.0 * r.c0_inf * std::abs(rep.defect_u) < 2e-2 * scale_u);
    }
  }
  SUBCASE("limit form swaps the advecting velocity") {
    auto o = options(r);
    o.limit_form = true;
    auto lim = evaluate_lei(r.traj, psis, r.sens, r.rp, o);
    for (std::size_t k = 0; k < reps.size(); ++k) {
      CHECK(lim[k].rhs_grad_sqrt_c_transport == doctest::Approx(reps[k].rhs_grad_sqrt_c_transport_alt));
      CHECK(lim[k].rhs_grad_sqrt_c_transport_alt == doctest::Approx(reps[k].rhs_grad_sqrt_c_transport));
      CHECK(lim[k].defect_n == doctest::Approx(reps[k].defect_n));
      CHECK(lim[k].lhs_fisher_n == reps[k].lhs_fisher_n);
    }
  }
}

TEST_CASE("local inequality snapshot coverage") {
  auto r = blob_run(8, 0.02, 0.1);
  const double L = 2 * pi;
  auto o = options(r);
  SUBCASE("window end not sampled") {
    CHECK_THROWS_AS(evaluate_lei(r.traj, {make_psi({3, 3, 3}, 2.0, 0.0, 0.05, L)}, r.sens, r.rp, o),
                    std::invalid_argument);
    CHECK_THROWS_AS(evaluate_lei(r.traj, {make_psi({3, 3, 3}, 2.0, 0.0, 0.2, L)}, r.sens, r.rp, o),
                    std::invalid_argument);
  }
  SUBCASE("window start after first snapshot") {
    auto late = std::vector<State>(r.traj.begin() + 2, r.traj.end());
    CHECK_THROWS_AS(evaluate_lei(late, {make_psi({3, 3, 3}, 2.0, 0.0, 0.1, L)}, r.sens, r.rp, o),
                    std::invalid_argument);
    CHECK_NOTHROW(evaluate_lei(late, {make_psi({3, 3, 3}, 2.0, 0.04, 0.1, L)}, r.sens, r.rp, o));
    // t1 between two snapshots: psi vanishes at the earlier one
    CHECK_NOTHROW(evaluate_lei(r.traj, {make_psi({3, 3, 3}, 2.0, 0.03, 0.1, L)}, r.sens, r.rp, o));
  }
  SUBCASE("gaps and ordering") {
    auto holey = r.traj;
    holey.erase(holey.begin() + 2);
    o.max_gap = 0.02;
    CHECK_THROWS_AS(evaluate_lei(holey, {make_psi({3, 3, 3}, 2.0, 0.0, 0.1, L)}, r.sens, r.rp, o),
                    std::invalid_argument);
    CHECK_NOTHROW(evaluate_lei(r.traj, {make_psi({3, 3, 3}, 2.0, 0.0, 0.1, L)}, r.sens, r.rp, o));
    auto reversed = r.traj;
    std::swap(reversed[1], reversed[2]);
    o.max_gap = 0.0;
    CHECK_THROWS_AS(evaluate_lei(reversed, {make_psi({3, 3, 3}, 2.0, 0.0, 0.1, L)}, r.sens, r.rp, o),
                    std::invalid_argument);
  }
  SUBCASE("csv output") {
    auto reps = evaluate_lei(r.traj, random_psi_suite(2, 1, L, 0.1, 0.02), r.sens, r.rp, o);
    std::ostringstream os;
    write_lei_csv(os, reps);
    std::istringstream is(os.str());
    std::string header, line;
    std::getline(is, header);
    CHECK(header.rfind("psi,cx,cy,cz,r,t1,t2,lhs_entropy,", 0) == 0);
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 2);
  }
}
