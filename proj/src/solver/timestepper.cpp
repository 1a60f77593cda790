#include "cnsr/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cnsr {

namespace {

struct SpectralState {
  SpectralField n, c;
  SpectralVector u;
};

SpectralState transform(const State& s) { return {to_spectral(s.n), to_spectral(s.c), to_spectral(s.u)}; }

State back(const SpectralState& q, const State& like, double t) {
  State s;
  s.n = to_physical(q.n);
  s.c = to_physical(q.c);
  s.u = to_physical(q.u);
  s.p = ScalarField(like.grid_ptr());
  s.t = t;
  return s;
}

void for_each(SpectralState& q, const std::function<void(SpectralField&)>& f) {
  f(q.n);
  f(q.c);
  for (auto& ui : q.u) f(ui);
}

// q += h * nl
void add_scaled(SpectralState& q, const SpectralTendency& nl, double h) {
  q.n.add_scaled(nl.n, h);
  q.c.add_scaled(nl.c, h);
  for (std::size_t a = 0; a < 3; ++a) q.u[a].add_scaled(nl.u[a], h);
}

void check_finite(const State& s, const State& last, const char* stage) {
  bool ok = all_finite(s.n) && all_finite(s.c);
  for (int a = 0; a < 3; ++a) ok = ok && all_finite(s.u[a]);
  if (!ok) {
    std::ostringstream msg;
    msg << "step: non-finite values in the " << stage << " state at t = " << last.t;
    throw SolverAbort(AbortKind::non_finite, msg.str(), last);
  }
}

void check_cfl(const State& s, double dt, const State& last) {
  const double courant = s.u.max_magnitude() * dt / s.grid().dx();
  if (courant > 1.0) {
    std::ostringstream msg;
    msg << "step: Courant number " << courant << " exceeds 1 at t = " << last.t << " (dt = " << dt << ")";
    throw SolverAbort(AbortKind::cfl, msg.str(), last);
  }
}

void clip(ScalarField& f, double tol, const char* name, const State& last) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] >= 0.0) continue;
    if (-f[i] > tol) {
      std::ostringstream msg;
      msg << "step: " << name << " = " << f[i] << " at index " << i << " is below -" << tol << " (t = " << last.t
          << ")";
      throw SolverAbort(AbortKind::positivity, msg.str(), last);
    }
    f[i] = 0.0;
  }
}

}  // namespace

void StepConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("StepConfig: dt must be positive");
  if (!(safety > 0.0 && safety < 1.0)) throw std::invalid_argument("StepConfig: safety must lie in (0, 1)");
  if (scheme_order != 1 && scheme_order != 2) throw std::invalid_argument("StepConfig: scheme_order must be 1 or 2");
  if (!(t_end >= 0.0)) throw std::invalid_argument("StepConfig: t_end must be >= 0");
  if (!(u_floor > 0.0)) throw std::invalid_argument("StepConfig: u_floor must be positive");
}

PositivityPolicy PositivityPolicy::from_initial(const State& s0) {
  return {1e-10 * s0.n.max_abs(), 1e-10 * s0.c.max_abs(), true};
}

const char* to_string(AbortKind k) {
  switch (k) {
    case AbortKind::positivity: return "positivity";
    case AbortKind::non_finite: return "non-finite";
    case AbortKind::cfl: return "cfl";
  }
  return "unknown";
}

State step(const State& s, const StepConfig& cfg, const Sensitivities& sens, const RegParams& rp,
           const PositivityPolicy& policy) {
  cfg.validate();
  const double dt = cfg.dt;
  check_cfl(s, dt, s);

  const SpectralState q0 = transform(s);
  const SpectralTendency n0 = nonlinear_tendency(s, sens, rp);
  SpectralState q1 = q0;

  if (cfg.scheme_order == 1) {
    add_scaled(q1, n0, dt);
    for_each(q1, [dt](SpectralField& f) { spectral::apply_heat(f, dt); });
  } else {
    SpectralState qh = q0;
    add_scaled(qh, n0, 0.5 * dt);
    for_each(qh, [dt](SpectralField& f) { spectral::apply_heat(f, 0.5 * dt); });
    const State mid = back(qh, s, s.t + 0.5 * dt);
    check_finite(mid, s, "midpoint");
    check_cfl(mid, dt, s);

    SpectralTendency nh = nonlinear_tendency(mid, sens, rp);
    spectral::apply_heat(nh.n, 0.5 * dt);
    spectral::apply_heat(nh.c, 0.5 * dt);
    for (auto& ui : nh.u) spectral::apply_heat(ui, 0.5 * dt);
    for_each(q1, [dt](SpectralField& f) { spectral::apply_heat(f, dt); });
    add_scaled(q1, nh, dt);
  }
  spectral::apply_leray(q1.u);

  State out = back(q1, s, s.t + dt);
  check_finite(out, s, "updated");
  if (policy.enabled) {
    clip(out.n, policy.tol_n, "n", s);
    clip(out.c, policy.tol_c, "c", s);
  }
  out.p = recover_pressure(out, rp);
  return out;
}

double choose_dt(const State& s, const StepConfig& cfg, const Sensitivities& sens) {
  const double dx = s.grid().dx();
  double dt = cfg.dt;
  dt = std::min(dt, cfg.safety * dx / std::max(s.u.max_magnitude(), cfg.u_floor));
  const VectorField gc = gradient(s.c);
  double drift = 0.0;
  for (std::size_t i = 0; i < s.c.size(); ++i) {
    const double g = std::sqrt(gc[0][i] * gc[0][i] + gc[1][i] * gc[1][i] + gc[2][i] * gc[2][i]);
    drift = std::max(drift, std::abs(sens.chi(std::max(s.c[i], 0.0))) * g);
  }
  dt = std::min(dt, cfg.safety * dx / std::max(drift, cfg.u_floor));
  return dt;
}

State advance(State s, const StepConfig& cfg, const Sensitivities& sens, const RegParams& rp,
              const PositivityPolicy& policy, const StepObserver& observer) {
  cfg.validate();
  if (s.p.size() == 0) s.p = recover_pressure(s, rp);
  long k = 0;
  if (!cfg.adaptive) {
    const long steps = std::lround((cfg.t_end - s.t) / cfg.dt);
    const double t0 = s.t;
    for (k = 1; k <= steps; ++k) {
      s = step(s, cfg, sens, rp, policy);
      s.t = t0 + static_cast<double>(k) * cfg.dt;
      if (observer) observer(k, s);
    }
    return s;
  }
  StepConfig local = cfg;
  while (s.t < cfg.t_end - 1e-12 * std::max(1.0, cfg.t_end)) {
    local.dt = std::min(choose_dt(s, cfg, sens), cfg.t_end - s.t);
    s = step(s, local, sens, rp, policy);
    if (observer) observer(++k, s);
  }
  return s;
}

}  // namespace cnsr
