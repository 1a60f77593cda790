#include "cnsr/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cnsr {

namespace {

SpectralField masked_spectral(const ScalarField& f) {
  SpectralField h = to_spectral(f);
  spectral::apply_mask(h);
  return h;
}

// Spectral divergence of a physical vector field, masked.
SpectralField masked_divergence(const VectorField& flux) {
  SpectralField d = spectral::divergence(to_spectral(flux));
  spectral::apply_mask(d);
  return d;
}

void check_sensitivity_range(const ScalarField& c, const Sensitivities& sens) {
  const double cmax = c.max();
  if (cmax > sens.s_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "rhs: oxygen concentration " << cmax << " exceeds the validated sensitivity range [0, " << sens.s_max
        << "]; the maximum principle was violated";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

void RegParams::validate() const {
  if (mu != 0 && mu != 1) throw std::invalid_argument("RegParams: mu must be 0 or 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("RegParams: epsilon must be >= 0");
  if (!(tau >= 0.0)) throw std::invalid_argument("RegParams: tau must be >= 0");
  require_finite(grad_phi, "RegParams: grad_phi");
}

State State::zero(const GridPtr& grid) {
  State s;
  s.n = ScalarField(grid);
  s.c = ScalarField(grid);
  s.u = VectorField(grid);
  s.p = ScalarField(grid);
  return s;
}

double saturated_density(double n, double tau) {
  n = std::max(n, 0.0);
  return tau == 0.0 ? n : n / (1.0 + tau * n);
}

double log_consumption(double n, double tau) {
  n = std::max(n, 0.0);
  return tau == 0.0 ? n : std::log1p(tau * n) / tau;
}

ScalarField saturated_density(const ScalarField& n, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("saturated_density: tau must be >= 0");
  return n.map([tau](double v) { return saturated_density(v, tau); });
}

ScalarField log_consumption(const ScalarField& n, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("log_consumption: tau must be >= 0");
  return n.map([tau](double v) { return log_consumption(v, tau); });
}

State prepare_initial(const ScalarField& n0, const ScalarField& c0, const VectorField& u0, double epsilon) {
  require_finite(n0, "prepare_initial: n0");
  require_finite(c0, "prepare_initial: c0");
  require_finite(u0, "prepare_initial: u0");
  if (n0.min() < 0.0) throw std::invalid_argument("prepare_initial: n0 has negative values");
  if (c0.min() < 0.0) throw std::invalid_argument("prepare_initial: c0 has negative values");

  State s;
  s.n = mollify(n0, epsilon);
  const ScalarField root = mollify(c0.map([](double v) { return std::sqrt(v); }), epsilon);
  s.c = root.map([](double v) { return v * v; });
  s.u = leray_project(mollify(u0, epsilon));
  s.p = ScalarField(n0.grid_ptr());
  s.t = 0.0;
  return s;
}

VectorField effective_forcing(const ScalarField& n, const RegParams& rp) {
  VectorField f;
  for (int a = 0; a < 3; ++a) {
    SpectralField h = to_spectral(pointwise(n, rp.grad_phi[a]));
    spectral::apply_mask(h);
    spectral::apply_mollifier(h, rp.epsilon);
    h[0] = 0.0;
    f[a] = to_physical(h);
  }
  return f;
}

SpectralTendency nonlinear_tendency(const State& s, const Sensitivities& sens, const RegParams& rp) {
  check_sensitivity_range(s.c, sens);
  const GridPtr& grid = s.grid_ptr();

  // Mollified advecting velocity.
  SpectralVector uh = to_spectral(s.u);
  VectorField v;
  for (int a = 0; a < 3; ++a) {
    SpectralField h = uh[a];
    spectral::apply_mollifier(h, rp.epsilon);
    v[a] = to_physical(h);
  }

  const ScalarField n_pos = s.n.map([](double x) { return std::max(x, 0.0); });
  const ScalarField c_pos = s.c.map([](double x) { return std::max(x, 0.0); });
  const VectorField grad_c = gradient(s.c, Dealias::apply);

  SpectralTendency out;

  // Advection is written in divergence form; both advecting fields are solenoidal.
  ScalarField chemo_weight(grid);
  for (std::size_t i = 0; i < chemo_weight.size(); ++i)
    chemo_weight[i] = saturated_density(n_pos[i], rp.tau) * sens.chi(c_pos[i]);
  VectorField n_flux = scale(s.n, v) + scale(chemo_weight, grad_c);
  out.n = masked_divergence(n_flux);
  out.n *= -1.0;

  ScalarField reaction(grid);
  for (std::size_t i = 0; i < reaction.size(); ++i)
    reaction[i] = log_consumption(n_pos[i], rp.tau) * sens.kappa(c_pos[i]);
  out.c = masked_divergence(scale(s.c, s.u));
  out.c += masked_spectral(reaction);
  out.c *= -1.0;

  const VectorField force = effective_forcing(s.n, rp);
  for (int i = 0; i < 3; ++i) {
    SpectralField ti = to_spectral(force[i]);
    if (rp.mu != 0) ti += masked_divergence(scale(s.u[i], v));
    ti *= -1.0;
    out.u[static_cast<std::size_t>(i)] = std::move(ti);
  }
  spectral::apply_leray(out.u);
  return out;
}

Tendencies rhs(const State& s, const Sensitivities& sens, const RegParams& rp) {
  SpectralTendency nl = nonlinear_tendency(s, sens, rp);
  const auto k2 = s.grid().k_squared();
  auto add_diffusion = [&](SpectralField& t, const ScalarField& q) {
    const SpectralField qh = to_spectral(q);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= k2[i] * qh[i];
  };
  add_diffusion(nl.n, s.n);
  add_diffusion(nl.c, s.c);
  for (int a = 0; a < 3; ++a) add_diffusion(nl.u[static_cast<std::size_t>(a)], s.u[a]);
  Tendencies out;
  out.dn = to_physical(nl.n);
  out.dc = to_physical(nl.c);
  out.du = to_physical(nl.u);
  return out;
}

SpectralField pressure_source(const State& s, const RegParams& rp) {
  const Grid& g = s.grid();
  SpectralField src = spectral::divergence(to_spectral(effective_forcing(s.n, rp)));
  if (rp.mu != 0) {
    const VectorField v = mollify(s.u, rp.epsilon);
    const auto kx = g.kx_odd();
    const auto ky = g.ky_odd();
    const auto kz = g.kz_odd();
    const std::array<std::span<const double>, 3> k{kx, ky, kz};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const SpectralField prod = to_spectral(pointwise(v[i], s.u[j]));
        for (std::size_t m = 0; m < src.size(); ++m) src[m] -= k[i][m] * k[j][m] * prod[m];
      }
    }
  }
  spectral::apply_mask(src);
  src[0] = 0.0;
  return src;
}

ScalarField recover_pressure(const State& s, const RegParams& rp) {
  SpectralField ph = pressure_source(s, rp);
  const auto k2 = s.grid().k_squared();
  for (std::size_t m = 0; m < ph.size(); ++m) ph[m] = k2[m] == 0.0 ? Complex(0.0) : ph[m] / k2[m];
  return to_physical(ph);
}

}  // namespace cnsr
