#pragma once

#include "cnsr/field.hpp"
#include "cnsr/sensitivities.hpp"
#include "cnsr/spectral.hpp"

namespace cnsr {

/// Regularization and forcing parameters of the mollified, tau-saturated system.
struct RegParams {
  double epsilon = 0.0;  ///< mollification length
  double tau = 0.0;      ///< saturation parameter; 0 selects the limiting system
  int mu = 1;            ///< 1: Navier-Stokes, 0: Stokes
  VectorField grad_phi;  ///< bounded potential gradient driving the buoyancy force -n grad(phi)

  /// Throws when mu is not 0/1, epsilon or tau are negative, or grad_phi is not finite.
  void validate() const;
};

/// One solver snapshot.
struct State {
  ScalarField n;  ///< cell density
  ScalarField c;  ///< oxygen concentration
  VectorField u;  ///< divergence-free velocity
  ScalarField p;  ///< mean-zero pressure
  double t = 0.0;

  const GridPtr& grid_ptr() const { return n.grid_ptr(); }
  const Grid& grid() const { return n.grid(); }
  static State zero(const GridPtr& grid);
};

struct Tendencies {
  ScalarField dn, dc;
  VectorField du;
};

/// Nonlinear and coupling part of the tendencies in spectral form: everything
/// except the diffusion terms. Dealiased; the velocity part is projected.
struct SpectralTendency {
  SpectralField n, c;
  SpectralVector u;
};

/// n / (1 + tau n) for n >= 0 (tau = 0 returns n).
double saturated_density(double n, double tau);
/// ln(1 + tau n) / tau for n >= 0 (tau = 0 returns n).
double log_consumption(double n, double tau);
/// Pointwise saturation; negative input is clipped to 0 first.
ScalarField saturated_density(const ScalarField& n, double tau);
ScalarField log_consumption(const ScalarField& n, double tau);

/// Mollified initial data: n0 * rho, (sqrt(c0) * rho)^2 and the projected
/// mollified velocity. Rejects negative n0 or c0.
State prepare_initial(const ScalarField& n0, const ScalarField& c0, const VectorField& u0, double epsilon);

/// mollify(n grad(phi), eps) with its box average removed. On the torus the
/// mean body force is balanced by a hydrostatic pressure gradient that has no
/// periodic representative, so it is dropped from the momentum balance.
VectorField effective_forcing(const ScalarField& n, const RegParams& rp);

SpectralTendency nonlinear_tendency(const State& s, const Sensitivities& sens, const RegParams& rp);

/// Full right-hand sides (diffusion included).
Tendencies rhs(const State& s, const Sensitivities& sens, const RegParams& rp);

/// Spectral coefficients of d_i d_j (mu (u_i * rho) u_j) + div(effective forcing).
SpectralField pressure_source(const State& s, const RegParams& rp);
/// Solves -Laplacian P = pressure_source with zero mean.
ScalarField recover_pressure(const State& s, const RegParams& rp);

}  // namespace cnsr
