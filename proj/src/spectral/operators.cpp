#include <cmath>
#include <stdexcept>
#include <string>

#include "cnsr/spectral.hpp"

namespace cnsr {

namespace spectral {

namespace {

std::span<const double> odd_wavenumbers(const Grid& g, int axis) {
  switch (axis) {
    case 0: return g.kx_odd();
    case 1: return g.ky_odd();
    case 2: return g.kz_odd();
    default: throw std::invalid_argument("derivative: axis must be 0, 1 or 2");
  }
}

}  // namespace

void apply_mask(SpectralField& f) {
  const auto mask = f.grid().dealias_mask();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (mask[i] == 0) f[i] = 0.0;
}

void apply_heat(SpectralField& f, double t, double nu) {
  const auto k2 = f.grid().k_squared();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::exp(-nu * t * k2[i]);
}

void apply_mollifier(SpectralField& f, double eps) {
  if (eps == 0.0) return;
  const auto k2 = f.grid().k_squared();
  const double half_eps2 = 0.5 * eps * eps;
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::exp(-half_eps2 * k2[i]);
}

void apply_leray(SpectralVector& v) {
  // Uses the Nyquist-free wavenumbers of the spectral divergence, so the
  // projector stays Hermitian-consistent and the result is exactly solenoidal.
  const Grid& g = v[0].grid();
  const auto kx = g.kx_odd();
  const auto ky = g.ky_odd();
  const auto kz = g.kz_odd();
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double k2 = kx[i] * kx[i] + ky[i] * ky[i] + kz[i] * kz[i];
    if (k2 == 0.0) continue;
    const Complex kv = (kx[i] * v[0][i] + ky[i] * v[1][i] + kz[i] * v[2][i]) / k2;
    v[0][i] -= kx[i] * kv;
    v[1][i] -= ky[i] * kv;
    v[2][i] -= kz[i] * kv;
  }
}

void apply_frac_laplacian(SpectralField& f, double s) {
  const auto k2 = f.grid().k_squared();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= k2[i] == 0.0 ? 0.0 : std::pow(k2[i], s);
}

SpectralField derivative(const SpectralField& f, int axis) {
  const auto k = odd_wavenumbers(f.grid(), axis);
  SpectralField out(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = Complex(0.0, k[i]) * f[i];
  return out;
}

SpectralField divergence(const SpectralVector& v) {
  const Grid& g = v[0].grid();
  const auto kx = g.kx_odd();
  const auto ky = g.ky_odd();
  const auto kz = g.kz_odd();
  SpectralField out(v[0].grid_ptr());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = Complex(0.0, 1.0) * (kx[i] * v[0][i] + ky[i] * v[1][i] + kz[i] * v[2][i]);
  return out;
}

double inner(const SpectralField& f, const SpectralField& g) {
  const auto w = f.grid().hermitian_weight();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * (f[i] * std::conj(g[i])).real();
  return s * f.grid().volume();
}

double weighted_norm_sq(const SpectralField& f, double power) {
  const auto w = f.grid().hermitian_weight();
  const auto k2 = f.grid().k_squared();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (power != 0.0 && k2[i] == 0.0) continue;
    s += w[i] * std::norm(f[i]) * (power == 0.0 ? 1.0 : std::pow(k2[i], power));
  }
  return s * f.grid().volume();
}

}  // namespace spectral

SpectralVector to_spectral(const VectorField& v) { return {to_spectral(v[0]), to_spectral(v[1]), to_spectral(v[2])}; }

VectorField to_physical(const SpectralVector& v) {
  return {to_physical(v[0]), to_physical(v[1]), to_physical(v[2])};
}

VectorField gradient(const ScalarField& f, Dealias dealias) {
  require_finite(f, "gradient");
  const SpectralField fh = to_spectral(f);
  VectorField out;
  for (int a = 0; a < 3; ++a) {
    SpectralField d = spectral::derivative(fh, a);
    if (dealias == Dealias::apply) spectral::apply_mask(d);
    out[a] = to_physical(d);
  }
  return out;
}

ScalarField derivative(const ScalarField& f, int axis, Dealias dealias) {
  SpectralField d = spectral::derivative(to_spectral(f), axis);
  if (dealias == Dealias::apply) spectral::apply_mask(d);
  return to_physical(d);
}

ScalarField divergence(const VectorField& v, Dealias dealias) {
  SpectralField d = spectral::divergence(to_spectral(v));
  if (dealias == Dealias::apply) spectral::apply_mask(d);
  return to_physical(d);
}

ScalarField laplacian(const ScalarField& f) {
  SpectralField fh = to_spectral(f);
  const auto k2 = f.grid().k_squared();
  for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= -k2[i];
  return to_physical(fh);
}

ScalarField dealias(const ScalarField& f) {
  SpectralField fh = to_spectral(f);
  spectral::apply_mask(fh);
  return to_physical(fh);
}

ScalarField heat_propagate(const ScalarField& f, double t, double nu) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat_propagate: time must be >= 0, got " + std::to_string(t));
  if (!(nu > 0.0)) throw std::invalid_argument("heat_propagate: diffusivity must be > 0");
  require_finite(f, "heat_propagate");
  SpectralField fh = to_spectral(f);
  spectral::apply_heat(fh, t, nu);
  return to_physical(fh);
}

ScalarField mollify(const ScalarField& f, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("mollify: length must be >= 0");
  require_finite(f, "mollify");
  if (eps == 0.0) return f;
  SpectralField fh = to_spectral(f);
  spectral::apply_mollifier(fh, eps);
  return to_physical(fh);
}

VectorField mollify(const VectorField& v, double eps) {
  return {mollify(v[0], eps), mollify(v[1], eps), mollify(v[2], eps)};
}

VectorField leray_project(const VectorField& v) {
  require_finite(v, "leray_project");
  SpectralVector vh = to_spectral(v);
  spectral::apply_leray(vh);
  return to_physical(vh);
}

ScalarField frac_laplacian(const ScalarField& f, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("frac_laplacian: exponent must lie in (0, 1]");
  require_finite(f, "frac_laplacian");
  SpectralField fh = to_spectral(f);
  spectral::apply_frac_laplacian(fh, s);
  return to_physical(fh);
}

}  // namespace cnsr
