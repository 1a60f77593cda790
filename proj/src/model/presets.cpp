#include "cnsr/presets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cnsr {

namespace {

// Periodic von Mises bump, 1 at the center and exp(-2 kappa) at the antipode.
double bump(double x, double center, double w, double kappa) { return std::exp(kappa * (std::cos(w * (x - center)) - 1.0)); }

}  // namespace

InitialData initial_preset(const std::string& name, const GridPtr& grid, double amplitude) {
  const double L = grid->length();
  const double w = 2.0 * std::numbers::pi / L;
  InitialData d;
  d.u0 = VectorField(grid);

  auto oxygen = [=](double, double, double z) { return 0.5 + 0.5 * bump(z, 0.7 * L, w, 1.0); };

  if (name == "blob") {
    const double cx = 0.5 * L;
    d.n0 = ScalarField::from_function(grid, [=](double x, double y, double z) {
      return 0.5 + 2.0 * amplitude * bump(x, cx, w, 1.0) * bump(y, cx, w, 1.0) * bump(z, cx, w, 1.0);
    });
    d.c0 = ScalarField::from_function(grid, oxygen);
  } else if (name == "two-blob") {
    const double a = 0.3 * L, b = 0.7 * L;
    d.n0 = ScalarField::from_function(grid, [=](double x, double y, double z) {
      return 0.5 + 1.5 * amplitude * bump(x, a, w, 1.5) * bump(y, a, w, 1.5) * bump(z, 0.5 * L, w, 1.5) +
             1.0 * amplitude * bump(x, b, w, 1.5) * bump(y, b, w, 1.5) * bump(z, 0.4 * L, w, 1.5);
    });
    d.c0 = ScalarField::from_function(grid, oxygen);
  } else if (name == "taylor-green-u") {
    d.n0 = ScalarField(grid, 1.0);
    d.c0 = ScalarField::from_function(grid, oxygen);
    const double U = amplitude;
    d.u0[0] = ScalarField::from_function(
        grid, [=](double x, double y, double z) { return U * std::sin(w * x) * std::cos(w * y) * std::cos(w * z); });
    d.u0[1] = ScalarField::from_function(
        grid, [=](double x, double y, double z) { return -U * std::cos(w * x) * std::sin(w * y) * std::cos(w * z); });
  } else if (name == "zero") {
    d.n0 = ScalarField(grid);
    d.c0 = ScalarField(grid);
  } else {
    throw std::invalid_argument("initial preset: unknown name '" + name + "'");
  }
  return d;
}

std::vector<std::string> initial_preset_names() { return {"blob", "two-blob", "taylor-green-u", "zero"}; }

VectorField grad_phi_preset(const std::string& name, const GridPtr& grid, double strength) {
  if (!std::isfinite(strength)) throw std::invalid_argument("grad_phi preset: strength must be finite");
  const double w = 2.0 * std::numbers::pi / grid->length();
  VectorField g(grid);
  if (name == "gravity") {
    g[2] = ScalarField(grid, strength);
  } else if (name == "periodic") {
    g[0] = ScalarField::from_function(grid, [=](double x, double, double) { return strength * std::sin(w * x); });
    g[1] = ScalarField::from_function(grid, [=](double, double y, double) { return strength * std::sin(w * y); });
    g[2] = ScalarField::from_function(grid, [=](double, double, double z) { return strength * std::sin(w * z); });
  } else if (name != "none") {
    throw std::invalid_argument("grad_phi preset: unknown name '" + name + "'");
  }
  return g;
}

std::vector<std::string> grad_phi_preset_names() { return {"gravity", "periodic", "none"}; }

}  // namespace cnsr
