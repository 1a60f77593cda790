#pragma once

#include <string>
#include <vector>

#include "cnsr/field.hpp"

namespace cnsr {

/// Unmollified initial data (n0, c0, u0).
struct InitialData {
  ScalarField n0, c0;
  VectorField u0;
};

/// Named initial-data presets: "blob", "two-blob", "taylor-green-u", "zero".
/// `amplitude` scales the density bumps (and the velocity for taylor-green-u).
InitialData initial_preset(const std::string& name, const GridPtr& grid, double amplitude = 1.0);
std::vector<std::string> initial_preset_names();

/// Potential-gradient presets: "gravity" (0, 0, g), "periodic" g (sin wx, sin wy, sin wz)
/// with w = 2 pi / L, and "none".
VectorField grad_phi_preset(const std::string& name, const GridPtr& grid, double strength);
std::vector<std::string> grad_phi_preset_names();

}  // namespace cnsr
