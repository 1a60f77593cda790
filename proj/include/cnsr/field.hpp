#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "cnsr/grid.hpp"

namespace cnsr {

/// Real samples of a scalar on a Grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double value = 0.0);
  ScalarField(GridPtr grid, std::vector<double> values);

  /// Samples f(x, y, z) at every grid point.
  static ScalarField from_function(GridPtr grid, const std::function<double(double, double, double)>& f);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(int ix, int iy, int iz) { return values_[grid_->index(ix, iy, iz)]; }
  double at(int ix, int iy, int iz) const { return values_[grid_->index(ix, iy, iz)]; }

  double min() const;
  double max() const;
  double max_abs() const;
  double mean() const;
  /// Grid quadrature of the field over the box.
  double integral() const;
  /// Grid quadrature of f^2 over the box.
  double l2_squared() const;
  double l2_norm() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double s);

  /// Applies f pointwise, returning a new field.
  ScalarField map(const std::function<double(double)>& f) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, double s);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField pointwise(const ScalarField& a, const ScalarField& b);

/// Three scalar components on a shared grid.
struct VectorField {
  std::array<ScalarField, 3> comp;

  VectorField() = default;
  explicit VectorField(GridPtr grid, double value = 0.0);
  VectorField(ScalarField x, ScalarField y, ScalarField z);

  ScalarField& operator[](int i) { return comp[static_cast<std::size_t>(i)]; }
  const ScalarField& operator[](int i) const { return comp[static_cast<std::size_t>(i)]; }
  const Grid& grid() const { return comp[0].grid(); }
  const GridPtr& grid_ptr() const { return comp[0].grid_ptr(); }

  /// Pointwise Euclidean magnitude.
  ScalarField magnitude() const;
  /// Pointwise |v|^2.
  ScalarField magnitude_squared() const;
  double max_magnitude() const;
  double l2_squared() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(VectorField a, double s);
/// Pointwise a . b.
ScalarField dot(const VectorField& a, const VectorField& b);
/// Scalar times vector, pointwise.
VectorField scale(const ScalarField& s, const VectorField& v);

/// Normalized Fourier coefficients in the grid's half layout.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }
  std::size_t size() const { return coeffs_.size(); }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  /// this += s * o
  SpectralField& add_scaled(const SpectralField& o, double s);

 private:
  GridPtr grid_;
  std::vector<Complex> coeffs_;
};

SpectralField to_spectral(const ScalarField& f);
ScalarField to_physical(const SpectralField& f);

/// Throws std::invalid_argument naming `what` and the first non-finite sample.
void require_finite(const ScalarField& f, const char* what);
void require_finite(const VectorField& v, const char* what);
bool all_finite(const ScalarField& f);

}  // namespace cnsr
