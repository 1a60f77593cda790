#include "cnsr/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cnsr {

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (&a != &b && !a.same_shape(b)) throw std::invalid_argument("field: operands live on different grids");
}

}  // namespace

ScalarField::ScalarField(GridPtr grid, double value) : grid_(std::move(grid)), values_(grid_->size(), value) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) throw std::invalid_argument("field: sample count does not match grid");
}

ScalarField ScalarField::from_function(GridPtr grid, const std::function<double(double, double, double)>& f) {
  ScalarField out(grid);
  const int n = grid->n();
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        out.at(ix, iy, iz) = f(grid->coordinate(ix), grid->coordinate(iy), grid->coordinate(iz));
  return out;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double ScalarField::integral() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) * grid_->cell_volume();
}

double ScalarField::l2_squared() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s * grid_->cell_volume();
}

double ScalarField::l2_norm() const { return std::sqrt(l2_squared()); }

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(*grid_, *o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(*grid_, *o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

ScalarField ScalarField::map(const std::function<double(double)>& f) const {
  ScalarField out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = f(values_[i]);
  return out;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField pointwise(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

VectorField::VectorField(GridPtr grid, double value)
    : comp{ScalarField(grid, value), ScalarField(grid, value), ScalarField(grid, value)} {}

VectorField::VectorField(ScalarField x, ScalarField y, ScalarField z) : comp{std::move(x), std::move(y), std::move(z)} {}

ScalarField VectorField::magnitude_squared() const {
  ScalarField out(grid_ptr());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = comp[0][i] * comp[0][i] + comp[1][i] * comp[1][i] + comp[2][i] * comp[2][i];
  return out;
}

ScalarField VectorField::magnitude() const {
  return magnitude_squared().map([](double v) { return std::sqrt(v); });
}

double VectorField::max_magnitude() const { return std::sqrt(magnitude_squared().max()); }

double VectorField::l2_squared() const {
  return comp[0].l2_squared() + comp[1].l2_squared() + comp[2].l2_squared();
}

VectorField& VectorField::operator+=(const VectorField& o) {
  for (int i = 0; i < 3; ++i) (*this)[i] += o[i];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  for (int i = 0; i < 3; ++i) (*this)[i] -= o[i];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : comp) c *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(VectorField a, double s) { return a *= s; }

ScalarField dot(const VectorField& a, const VectorField& b) {
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a[0][i] * b[0][i] + a[1][i] * b[1][i] + a[2][i] * b[2][i];
  return out;
}

VectorField scale(const ScalarField& s, const VectorField& v) {
  return {pointwise(s, v[0]), pointwise(s, v[1]), pointwise(s, v[2])};
}

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)), coeffs_(grid_->spectral_size()) {}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralField& SpectralField::add_scaled(const SpectralField& o, double s) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
  return *this;
}

SpectralField to_spectral(const ScalarField& f) {
  SpectralField out(f.grid_ptr());
  f.grid().forward(f.values(), out.coeffs());
  return out;
}

ScalarField to_physical(const SpectralField& f) {
  ScalarField out(f.grid_ptr());
  f.grid().inverse(f.coeffs(), out.values());
  return out;
}

bool all_finite(const ScalarField& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const ScalarField& f, const char* what) {
  const int n = f.grid().n();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) {
      const auto ix = static_cast<int>(i % n);
      const auto iy = static_cast<int>((i / n) % n);
      const auto iz = static_cast<int>(i / (static_cast<std::size_t>(n) * n));
      std::ostringstream msg;
      msg << what << ": non-finite value " << f[i] << " at index " << i << " (ix=" << ix << ", iy=" << iy
          << ", iz=" << iz << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

void require_finite(const VectorField& v, const char* what) {
  for (const auto& c : v.comp) require_finite(c, what);
}

}  // namespace cnsr
