#include "cnsr/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cnsr {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::shared_ptr<const Grid> Grid::make(int n_per_axis, double box_length) {
  return std::shared_ptr<const Grid>(new Grid(n_per_axis, box_length));
}

Grid::Grid(int n_per_axis, double box_length) : n_(n_per_axis), length_(box_length) {
  if (n_ < 8 || n_ % 2 != 0)
    throw std::invalid_argument("grid: n_per_axis must be even and >= 8, got " + std::to_string(n_));
  if (!(length_ > 0.0) || !std::isfinite(length_))
    throw std::invalid_argument("grid: box length must be positive and finite");

  const std::size_t ns = spectral_size();
  kx_.resize(ns);
  ky_.resize(ns);
  kz_.resize(ns);
  k2_.resize(ns);
  kx_odd_.resize(ns);
  ky_odd_.resize(ns);
  kz_odd_.resize(ns);
  weight_.resize(ns);
  mask_.resize(ns);

  const double base = 2.0 * std::numbers::pi / length_;
  const int half = n_ / 2;
  for (int iz = 0; iz < n_; ++iz) {
    const int mz = full_mode(iz);
    for (int iy = 0; iy < n_; ++iy) {
      const int my = full_mode(iy);
      for (int ix = 0; ix < nh(); ++ix) {
        const int mx = ix;
        const std::size_t s = spectral_index(ix, iy, iz);
        kx_[s] = base * mx;
        ky_[s] = base * my;
        kz_[s] = base * mz;
        k2_[s] = kx_[s] * kx_[s] + ky_[s] * ky_[s] + kz_[s] * kz_[s];
        kx_odd_[s] = mx == half ? 0.0 : kx_[s];
        ky_odd_[s] = std::abs(my) == half ? 0.0 : ky_[s];
        kz_odd_[s] = std::abs(mz) == half ? 0.0 : kz_[s];
        weight_[s] = (ix == 0 || ix == half) ? 1.0 : 2.0;
        mask_[s] = (3 * mx <= n_ && 3 * std::abs(my) <= n_ && 3 * std::abs(mz) <= n_) ? 1 : 0;
      }
    }
  }

  std::lock_guard lock(planner_mutex());
  std::vector<double> r(size());
  std::vector<Complex> c(ns);
  auto* cr = reinterpret_cast<fftw_complex*>(c.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_3d(n_, n_, n_, r.data(), cr, flags);
  inverse_plan_ = fftw_plan_dft_c2r_3d(n_, n_, n_, cr, r.data(), flags);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr)
    throw std::runtime_error("grid: FFTW planning failed");
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Grid::forward(std::span<const double> real, std::span<Complex> spectral) const {
  if (real.size() != size() || spectral.size() != spectral_size())
    throw std::invalid_argument("grid: forward transform size mismatch");
  // r2c does not modify its input.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(real.data()),
                       reinterpret_cast<fftw_complex*>(spectral.data()));
  const double scale = 1.0 / static_cast<double>(size());
  for (auto& v : spectral) v *= scale;
}

void Grid::inverse(std::span<const Complex> spectral, std::span<double> real) const {
  if (real.size() != size() || spectral.size() != spectral_size())
    throw std::invalid_argument("grid: inverse transform size mismatch");
  std::vector<Complex> scratch(spectral.begin(), spectral.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(scratch.data()),
                       real.data());
}

}  // namespace cnsr
