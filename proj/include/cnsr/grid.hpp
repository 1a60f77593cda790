#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cnsr {

using Complex = std::complex<double>;

/// Uniform periodic grid on the cube [0, L)^3 with the same resolution on every
/// axis, together with its wavenumber tables and FFT plans.
///
/// Real-space samples are stored x-fastest: index = ix + n*(iy + n*iz).
/// Spectral coefficients use the real-to-complex half layout along x:
/// index = kx + nh*(ky + n*kz), nh = n/2 + 1. Coefficients are normalized so
/// that f(x) = sum_k fhat(k) exp(i k.x).
///
/// A Grid is immutable after construction and may be shared across threads;
/// transforms only execute the precomputed plans on caller-owned arrays.
class Grid {
 public:
  static std::shared_ptr<const Grid> make(int n_per_axis, double box_length);

  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int n() const { return n_; }
  int nh() const { return n_ / 2 + 1; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  double cell_volume() const { return dx() * dx() * dx(); }
  double volume() const { return length_ * length_ * length_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * n_ * nh(); }

  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) + static_cast<std::size_t>(n_) * (iy + static_cast<std::size_t>(n_) * iz);
  }
  std::size_t spectral_index(int kx, int ky, int kz) const {
    return static_cast<std::size_t>(kx) + static_cast<std::size_t>(nh()) * (ky + static_cast<std::size_t>(n_) * kz);
  }
  double coordinate(int i) const { return i * dx(); }

  /// Signed integer frequency of array position i on a full axis (Nyquist maps to -n/2).
  int full_mode(int i) const { return i < n_ / 2 ? i : i - n_; }

  // Per spectral-index tables (length spectral_size()).
  std::span<const double> kx() const { return kx_; }
  std::span<const double> ky() const { return ky_; }
  std::span<const double> kz() const { return kz_; }
  std::span<const double> k_squared() const { return k2_; }
  /// Wavenumbers with the Nyquist component zeroed; used for odd derivatives.
  std::span<const double> kx_odd() const { return kx_odd_; }
  std::span<const double> ky_odd() const { return ky_odd_; }
  std::span<const double> kz_odd() const { return kz_odd_; }
  /// 2/3-rule mask: true when every |m_i| <= n/3.
  std::span<const unsigned char> dealias_mask() const { return mask_; }
  /// Multiplicity of each half-layout coefficient in the full spectrum (1 or 2).
  std::span<const double> hermitian_weight() const { return weight_; }

  void forward(std::span<const double> real, std::span<Complex> spectral) const;
  /// Leaves `spectral` untouched (an internal scratch copy is transformed).
  void inverse(std::span<const Complex> spectral, std::span<double> real) const;

  bool same_shape(const Grid& other) const { return n_ == other.n_ && length_ == other.length_; }

 private:
  Grid(int n_per_axis, double box_length);

  int n_;
  double length_;
  std::vector<double> kx_, ky_, kz_, k2_, kx_odd_, ky_odd_, kz_odd_, weight_;
  std::vector<unsigned char> mask_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace cnsr
