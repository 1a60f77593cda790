#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "cnsr/model.hpp"

namespace cnsr {

/// Samples of (n, c, u) at m + 1 uniform times on [0, T].
struct MildIterate {
  double T = 0.0;
  int m = 0;
  std::vector<State> samples;

  double spacing() const { return T / m; }
  double time(int j) const { return T * j / m; }

  /// Heat flow of the initial data at the sample times (velocity included).
  static MildIterate heat_flow(const State& init, double T, int m);
};

/// Sup over sample times of the component norms.
struct SNorm {
  double n_inf = 0.0;
  double n_w12 = 0.0;
  double grad_c_inf = 0.0;
  double c_l2 = 0.0;
  double hess_c_l2 = 0.0;
  double u_l2 = 0.0;
  double hess_u_l2 = 0.0;

  std::array<double, 7> components() const { return {n_inf, n_w12, grad_c_inf, c_l2, hess_c_l2, u_l2, hess_u_l2}; }
  double total() const;
};

SNorm s_norm(const MildIterate& it);
/// Sum of the S-norm components of a - b.
double s_distance(const MildIterate& a, const MildIterate& b);

/// Duhamel map with trapezoid quadrature over the samples. Sample 0 is the
/// initial data itself.
MildIterate phi_map(const MildIterate& it, const State& init, const Sensitivities& sens, const RegParams& rp);

class PicardDivergence : public std::runtime_error {
 public:
  PicardDivergence(const std::string& what, double suggested_T) : std::runtime_error(what), suggested_T_(suggested_T) {}
  double suggested_horizon() const { return suggested_T_; }

 private:
  double suggested_T_;
};

struct PicardResult {
  MildIterate fixed_point;
  /// d_k = |it_{k+1} - it_k|_S
  std::vector<double> history;
  bool converged = false;
};

/// Iterates Phi from the heat-flow guess until the S-distance drops to tol or
/// max_iter applications. Throws PicardDivergence after three consecutive
/// increases of the distance.
PicardResult picard_solve(const State& init, double T, int m, double tol, int max_iter, const Sensitivities& sens,
                          const RegParams& rp);

}  // namespace cnsr
