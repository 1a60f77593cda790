#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cnsr/model.hpp"

namespace cnsr {

/// psi(x, t) = amplitude * B(|x - center|^2 / r^2) * S((t - t1) / (t2 - t1)) with
/// B(s) = (1 - s)^p on s < 1 (p = sharpness >= 3) and the C2 ramp
/// S(theta) = theta^3 (10 - 15 theta + 6 theta^2), theta clamped to [0, 1].
/// Distances use the nearest periodic image.
struct CutoffPsi {
  std::array<double, 3> center{};
  double r = 1.0;
  double t1 = 0.0, t2 = 1.0;
  double sharpness = 3.0;
  double amplitude = 1.0;
  double box_length = 1.0;

  struct Point {
    double value, dt;
    std::array<double, 3> grad;
    double lap;
  };
  Point eval(double x, double y, double z, double t) const;
  double value(double x, double y, double z, double t) const { return eval(x, y, z, t).value; }
};

/// Rejects r >= L/2, r <= 0, t1 >= t2, sharpness < 3 or negative amplitude.
CutoffPsi make_psi(std::array<double, 3> center, double r, double t1, double t2, double box_length,
                   double sharpness = 3.0, double amplitude = 1.0);

/// K admissible cut-offs with centers uniform in the box, radii in [0.2 L, 0.45 L]
/// and windows [t1, t2] snapped to multiples of `sample_dt` inside [0, T].
std::vector<CutoffPsi> random_psi_suite(int K, std::uint64_t seed, double box_length, double T, double sample_dt);

struct LeiOptions {
  double c0_inf = 0.0;   ///< sup norm of the prepared initial oxygen
  double c_floor = 0.0;  ///< lower bound for c in denominators
  bool limit_form = false;
  /// Largest allowed spacing between consecutive snapshots (0 disables the check).
  double max_gap = 0.0;
};

/// Every term of the local inequality for one cut-off. Space-time terms are
/// integrated over [t1, t2]; final-time terms use the snapshot at t2.
struct LeiReport {
  CutoffPsi psi;
  // left-hand side
  double lhs_entropy = 0, lhs_fisher_n = 0, lhs_grad_sqrt_c = 0, lhs_lap_sqrt_c = 0, lhs_quartic_c = 0,
         lhs_kinetic = 0, lhs_grad_u = 0;
  // right-hand side
  double rhs_entropy_heat = 0, rhs_entropy_transport = 0, rhs_chemo_log = 0, rhs_chemo = 0, rhs_grad_sqrt_c_heat = 0,
         rhs_grad_sqrt_c_transport = 0, rhs_kinetic_heat = 0, rhs_kinetic_transport = 0, rhs_pressure_work = 0,
         rhs_gravity_work = 0;
  // companions
  double rhs_grad_sqrt_c_transport_alt = 0;  ///< transport term with the other advecting velocity
  double lhs_entropy_shifted = 0;            ///< integral of (n ln n + 1/e) psi at t2
  double lhs_quartic_c_diag = 0;             ///< diagonal part sum_i (d_i sqrt c)^4 / c of the quartic term
  double cross_term = 0;                     ///< chi(c) / (1 + tau n) grad c . grad n psi
  double defect_n = 0;  ///< defect of the exact entropy identity for n
  double defect_u = 0;  ///< defect of the exact local kinetic identity
  double eta = 0;       ///< |defect_n| + (18 c0 / theta0) |defect_u|
  double lhs_total = 0, rhs_total = 0, residual = 0;

  std::vector<std::pair<std::string, double>> named_terms() const;
};

/// Streams snapshots (non-decreasing times) into the space-time integrals of
/// several cut-offs at once.
class LeiAccumulator {
 public:
  LeiAccumulator(std::vector<CutoffPsi> psis, Sensitivities sens, RegParams rp, LeiOptions opt);
  void add(const State& s);
  /// Throws when the snapshots do not cover every window.
  std::vector<LeiReport> finish() const;

 private:
  std::vector<CutoffPsi> psis_;
  Sensitivities sens_;
  RegParams rp_;
  LeiOptions opt_;
  std::vector<std::vector<double>> integrals_;  // per psi: running space-time integrals
  std::vector<std::vector<double>> last_;       // per psi: integrands at the previous snapshot
  std::vector<std::vector<double>> final_;      // per psi: final-time integrals
  std::vector<bool> started_, done_;
  double last_t_ = 0.0;
  bool any_ = false;
};

std::vector<LeiReport> evaluate_lei(const std::vector<State>& trajectory, const std::vector<CutoffPsi>& psis,
                                    const Sensitivities& sens, const RegParams& rp, const LeiOptions& opt);

void write_lei_csv(std::ostream& os, const std::vector<LeiReport>& reports);

}  // namespace cnsr
