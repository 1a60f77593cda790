#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace cnsr {

/// Chemotactic sensitivity chi and consumption rate kappa, each with first and
/// second derivatives, tied by kappa(s) = theta0 * s * chi(s).
struct Sensitivities {
  using Fn = std::function<double(double)>;

  std::string name;
  Fn chi, dchi, d2chi;
  Fn kappa, dkappa, d2kappa;
  double theta0 = 1.0;
  /// Upper end of the range on which chi and kappa may be evaluated.
  double s_max = std::numeric_limits<double>::infinity();

  /// "linear" (chi = 1, kappa = theta0 s), "quadratic" (chi = s, kappa = theta0 s^2),
  /// "saturating-negative-test" (chi = 1/(1+s), kappa = theta0 s/(1+s)) or "none" (chi = kappa = 0).
  static Sensitivities preset(const std::string& name, double theta0 = 1.0);
  static std::vector<std::string> preset_names();

  bool decoupled() const { return name == "none"; }
};

struct PredicateResult {
  std::string name;
  bool pass = true;
  /// Largest violation found (0 when passing).
  double worst = 0.0;
  double worst_at = 0.0;
};

struct SensitivityReport {
  std::vector<PredicateResult> predicates;

  bool all_pass() const;
  const PredicateResult& find(const std::string& name) const;
};

/// Checks chi >= 0, kappa(0) = 0, kappa' >= 0, kappa'' >= 0 and the coupling
/// identity on a uniform lattice of [0, s_max] with n_samples points.
SensitivityReport validate_sensitivities(const Sensitivities& sens, double s_max, int n_samples = 1001);

}  // namespace cnsr
