#include "cnsr/sensitivities.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cnsr {

Sensitivities Sensitivities::preset(const std::string& name, double theta0) {
  if (!(theta0 > 0.0)) throw std::invalid_argument("sensitivities: theta0 must be positive");
  Sensitivities s;
  s.name = name;
  s.theta0 = theta0;
  const double t = theta0;
  if (name == "linear") {
    s.chi = [](double) { return 1.0; };
    s.dchi = [](double) { return 0.0; };
    s.d2chi = [](double) { return 0.0; };
    s.kappa = [t](double x) { return t * x; };
    s.dkappa = [t](double) { return t; };
    s.d2kappa = [](double) { return 0.0; };
  } else if (name == "quadratic") {
    s.chi = [](double x) { return x; };
    s.dchi = [](double) { return 1.0; };
    s.d2chi = [](double) { return 0.0; };
    s.kappa = [t](double x) { return t * x * x; };
    s.dkappa = [t](double x) { return 2.0 * t * x; };
    s.d2kappa = [t](double) { return 2.0 * t; };
  } else if (name == "saturating-negative-test") {
    s.chi = [](double x) { return 1.0 / (1.0 + x); };
    s.dchi = [](double x) { return -1.0 / ((1.0 + x) * (1.0 + x)); };
    s.d2chi = [](double x) { return 2.0 / std::pow(1.0 + x, 3); };
    s.kappa = [t](double x) { return t * x / (1.0 + x); };
    s.dkappa = [t](double x) { return t / ((1.0 + x) * (1.0 + x)); };
    s.d2kappa = [t](double x) { return -2.0 * t / std::pow(1.0 + x, 3); };
  } else if (name == "none") {
    auto zero = [](double) { return 0.0; };
    s.chi = s.dchi = s.d2chi = zero;
    s.kappa = s.dkappa = s.d2kappa = zero;
  } else {
    throw std::invalid_argument("sensitivities: unknown preset '" + name + "'");
  }
  return s;
}

std::vector<std::string> Sensitivities::preset_names() {
  return {"linear", "quadratic", "saturating-negative-test", "none"};
}

bool SensitivityReport::all_pass() const {
  return std::all_of(predicates.begin(), predicates.end(), [](const auto& p) { return p.pass; });
}

const PredicateResult& SensitivityReport::find(const std::string& name) const {
  for (const auto& p : predicates)
    if (p.name == name) return p;
  throw std::out_of_range("sensitivity report: no predicate named " + name);
}

SensitivityReport validate_sensitivities(const Sensitivities& sens, double s_max, int n_samples) {
  if (!(s_max > 0.0)) throw std::invalid_argument("validate_sensitivities: s_max must be positive");
  if (n_samples < 2) throw std::invalid_argument("validate_sensitivities: need at least 2 samples");

  PredicateResult chi_nonneg{"chi_nonnegative"};
  PredicateResult kappa_origin{"kappa_zero_at_origin"};
  PredicateResult kappa_d1{"kappa_prime_nonnegative"};
  PredicateResult kappa_d2{"kappa_second_nonnegative"};
  PredicateResult coupling{"coupling_identity"};

  auto note = [](PredicateResult& p, double violation, double s) {
    if (violation > p.worst) {
      p.worst = violation;
      p.worst_at = s;
    }
  };

  const double k0 = std::abs(sens.kappa(0.0));
  if (k0 != 0.0) {
    kappa_origin.pass = false;
    kappa_origin.worst = k0;
  }
  constexpr double slack = 1e-12;
  for (int i = 0; i < n_samples; ++i) {
    const double s = s_max * i / (n_samples - 1);
    const double chi = sens.chi(s);
    const double kappa = sens.kappa(s);
    if (chi < 0.0) note(chi_nonneg, -chi, s);
    if (sens.dkappa(s) < -slack) note(kappa_d1, -sens.dkappa(s), s);
    if (sens.d2kappa(s) < -slack) note(kappa_d2, -sens.d2kappa(s), s);
    const double mismatch = std::abs(kappa - sens.theta0 * s * chi);
    if (mismatch > slack * (1.0 + std::abs(kappa))) note(coupling, mismatch, s);
  }
  for (auto* p : {&chi_nonneg, &kappa_d1, &kappa_d2, &coupling})
    if (p->worst > 0.0) p->pass = false;

  return {{chi_nonneg, kappa_origin, kappa_d1, kappa_d2, coupling}};
}

}  // namespace cnsr
