#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "cnsr/model.hpp"

namespace cnsr {

struct StepConfig {
  double dt = 1e-3;
  double safety = 0.5;  ///< CFL safety factor in (0, 1)
  double t_end = 1.0;
  int scheme_order = 2;  ///< 1: integrating-factor Euler, 2: integrating-factor midpoint
  double u_floor = 1e-12;
  /// When set, advance() takes choose_dt() steps instead of the fixed dt.
  bool adaptive = false;

  void validate() const;
};

/// Negative values no larger than the tolerance are clipped to 0 after each
/// step; anything more negative aborts the run.
struct PositivityPolicy {
  double tol_n = 0.0;
  double tol_c = 0.0;
  bool enabled = true;

  /// 1e-10 times the initial maximum of each field.
  static PositivityPolicy from_initial(const State& s0);
  static PositivityPolicy disabled() { return {0.0, 0.0, false}; }
};

enum class AbortKind { positivity, non_finite, cfl };

const char* to_string(AbortKind k);

/// Thrown when a step cannot be completed; carries the last good state.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(AbortKind kind, const std::string& what, State last_good)
      : std::runtime_error(what), kind_(kind), last_good_(std::move(last_good)) {}
  AbortKind kind() const { return kind_; }
  const State& last_good() const { return last_good_; }

 private:
  AbortKind kind_;
  State last_good_;
};

/// One integrating-factor step of length cfg.dt; the returned state carries
/// the recovered pressure.
State step(const State& s, const StepConfig& cfg, const Sensitivities& sens, const RegParams& rp,
           const PositivityPolicy& policy);

/// min(cfg.dt, safety dx / |u|_inf, safety dx / |chi(c) grad c|_inf).
double choose_dt(const State& s, const StepConfig& cfg, const Sensitivities& sens);

/// Called after every completed step with the step count and new state.
using StepObserver = std::function<void(long, const State&)>;

/// Steps from s.t to cfg.t_end. With a fixed dt the step count is
/// round((t_end - t) / dt), so t_end should be a multiple of dt.
State advance(State s, const StepConfig& cfg, const Sensitivities& sens, const RegParams& rp,
              const PositivityPolicy& policy, const StepObserver& observer = {});

}  // namespace cnsr
