#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cnsr/ledger.hpp"
#include "cnsr/lei.hpp"
#include "cnsr/timestepper.hpp"

namespace cnsr {

/// Flat key=value run description. Unknown keys and malformed values are
/// rejected by parse_config.
struct RunConfig {
  int grid = 16;
  double box_length = 6.283185307179586;
  std::string sensitivity = "linear";
  double theta0 = 1.0;
  double epsilon = 0.2;
  double tau = 0.1;
  int mu = 1;
  std::string grad_phi = "gravity";
  double grad_phi_strength = 1.0;
  std::string initial = "blob";
  double initial_amplitude = 1.0;
  /// Relative amplitude of a seeded multiplicative perturbation of n0, in [0, 1).
  double noise = 0.0;
  double dt = 0.01;
  double t_end = 1.0;
  int scheme_order = 2;
  double safety = 0.5;
  int ledger_every = 1;
  /// Snapshot file cadence in steps; 0 keeps only the initial and final snapshots.
  int snapshot_every = 10;
  int lei_psi_count = 5;
  std::string output = "run";
  std::uint64_t seed = 1;

  void validate() const;
  long steps() const;

  GridPtr make_grid() const;
  Sensitivities sensitivities() const;
  RegParams reg_params(const GridPtr& grid) const;
  /// Mollified initial state with recovered pressure.
  State initial_state(const GridPtr& grid) const;
  StepConfig step_config() const;
};

/// Documented keys in file order.
std::vector<std::string> config_keys();
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);
/// Applies one "key=value" assignment.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);
void write_config(std::ostream& os, const RunConfig& cfg);

/// Snapshot file header values besides the state itself.
struct SnapshotMeta {
  int mu = 1;
  double epsilon = 0.0;
  double tau = 0.0;
};

constexpr std::uint32_t snapshot_version = 1;

/// Layout: "CNSR", version u32, n_per_axis u32, L f64, t f64, mu f64, epsilon f64,
/// tau f64, then n, c, u_x, u_y, u_z, p as f64 in x-fastest order, all little-endian.
void save_snapshot(const State& s, const SnapshotMeta& meta, const std::filesystem::path& path);
struct LoadedSnapshot {
  State state;
  SnapshotMeta meta;
};
/// Rejects bad magic, unknown version or truncation. When `expected` is given
/// the stored grid must match it.
LoadedSnapshot load_snapshot(const std::filesystem::path& path, const GridPtr& expected = nullptr);

struct InvariantResult {
  std::string name;
  bool pass = true;
  double worst = 0.0;  ///< largest observed violation measure
  double limit = 0.0;
};

struct InvariantSuite {
  std::vector<InvariantResult> items;
  bool all_pass() const;
  const InvariantResult& find(const std::string& name) const;
  void print(std::ostream& os) const;
};

/// Mass drift (relative 1e-12), max c increase (+1e-8 per row) and integral of c
/// increase (+1e-12 relative per row) over a ledger.
InvariantSuite ledger_invariants(const std::vector<LedgerRow>& rows);

/// Per-step checks: spectral divergence, pressure Poisson residual and pressure mean.
struct StepChecks {
  double max_divergence = 0.0;
  double max_pressure_residual = 0.0;  ///< relative to the largest source coefficient
  double max_pressure_mean = 0.0;
  double min_n = 0.0, min_c = 0.0;

  void observe(const State& s, const RegParams& rp);
};

enum ExitCode : int { exit_ok = 0, exit_violation = 2, exit_abort = 3 };

struct SimulationResult {
  int exit_code = exit_ok;
  std::string message;
  std::vector<LedgerRow> rows;
  std::vector<ForcingSample> forcing;
  std::vector<LeiReport> lei;
  InvariantSuite invariants;
  StepChecks checks;
  State final_state;
};

struct SimulateOptions {
  /// Write run.cfg, ledger.csv, forcing.csv, lei.csv and snapshots/ under cfg.output.
  bool write_files = true;
  bool evaluate_lei = true;
};

SimulationResult simulate(const RunConfig& cfg, const SimulateOptions& opt = {});

struct PresetCheck {
  std::string preset;
  SimulationResult result;
};

/// Runs `base` once per built-in initial-data preset without writing files.
std::vector<PresetCheck> check_presets(const RunConfig& base);

enum class SweepParam { tau, epsilon };

const char* to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& name);

enum class SweepQuantity { u, grad_c, grad_sqrt_c, n, n_log_n };

std::vector<SweepQuantity> sweep_quantities();
const char* to_string(SweepQuantity q);

/// Snapshots of one sweep member at the shared sample times.
struct SweepTrajectory {
  double value = 0.0;
  std::vector<State> samples;
};

/// (integral over time of |a - b|^q summed over the grid)^(1/q), trapezoid in time.
double lq_difference(const SweepTrajectory& a, const SweepTrajectory& b, SweepQuantity quantity, int q);

struct SweepResult {
  SweepParam param = SweepParam::tau;
  std::vector<double> ladder;  ///< completed members only
  bool partial = false;
  std::string failure;
  /// differences[{quantity, q}][k] compares member k with member k + 1.
  std::map<std::pair<SweepQuantity, int>, std::vector<double>> differences;

  bool strictly_decreasing(SweepQuantity quantity, int q) const;
  bool all_strictly_decreasing() const;
  void write_csv(std::ostream& os) const;
};

/// Halves tau (or epsilon, with tau fixed at 0) `levels` times starting from
/// the configured value. Members run on up to CNSR_THREADS worker threads.
SweepResult sweep(const RunConfig& cfg, SweepParam param, int levels);

/// Worker cap from CNSR_THREADS (default: hardware concurrency, at least 1).
int worker_threads();

}  // namespace cnsr
