#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cnsr/model.hpp"

namespace cnsr {

/// Global functionals of one snapshot.
struct LedgerRow {
  double t = 0.0;
  double mass_n = 0.0;
  double l1_c = 0.0;
  double linf_c = 0.0;
  double entropy = 0.0;  ///< integral of (n+1) ln(n+1)
  double grad_sqrt_c_sq = 0.0;
  double kinetic = 0.0;  ///< |u|_2^2
  double U = 0.0;
  double diss_n = 0.0;  ///< |grad sqrt(n+1)|_2^2
  double diss_c = 0.0;  ///< |Laplacian sqrt(c)|_2^2
  double diss_u = 0.0;  ///< |grad u|_2^2
  double quartic_c = 0.0;
  double V = 0.0;
  std::optional<double> frac_u;     ///< |(-Laplacian)^{1/4} u|_2^2, Stokes runs only
  std::optional<double> frac_diss;  ///< |grad (-Laplacian)^{1/4} u|_2^2, Stokes runs only
};

struct LedgerOptions {
  /// Lower bound used for c in denominators; 1e-12 |c0|_inf in runs.
  double c_floor = 0.0;
};

LedgerRow compute_row(const State& s, const Sensitivities& sens, const RegParams& rp, const LedgerOptions& opt = {});

/// Work done by the effective forcing at one snapshot.
struct ForcingSample {
  double t = 0.0;
  double work = 0.0;       ///< integral of F . u
  double frac_work = 0.0;  ///< integral of (-Laplacian)^{1/4} F . (-Laplacian)^{1/4} u
};

ForcingSample forcing_sample(const State& s, const RegParams& rp);

struct ResidualSeries {
  std::vector<double> t_mid;
  std::vector<double> values;
  double max_abs = 0.0;
};

/// (K_{k+1} - K_k) / (2 dt) + mean of diss_u + mean of the forcing work, per interval.
ResidualSeries kinetic_balance_residual(const std::vector<LedgerRow>& rows, const std::vector<ForcingSample>& forcing);

/// (F_{k+1} - F_k) / dt + 2 mean(frac_diss) + 2 mean(frac_work); Stokes runs only.
ResidualSeries frac_balance_residual(const std::vector<LedgerRow>& rows, const std::vector<ForcingSample>& forcing,
                                     const RegParams& rp);

struct AffineFit {
  double a = 0.0, b = 0.0;
  /// max |y - (a + b t)| / max |y| (0 for y == 0).
  double max_rel_dev = 0.0;
  /// Least-squares relative residual |y - (a + b t)|_2 / |y|_2 (0 for y == 0).
  double rel_residual = 0.0;
};

AffineFit fit_affine(const std::vector<double>& t, const std::vector<double>& y);

/// Running trapezoid integral, starting at 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& y);

struct GlobalReport {
  std::vector<double> t, G;
  AffineFit fit;
  double slope_first = 0.0, slope_second = 0.0;
  bool superlinear = false;
  bool monotone_nonincreasing = false;
  bool monotone_nondecreasing = false;
};

/// G = U + integral of V; flags growth when the late-half slope exceeds the
/// early-half slope (or zero) by more than 10% of max|G| / T.
GlobalReport global_inequality_report(const std::vector<LedgerRow>& rows);

extern const char* const ledger_csv_header;
void write_ledger_csv(std::ostream& os, const std::vector<LedgerRow>& rows);
std::vector<LedgerRow> read_ledger_csv(std::istream& is);
void write_forcing_csv(std::ostream& os, const std::vector<ForcingSample>& f);
std::vector<ForcingSample> read_forcing_csv(std::istream& is);

}  // namespace cnsr
