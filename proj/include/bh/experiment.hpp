#pragma once

#include <string>
#include <vector>

#include "bh/reconstruction.hpp"
#include "bh/scenario.hpp"

namespace bh {

struct StabilityRecord {
  double t = 0.0;
  double delta = 0.0; // dtn_difference_norm of the two maps
  double err_A_Linf = 0.0, err_dA_Linf = 0.0, err_q_Hminus1 = 0.0;
  double h = 0.0, rho = 0.0, lambda = 0.0, tau = 0.0;
  bool rho_clamped = false;
  std::size_t samples = 0;   // lattice frequencies inside the low-pass ball
  double q_budget = 0.0;     // largest extraction budget among the q samples
  bool above_threshold = false; // delta > delta_threshold: no estimate claimed
  // fitted exponents of the curve this record belongs to (0 when no fit)
  double fit_q = 0.0, fit_A = 0.0;
};

struct AbortedCell {
  double t = 0.0, h = 0.0;
  std::string stage;
  std::string message;
};

enum class FitModel { log_power, loglog_power };

enum class FitTarget { q, A, dA };

struct FitResult {
  FitModel model = FitModel::log_power;
  double exponent = 0.0;  // slope
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log residuals
  double std_error = 0.0; // standard error of the slope
  std::size_t points = 0;
};

struct SweepOptions {
  int threads = 1;
};

struct SweepResult {
  std::vector<StabilityRecord> records; // ordered by (t, h) as in the scenario
  std::vector<AbortedCell> aborted;
  std::vector<double> deltas;           // one per t
  std::vector<std::string> fit_notes;   // per h: fitted values or why no fit was made
  StabilityExponents reference;
  double seconds_dtn = 0.0, seconds_cells = 0.0;
};

SweepResult run_scenario(const Scenario& sc, const SweepOptions& opt = {});

// Least squares of log(err) against log|log delta| (log_power) or
// log|log|log delta|| (loglog_power). Records with delta = 0 are skipped.
FitResult fit_stability_curve(const std::vector<StabilityRecord>& records, FitModel model, FitTarget target = FitTarget::q);

const char* to_string(FitModel m);

std::string records_csv(const std::vector<StabilityRecord>& records);
std::string aborted_csv(const std::vector<AbortedCell>& cells);
std::string sweep_summary(const Scenario& sc, const SweepResult& r, int threads);

void write_text(const std::string& path, const std::string& text);

} // namespace bh
