#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gmc/em.hpp"
#include "gmc/ratings.hpp"

namespace gmc {

// NMAE normalization constants for which uniform random guessing scores 1.
inline constexpr double kNmaeFactorEachMovie = 1.944;  // 6-point scale
inline constexpr double kNmaeFactorMovieLens = 1.6;    // 5-point scale

/// Fallback normalization for other ranges: (max - min) * 0.4. Operators
/// benchmarking a dataset with a published factor should pass that instead.
double default_nmae_factor(const RatingRange& range);

struct EvalReport {
  double mae = 0.0;
  double nmae = 0.0;  // always mae / normalization_factor, exactly
  double normalization_factor = 0.0;
  std::int64_t n_predictions = 0;
  int runs = 1;
  std::vector<double> per_run_mae;
  std::vector<double> per_run_nmae;
  double wall_seconds = 0.0;
};

/// Nearest integer (ties away from zero) clamped to the closed rating range.
int postprocess(double prediction, const RatingRange& range);

/// Mean absolute error of predictions against truths, normalized by factor.
EvalReport nmae(const std::vector<double>& predictions, const std::vector<double>& truths,
                double factor);

/// Trains on split.train and scores the postprocessed completion at every
/// held-out (user, item).
EvalReport evaluate_weak(const WeakSplit& split, const EmConfig& config, double factor,
                         int workers = 0);

/// Trains on split.train_users, freezes the model, and predicts each test
/// user's held-out ratings from their observed ones with a single MAP
/// estimate per user. Test data never reaches the M-step.
EvalReport evaluate_strong(const StrongSplit& split, const EmConfig& config, double factor,
                           int workers = 0);

/// Baseline: every held-out entry predicted by the postprocessed global mean
/// of the training ratings.
EvalReport mean_fill_baseline(const SparseRatingMatrix& train, const std::vector<Rating>& heldout,
                              double factor);

/// Pools single runs: aggregate MAE is the unweighted mean of per-run MAEs.
EvalReport average_reports(const std::vector<EvalReport>& run_reports);

/// Machine-readable key=value lines / human-readable table.
void write_report_kv(std::ostream& out, const EvalReport& report,
                     const std::vector<std::pair<std::string, std::string>>& extra = {});
void write_report_table(std::ostream& out, const EvalReport& report, const std::string& title);

}  // namespace gmc
