#include "gmc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "gmc/parallel.hpp"

namespace gmc {

namespace {

std::string format_value(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

EvalReport score(const std::vector<double>& predictions, const std::vector<double>& truths,
                 double factor) {
  return nmae(predictions, truths, factor);
}

}  // namespace

double default_nmae_factor(const RatingRange& range) { return (range.max - range.min) * 0.4; }

int postprocess(double prediction, const RatingRange& range) {
  double rounded = std::round(prediction);  // ties away from zero
  rounded = std::max(range.min, std::min(range.max, rounded));
  return static_cast<int>(rounded);
}

EvalReport nmae(const std::vector<double>& predictions, const std::vector<double>& truths,
                double factor) {
  if (predictions.size() != truths.size())
    throw LengthMismatch("nmae: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(truths.size()) + " truths");
  if (predictions.empty()) throw EmptyPredictions("nmae: no predictions");
  if (!(factor > 0.0)) throw Error("nmae: normalization factor must be > 0");

  double absolute_error = 0.0;
  for (std::size_t k = 0; k < predictions.size(); ++k)
    absolute_error += std::abs(predictions[k] - truths[k]);

  EvalReport report;
  report.mae = absolute_error / static_cast<double>(predictions.size());
  report.nmae = report.mae / factor;
  report.normalization_factor = factor;
  report.n_predictions = static_cast<std::int64_t>(predictions.size());
  report.runs = 1;
  report.per_run_mae = {report.mae};
  report.per_run_nmae = {report.nmae};
  return report;
}

EvalReport evaluate_weak(const WeakSplit& split, const EmConfig& config, double factor,
                         int workers) {
  const auto start = std::chrono::steady_clock::now();
  const EmResult em = run_em(split.train, config, workers);

  std::vector<double> predictions, truths;
  predictions.reserve(split.test.size());
  truths.reserve(split.test.size());
  for (const Rating& r : split.test) {
    predictions.push_back(
        static_cast<double>(postprocess(em.completed(r.user, r.item), split.train.rating_range)));
    truths.push_back(r.value);
  }
  EvalReport report = score(predictions, truths, factor);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

EvalReport evaluate_strong(const StrongSplit& split, const EmConfig& config, double factor,
                           int workers) {
  if (config.orientation != Orientation::rows)
    throw Error("evaluate_strong: the fitted model must live in item space (orientation rows)");
  const auto start = std::chrono::steady_clock::now();
  const EmResult em = run_em(split.train_users, config, workers);
  const GaussianModel& model = em.model;  // frozen: test users never touch the M-step

  const auto n_test = static_cast<std::int64_t>(split.test_user_ids.size());
  std::vector<std::vector<double>> user_predictions(static_cast<std::size_t>(n_test));
  const RatingRange range = split.train_users.rating_range;

  constexpr std::int64_t kUserChunk = 8;
  for_each_chunk(n_test, kUserChunk, workers, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t t = begin; t < end; ++t) {
      const auto& observed = split.test_observed[static_cast<std::size_t>(t)];
      std::vector<Eigen::Index> indices;
      Eigen::VectorXd values(static_cast<Eigen::Index>(observed.size()));
      indices.reserve(observed.size());
      for (std::size_t k = 0; k < observed.size(); ++k) {
        indices.push_back(observed[k].item);
        values(static_cast<Eigen::Index>(k)) = observed[k].value;
      }
      const Eigen::VectorXd estimate =
          map_estimate(model, MaskedSignal(model.dim(), std::move(indices), std::move(values)),
                       config.noise);
      const auto& heldout = split.test_heldout[static_cast<std::size_t>(t)];
      auto& out = user_predictions[static_cast<std::size_t>(t)];
      out.reserve(heldout.size());
      for (const Rating& r : heldout)
        out.push_back(static_cast<double>(postprocess(estimate(r.item), range)));
    }
  });

  std::vector<double> predictions, truths;
  for (std::int64_t t = 0; t < n_test; ++t) {
    const auto& heldout = split.test_heldout[static_cast<std::size_t>(t)];
    const auto& preds = user_predictions[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < heldout.size(); ++k) {
      predictions.push_back(preds[k]);
      truths.push_back(heldout[k].value);
    }
  }
  EvalReport report = score(predictions, truths, factor);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

EvalReport mean_fill_baseline(const SparseRatingMatrix& train, const std::vector<Rating>& heldout,
                              double factor) {
  if (train.ratings.empty()) throw EmptyMatrix("mean_fill_baseline: no training ratings");
  double sum = 0.0;
  for (const Rating& r : train.ratings) sum += r.value;
  const double mean = sum / static_cast<double>(train.ratings.size());
  const double prediction = static_cast<double>(postprocess(mean, train.rating_range));

  std::vector<double> predictions(heldout.size(), prediction), truths;
  truths.reserve(heldout.size());
  for (const Rating& r : heldout) truths.push_back(r.value);
  return score(predictions, truths, factor);
}

EvalReport average_reports(const std::vector<EvalReport>& run_reports) {
  if (run_reports.empty()) throw EmptyPredictions("average_reports: no runs");
  EvalReport total;
  total.normalization_factor = run_reports.front().normalization_factor;
  total.runs = 0;
  double mae_sum = 0.0;
  for (const EvalReport& r : run_reports) {
    if (r.normalization_factor != total.normalization_factor)
      throw Error("average_reports: mixed normalization factors");
    total.runs += r.runs;
    total.n_predictions += r.n_predictions;
    total.wall_seconds += r.wall_seconds;
    total.per_run_mae.insert(total.per_run_mae.end(), r.per_run_mae.begin(), r.per_run_mae.end());
    total.per_run_nmae.insert(total.per_run_nmae.end(), r.per_run_nmae.begin(),
                              r.per_run_nmae.end());
    for (double mae : r.per_run_mae) mae_sum += mae;
  }
  total.mae = mae_sum / static_cast<double>(total.per_run_mae.size());
  total.nmae = total.mae / total.normalization_factor;
  return total;
}

void write_report_kv(std::ostream& out, const EvalReport& report,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
  out << "mae=" << format_value(report.mae) << "\n";
  out << "nmae=" << format_value(report.nmae) << "\n";
  out << "factor=" << format_value(report.normalization_factor) << "\n";
  out << "n_predictions=" << report.n_predictions << "\n";
  out << "runs=" << report.runs << "\n";
  for (std::size_t k = 0; k < report.per_run_nmae.size(); ++k) {
    out << "run" << k << "_mae=" << format_value(report.per_run_mae[k]) << "\n";
    out << "run" << k << "_nmae=" << format_value(report.per_run_nmae[k]) << "\n";
  }
  out << "wall_seconds=" << format_value(report.wall_seconds) << "\n";
  for (const auto& [key, value] : extra) out << key << "=" << value << "\n";
}

void write_report_table(std::ostream& out, const EvalReport& report, const std::string& title) {
  char line[160];
  out << title << "\n";
  std::snprintf(line, sizeof(line), "  %-16s %.6f\n", "MAE", report.mae);
  out << line;
  std::snprintf(line, sizeof(line), "  %-16s %.6f  (factor %.6g)\n", "NMAE", report.nmae,
                report.normalization_factor);
  out << line;
  std::snprintf(line, sizeof(line), "  %-16s %lld over %d run(s)\n", "predictions",
                static_cast<long long>(report.n_predictions), report.runs);
  out << line;
  for (std::size_t k = 0; k < report.per_run_nmae.size(); ++k) {
    std::snprintf(line, sizeof(line), "  run %-13zu NMAE %.6f\n", k, report.per_run_nmae[k]);
    out << line;
  }
  std::snprintf(line, sizeof(line), "  %-16s %.3f s\n", "wall time", report.wall_seconds);
  out << line;
}

}  // namespace gmc
