#include "gmc/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "gmc/model_io.hpp"
#include "gmc/parallel.hpp"

namespace gmc {

namespace {

std::vector<MaskedSignal> build_signals(const SparseRatingMatrix& m) {
  std::vector<std::vector<Eigen::Index>> indices(static_cast<std::size_t>(m.n_users));
  std::vector<std::vector<double>> values(static_cast<std::size_t>(m.n_users));
  for (const Rating& r : m.ratings) {  // sorted by (user, item), so indices increase
    indices[static_cast<std::size_t>(r.user)].push_back(r.item);
    values[static_cast<std::size_t>(r.user)].push_back(r.value);
  }
  std::vector<MaskedSignal> signals;
  signals.reserve(static_cast<std::size_t>(m.n_users));
  for (int u = 0; u < m.n_users; ++u) {
    auto& vals = values[static_cast<std::size_t>(u)];
    signals.emplace_back(m.n_items, std::move(indices[static_cast<std::size_t>(u)]),
                         Eigen::Map<Eigen::VectorXd>(vals.data(),
                                                     static_cast<Eigen::Index>(vals.size())));
  }
  return signals;
}

// Sum over rows of the log-posterior value under `model`, sharing one
// factorization of the covariance. Matches log_posterior() row by row.
double aggregate_log_posterior(const GaussianModel& model,
                               const std::vector<MaskedSignal>& signals, const NoiseModel& noise,
                               const RowMatrix& completed, int workers) {
  const CholeskyFactor factor = cholesky(model.cov);
  const Eigen::Index n = model.dim();
  constexpr std::int64_t kRowChunk = 256;
  return sum_chunked(completed.rows(), kRowChunk, workers, [&](std::int64_t begin,
                                                               std::int64_t end) {
    Eigen::MatrixXd deviations(n, end - begin);
    for (std::int64_t i = begin; i < end; ++i)
      deviations.col(i - begin) = completed.row(i).transpose() - model.mean;
    factor.lower().triangularView<Eigen::Lower>().solveInPlace(deviations);

    double sum = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      const MaskedSignal& signal = signals[static_cast<std::size_t>(i)];
      double fidelity = 0.0;
      double max_violation = 0.0;
      double squared = 0.0;
      for (Eigen::Index k = 0; k < signal.observed_count(); ++k) {
        const double r = completed(i, signal.indices[k]) - signal.values(k);
        max_violation = std::max(max_violation, std::abs(r));
        squared += r * r;
      }
      if (noise.is_zero()) {
        if (max_violation > 1e-9) return -std::numeric_limits<double>::infinity();
      } else {
        fidelity = squared / noise.sigma2();
      }
      sum += -0.5 * (fidelity + deviations.col(i - begin).squaredNorm());
    }
    return sum;
  });
}

void validate(const EmConfig& config) {
  if (config.iterations < 1) throw Error("EmConfig: iterations must be >= 1");
  if (config.epsilon < 0.0) throw Error("EmConfig: epsilon must be >= 0");
  if (config.noise.is_zero() && config.epsilon <= 0.0)
    throw Error("EmConfig: epsilon must be > 0 when the noise is zero");
}

}  // namespace

RowMatrix initialize(const SparseRatingMatrix& observed, const EmConfig& config) {
  if (observed.n_users < 1 || observed.n_items < 1)
    throw EmptyMatrix("initialize: empty rating matrix");
  RowMatrix f = RowMatrix::Constant(observed.n_users, observed.n_items, config.init_fill);
  for (const Rating& r : observed.ratings) f(r.user, r.item) = r.value;
  return f;
}

GaussianModel m_step(const RowMatrix& signals, double epsilon, int workers) {
  const Eigen::Index m = signals.rows();
  const Eigen::Index n = signals.cols();
  if (m < 1) throw TooFewSignals("m_step: no signals");
  if (n < 1) throw DimensionMismatch("m_step: signals have dimension 0");
  if (epsilon < 0.0) throw Error("m_step: epsilon must be >= 0");

  constexpr std::int64_t kColChunk = 128;

  // Column-partitioned accumulation: each output column is produced by a
  // fixed serial loop, so results are identical for any worker count.
  Eigen::VectorXd mean(n);
  for_each_chunk(n, kColChunk, workers, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t j = begin; j < end; ++j) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) sum += signals(i, j);
      mean(j) = sum / static_cast<double>(m);
    }
  });

  RowMatrix centered = signals;
  centered.rowwise() -= mean.transpose();
  Eigen::MatrixXd cov(n, n);
  for_each_chunk(n, kColChunk, workers, [&](std::int64_t begin, std::int64_t end) {
    cov.middleCols(begin, end - begin).noalias() =
        centered.transpose() * centered.middleCols(begin, end - begin) /
        static_cast<double>(m);
  });
  cov.diagonal().array() += epsilon;

  // SymMatrix mirrors the upper triangle, making the result exactly symmetric.
  return GaussianModel(std::move(mean), SymMatrix(std::move(cov)));
}

GaussianModel m_step(const std::vector<Eigen::VectorXd>& signals, double epsilon) {
  if (signals.empty()) throw TooFewSignals("m_step: no signals");
  const Eigen::Index n = signals.front().size();
  RowMatrix stacked(static_cast<Eigen::Index>(signals.size()), n);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (signals[i].size() != n)
      throw DimensionMismatch("m_step: signals have inconsistent lengths");
    stacked.row(static_cast<Eigen::Index>(i)) = signals[i].transpose();
  }
  return m_step(stacked, epsilon, 1);
}

EmResult run_em(const SparseRatingMatrix& observed, const EmConfig& config, int workers) {
  validate(config);

  const bool by_columns = config.orientation == Orientation::columns;
  std::optional<SparseRatingMatrix> transposed;
  if (by_columns) transposed.emplace(transpose(observed));
  const SparseRatingMatrix& source = by_columns ? *transposed : observed;

  RowMatrix completed = initialize(source, config);
  const std::vector<MaskedSignal> signals = build_signals(source);
  const Eigen::Index n_signals = completed.rows();

  std::vector<EmIteration> trace;
  trace.reserve(static_cast<std::size_t>(config.iterations));
  std::optional<GaussianModel> model;

  constexpr std::int64_t kRowChunk = 16;
  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    const auto start = std::chrono::steady_clock::now();
    model.emplace(m_step(completed, config.epsilon, workers));

    // E-step: every row replaced by its MAP completion under this model.
    for_each_chunk(n_signals, kRowChunk, workers, [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i)
        completed.row(i) =
            map_estimate(*model, signals[static_cast<std::size_t>(i)], config.noise).transpose();
    });

    EmIteration record;
    record.log_posterior =
        aggregate_log_posterior(*model, signals, config.noise, completed, workers);
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record.model_checksum = model_checksum(*model);
    trace.push_back(record);
  }

  EmResult result{std::move(*model),
                  by_columns ? RowMatrix(completed.transpose()) : std::move(completed),
                  std::move(trace)};
  return result;
}

}  // namespace gmc
