#pragma once

#include <cstdint>
#include <string>

#include "gmc/em.hpp"
#include "gmc/gaussian.hpp"
#include "gmc/ratings.hpp"

namespace gmc {

/// Generator for desk-scale ground-truth experiments: rows drawn from a
/// known Gaussian whose covariance is low-rank plus a diagonal floor,
/// observed through a Bernoulli(density) mask.
struct SynthSpec {
  int rows = 100;
  int cols = 20;
  int rank = 5;
  double signal_var = 1.0;    // scale of the low-rank covariance part
  double noise_floor = 0.1;   // diagonal added so the covariance is full rank
  double mean_base = 3.0;
  double mean_jitter = 0.5;
  double density = 0.5;       // per-entry observation probability, in (0, 1]
  std::uint64_t seed = 0;
};

struct SynthData {
  GaussianModel truth;
  RowMatrix full;              // rows x cols ground truth
  SparseRatingMatrix observed; // rating_range = bounds of the full matrix
};

/// Deterministic for a fixed seed. Draw order: covariance basis, mean,
/// signal rows, mask.
SynthData synthesize(const SynthSpec& spec);

/// Dense matrix as one comma-separated line per row ('#' lines skipped).
void save_dense_matrix(const RowMatrix& m, const std::string& path,
                       const std::string& header_comment = "");
RowMatrix load_dense_matrix(const std::string& path);

}  // namespace gmc
