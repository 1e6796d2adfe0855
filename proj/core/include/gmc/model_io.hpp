#pragma once

#include <cstdint>
#include <string>

#include "gmc/em.hpp"
#include "gmc/gaussian.hpp"

namespace gmc {

/// Model file, format version 1: a plain-text header
///
///   gmc-model 1
///   dim <N>
///   epsilon <value>
///   iterations <L>
///   noise zero            (or: noise isotropic <sigma2>)
///   init_fill <value>
///   orientation rows      (or columns)
///   data
///
/// followed immediately by N little-endian IEEE-754 doubles (the mean) and
/// N*N little-endian doubles (the covariance, row-major). Save/load round
/// trips are bit-exact.
void save_model(const std::string& path, const GaussianModel& model, const EmConfig& config);

struct LoadedModel {
  GaussianModel model;
  EmConfig config;
};

LoadedModel load_model(const std::string& path);

/// FNV-1a over dim, mean bytes and covariance bytes (row-major).
std::uint64_t model_checksum(const GaussianModel& model);

}  // namespace gmc
