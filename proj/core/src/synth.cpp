#include "gmc/synth.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <utility>
#include <vector>

#include "gmc/linalg.hpp"

namespace gmc {

namespace {

std::string format_value(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void validate(const SynthSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw EmptyMatrix("synthesize: rows and cols must be >= 1");
  if (spec.rank < 1) throw Error("synthesize: rank must be >= 1");
  if (!(spec.density > 0.0 && spec.density <= 1.0))
    throw InvalidFraction("synthesize: density must lie in (0, 1]");
  if (spec.signal_var < 0.0) throw Error("synthesize: signal_var must be >= 0");
  if (spec.noise_floor <= 0.0) throw Error("synthesize: noise_floor must be > 0");
  if (spec.mean_jitter < 0.0) throw Error("synthesize: mean_jitter must be >= 0");
}

}  // namespace

SynthData synthesize(const SynthSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Low-rank covariance plus a diagonal floor keeps the truth full rank.
  Eigen::MatrixXd basis(spec.cols, spec.rank);
  for (Eigen::Index j = 0; j < basis.cols(); ++j)
    for (Eigen::Index i = 0; i < basis.rows(); ++i) basis(i, j) = gauss(rng);
  Eigen::MatrixXd cov =
      basis * basis.transpose() * (spec.signal_var / static_cast<double>(spec.rank));
  cov.diagonal().array() += spec.noise_floor;
  SymMatrix covariance(std::move(cov));

  Eigen::VectorXd mean(spec.cols);
  for (Eigen::Index j = 0; j < mean.size(); ++j)
    mean(j) = spec.mean_base + spec.mean_jitter * gauss(rng);

  const CholeskyFactor factor = cholesky(covariance);
  RowMatrix full(spec.rows, spec.cols);
  Eigen::VectorXd draw(spec.cols);
  for (Eigen::Index i = 0; i < full.rows(); ++i) {
    for (Eigen::Index j = 0; j < draw.size(); ++j) draw(j) = gauss(rng);
    full.row(i) =
        (mean + factor.lower().triangularView<Eigen::Lower>() * draw).transpose();
  }

  std::vector<Rating> observed;
  for (Eigen::Index i = 0; i < full.rows(); ++i)
    for (Eigen::Index j = 0; j < full.cols(); ++j)
      if (uniform(rng) < spec.density)
        observed.push_back({static_cast<int>(i), static_cast<int>(j), full(i, j)});

  const RatingRange range{full.minCoeff(), full.maxCoeff()};
  SynthData data{GaussianModel(std::move(mean), std::move(covariance)), std::move(full),
                 SparseRatingMatrix::create(spec.rows, spec.cols, std::move(observed), range)};
  return data;
}

void save_dense_matrix(const RowMatrix& m, const std::string& path,
                       const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ",";
      out << format_value(m(i, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

RowMatrix load_dense_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      double value = 0.0;
      const auto result = std::from_chars(line.data() + pos, line.data() + next, value);
      if (result.ec != std::errc() || result.ptr != line.data() + next)
        throw ParseError(path, line_number, "bad matrix entry");
      row.push_back(value);
      pos = next + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path, line_number, "ragged matrix row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyMatrix("no rows in " + path);
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace gmc
