#include "gmc/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are not supported");

namespace gmc {

namespace {

constexpr char kMagic[] = "gmc-model";
constexpr int kVersion = 1;

std::string format_value(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < bytes; ++k) {
    hash ^= p[k];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string expect_line(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("truncated model file: " + path);
  return line;
}

double parse_double_token(const std::string& token, const std::string& path) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(token, &consumed);
    if (consumed != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ParseError("bad numeric field '" + token + "' in model file: " + path);
  }
}

}  // namespace

void save_model(const std::string& path, const GaussianModel& model, const EmConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path);

  const Eigen::Index n = model.dim();
  out << kMagic << " " << kVersion << "\n";
  out << "dim " << n << "\n";
  out << "epsilon " << format_value(config.epsilon) << "\n";
  out << "iterations " << config.iterations << "\n";
  if (config.noise.is_zero())
    out << "noise zero\n";
  else
    out << "noise isotropic " << format_value(config.noise.sigma2()) << "\n";
  out << "init_fill " << format_value(config.init_fill) << "\n";
  out << "orientation " << (config.orientation == Orientation::rows ? "rows" : "columns") << "\n";
  out << "data\n";

  write_doubles(out, model.mean.data(), static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = model.cov(i, j);
    write_doubles(out, row.data(), row.size());
  }
  if (!out) throw IoError("failed while writing model file: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file: " + path);

  {
    std::istringstream header(expect_line(in, path));
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != kMagic || version != kVersion)
      throw ParseError("not a gmc-model version " + std::to_string(kVersion) + " file: " + path);
  }

  EmConfig config;
  Eigen::Index dim = 0;
  for (;;) {
    const std::string line = expect_line(in, path);
    if (line == "data") break;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::string value;
    std::getline(fields, value);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    if (key == "dim") {
      dim = static_cast<Eigen::Index>(parse_double_token(value, path));
      if (dim < 1) throw ParseError("model dim must be >= 1: " + path);
    } else if (key == "epsilon") {
      config.epsilon = parse_double_token(value, path);
    } else if (key == "iterations") {
      config.iterations = static_cast<int>(parse_double_token(value, path));
    } else if (key == "noise") {
      std::istringstream noise_fields(value);
      std::string kind;
      noise_fields >> kind;
      if (kind == "zero") {
        config.noise = NoiseModel::zero();
      } else if (kind == "isotropic") {
        std::string sigma2;
        noise_fields >> sigma2;
        config.noise = NoiseModel::isotropic(parse_double_token(sigma2, path));
      } else {
        throw ParseError("unknown noise kind '" + kind + "' in model file: " + path);
      }
    } else if (key == "init_fill") {
      config.init_fill = parse_double_token(value, path);
    } else if (key == "orientation") {
      if (value == "rows")
        config.orientation = Orientation::rows;
      else if (value == "columns")
        config.orientation = Orientation::columns;
      else
        throw ParseError("unknown orientation '" + value + "' in model file: " + path);
    } else {
      throw ParseError("unknown model header field '" + key + "': " + path);
    }
  }
  if (dim < 1) throw ParseError("model file missing dim: " + path);

  Eigen::VectorXd mean(dim);
  in.read(reinterpret_cast<char*>(mean.data()), static_cast<std::streamsize>(sizeof(double) * dim));
  Eigen::MatrixXd cov(dim, dim);
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * dim));
    for (Eigen::Index j = 0; j < dim; ++j) cov(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (!in) throw ParseError("truncated model payload: " + path);
  if (in.get() != std::char_traits<char>::eof())
    throw ParseError("trailing bytes after model payload: " + path);

  return LoadedModel{GaussianModel(std::move(mean), SymMatrix(std::move(cov))), config};
}

std::uint64_t model_checksum(const GaussianModel& model) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  const std::int64_t dim = model.dim();
  hash = fnv1a(hash, &dim, sizeof(dim));
  hash = fnv1a(hash, model.mean.data(), sizeof(double) * static_cast<std::size_t>(dim));
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) row[static_cast<std::size_t>(j)] = model.cov(i, j);
    hash = fnv1a(hash, row.data(), sizeof(double) * row.size());
  }
  return hash;
}

}  // namespace gmc
