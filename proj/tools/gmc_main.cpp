// gmc: Gaussian matrix completion toolkit.
//
// Subcommands: fit (train a model), predict (complete rows under a saved
// model), benchmark (weak/strong generalization protocols with NMAE
// scoring), synth (ground-truth dataset generator).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmc/em.hpp"
#include "gmc/evaluation.hpp"
#include "gmc/model_io.hpp"
#include "gmc/ratings.hpp"
#include "gmc/synth.hpp"

namespace {

namespace fs = std::filesystem;

struct SharedOptions {
  std::string input;
  std::string format = "csv";
  std::uint64_t seed = 0;
  double epsilon = 0.3;
  int iterations = 10;
  double noise_var = 0.0;
  std::string orientation = "rows";
  double rating_min = 0.0;
  double rating_max = 0.0;
  bool range_set = false;
  int sample_users = 0;
  int min_user_ratings = 0;
  int min_item_ratings = 0;
  int workers = 0;
  std::string output_dir = ".";
};

void add_shared_options(CLI::App* cmd, SharedOptions& opts, bool with_input) {
  if (with_input)
    cmd->add_option("-i,--input", opts.input, "Ratings file")->required();
  cmd->add_option("--format", opts.format, "Input format")
      ->check(CLI::IsMember({"movielens", "csv"}))
      ->capture_default_str();
  cmd->add_option("--seed", opts.seed, "Base random seed")->capture_default_str();
  cmd->add_option("--epsilon", opts.epsilon, "Covariance regularization added every M-step")
      ->capture_default_str();
  cmd->add_option("--iterations", opts.iterations, "EM iterations")->capture_default_str();
  cmd->add_option("--noise-var", opts.noise_var, "Isotropic observation noise variance (0 = none)")
      ->capture_default_str();
  cmd->add_option("--orientation", opts.orientation, "Treat rows or columns as signals")
      ->check(CLI::IsMember({"rows", "columns"}))
      ->capture_default_str();
  auto* rmin = cmd->add_option("--rating-min", opts.rating_min, "Rating range lower bound");
  auto* rmax = cmd->add_option("--rating-max", opts.rating_max, "Rating range upper bound");
  rmin->needs(rmax);
  rmax->needs(rmin);
  cmd->add_option("--sample-users", opts.sample_users,
                  "Keep only this many randomly chosen users (0 = all)")
      ->capture_default_str();
  cmd->add_option("--min-user-ratings", opts.min_user_ratings,
                  "Drop users with fewer ratings (0 = off)")
      ->capture_default_str();
  cmd->add_option("--min-item-ratings", opts.min_item_ratings,
                  "Drop items with fewer ratings (0 = off)")
      ->capture_default_str();
  cmd->add_option("--workers", opts.workers, "Worker threads (0 = hardware)")
      ->capture_default_str();
  cmd->add_option("-o,--output-dir", opts.output_dir, "Directory for output files")
      ->capture_default_str();
  cmd->callback([cmd, &opts] { opts.range_set = cmd->count("--rating-min") > 0; });
}

gmc::EmConfig make_config(const SharedOptions& opts) {
  gmc::EmConfig config;
  config.epsilon = opts.epsilon;
  config.iterations = opts.iterations;
  config.noise =
      opts.noise_var > 0.0 ? gmc::NoiseModel::isotropic(opts.noise_var) : gmc::NoiseModel::zero();
  config.orientation =
      opts.orientation == "columns" ? gmc::Orientation::columns : gmc::Orientation::rows;
  return config;
}

std::string config_echo(const SharedOptions& opts) {
  std::ostringstream echo;
  echo << "seed=" << opts.seed << " epsilon=" << opts.epsilon
       << " iterations=" << opts.iterations << " noise_var=" << opts.noise_var
       << " orientation=" << opts.orientation << " sample_users=" << opts.sample_users
       << " min_user_ratings=" << opts.min_user_ratings
       << " min_item_ratings=" << opts.min_item_ratings;
  return echo.str();
}

gmc::SparseRatingMatrix load_input(const SharedOptions& opts, std::uint64_t seed) {
  std::optional<gmc::RatingRange> range;
  if (opts.range_set) range = gmc::RatingRange{opts.rating_min, opts.rating_max};
  gmc::SparseRatingMatrix m = gmc::load_ratings(
      opts.input,
      opts.format == "movielens" ? gmc::RatingsFormat::movielens : gmc::RatingsFormat::csv, range);
  if (opts.min_user_ratings > 0 || opts.min_item_ratings > 0)
    m = gmc::filter_matrix(m, opts.min_user_ratings, opts.min_item_ratings);
  if (opts.sample_users > 0 && opts.sample_users < m.n_users)
    m = gmc::sample_users(m, opts.sample_users, seed);
  return m;
}

fs::path prepare_output_dir(const SharedOptions& opts) {
  fs::path dir(opts.output_dir);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw gmc::IoError("cannot write " + path.string());
  return out;
}

int cmd_fit(const SharedOptions& opts) {
  const gmc::SparseRatingMatrix data = load_input(opts, opts.seed);
  const gmc::EmConfig config = make_config(opts);
  const gmc::EmResult result = gmc::run_em(data, config, opts.workers);
  const fs::path dir = prepare_output_dir(opts);

  const fs::path model_path = dir / "model.gmc";
  gmc::save_model(model_path.string(), result.model, config);

  {
    auto out = open_output(dir / "items.csv");
    out << "index,original_id\n";
    for (std::size_t j = 0; j < data.item_ids.size(); ++j)
      out << j << "," << data.item_ids[j] << "\n";
  }
  {
    auto out = open_output(dir / "trace.txt");
    out << "# gmc fit trace\n# " << config_echo(opts) << "\n";
    out << "iteration\tlog_posterior\tseconds\tmodel_checksum\n";
    for (std::size_t t = 0; t < result.trace.size(); ++t) {
      const auto& rec = result.trace[t];
      out << (t + 1) << "\t";
      char value[40];
      std::snprintf(value, sizeof(value), "%.17g", rec.log_posterior);
      out << value << "\t";
      std::snprintf(value, sizeof(value), "%.6f", rec.seconds);
      out << value << "\t" << std::hex << rec.model_checksum << std::dec << "\n";
    }
  }

  std::cout << "fit: " << data.n_users << " users x " << data.n_items << " items, "
            << data.ratings.size() << " ratings\n";
  std::cout << "model written to " << model_path.string() << "\n";
  return 0;
}

struct PredictOptions {
  std::string model_path;
  std::string input;
  std::string item_map;
  std::string items;
  std::string users;
  double rating_min = 0.0;
  double rating_max = 0.0;
  bool range_set = false;
  std::string output_dir = ".";
};

// Observation files for predict reuse the CSV rating layout; items are dense
// indices unless an item map translates original ids.
std::map<std::string, std::vector<std::pair<int, double>>> read_observations(
    const std::string& path, const std::unordered_map<std::string, int>* item_map,
    Eigen::Index dim, std::vector<std::string>& user_order) {
  std::ifstream in(path);
  if (!in) throw gmc::ParseError("cannot open observations file: " + path);
  std::map<std::string, std::vector<std::pair<int, double>>> per_user;
  std::string line;
  std::size_t line_number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string user, item, value_token;
    if (!std::getline(fields, user, ',') || !std::getline(fields, item, ',') ||
        !std::getline(fields, value_token, ','))
      throw gmc::ParseError(path, line_number, "expected user,item,rating");
    double value = 0.0;
    try {
      value = std::stod(value_token);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header line
      }
      throw gmc::ParseError(path, line_number, "rating '" + value_token + "' is not a number");
    }
    first = false;
    int index = -1;
    if (item_map) {
      const auto it = item_map->find(item);
      if (it == item_map->end())
        throw gmc::DimensionMismatch("item '" + item + "' is not in the item map");
      index = it->second;
    } else {
      const auto result = std::from_chars(item.data(), item.data() + item.size(), index);
      if (result.ec != std::errc() || result.ptr != item.data() + item.size())
        throw gmc::ParseError(path, line_number, "item '" + item + "' is not a dense index");
    }
    if (index < 0 || index >= dim)
      throw gmc::DimensionMismatch("item index " + std::to_string(index) +
                                   " outside the model universe [0, " + std::to_string(dim) + ")");
    if (per_user.find(user) == per_user.end()) user_order.push_back(user);
    per_user[user].emplace_back(index, value);
  }
  if (per_user.empty()) throw gmc::EmptyMatrix("no observations in " + path);
  return per_user;
}

int cmd_predict(const PredictOptions& popts) {
  const gmc::LoadedModel loaded = gmc::load_model(popts.model_path);
  const Eigen::Index dim = loaded.model.dim();

  std::unordered_map<std::string, int> item_map;
  std::vector<std::string> index_to_id;
  if (!popts.item_map.empty()) {
    std::ifstream in(popts.item_map);
    if (!in) throw gmc::ParseError("cannot open item map: " + popts.item_map);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line == "index,original_id" || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw gmc::ParseError(popts.item_map, line_number, "expected index,original_id");
      const int index = std::stoi(line.substr(0, comma));
      item_map[line.substr(comma + 1)] = index;
    }
    if (static_cast<Eigen::Index>(item_map.size()) != dim)
      throw gmc::DimensionMismatch("item map lists " + std::to_string(item_map.size()) +
                                   " items, model dim is " + std::to_string(dim));
    index_to_id.resize(static_cast<std::size_t>(dim));
    for (const auto& [id, index] : item_map) index_to_id[static_cast<std::size_t>(index)] = id;
  }

  std::vector<int> requested;
  if (!popts.items.empty()) {
    std::istringstream fields(popts.items);
    std::string token;
    while (std::getline(fields, token, ',')) {
      const int index = std::stoi(token);
      if (index < 0 || index >= dim)
        throw gmc::DimensionMismatch("requested item " + token + " outside [0, " +
                                     std::to_string(dim) + ")");
      requested.push_back(index);
    }
  } else {
    for (int j = 0; j < dim; ++j) requested.push_back(j);
  }

  std::vector<std::string> user_order;
  auto per_user = read_observations(popts.input, popts.item_map.empty() ? nullptr : &item_map,
                                    dim, user_order);
  // Users listed without observations are predicted from the prior alone.
  if (!popts.users.empty()) {
    std::istringstream fields(popts.users);
    std::string user;
    while (std::getline(fields, user, ','))
      if (per_user.find(user) == per_user.end()) {
        per_user[user] = {};
        user_order.push_back(user);
      }
  }

  gmc::RatingRange predict_range;
  if (popts.range_set) {
    predict_range = {popts.rating_min, popts.rating_max};
  } else {
    // Integer projection bounds from the observed values.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [user, obs] : per_user)
      for (const auto& [index, value] : obs) {
        lo = std::min(lo, value);
        hi = std::max(hi, value);
      }
    if (!(lo < hi))
      throw gmc::Error("cannot derive a rating range from the observations; pass "
                       "--rating-min/--rating-max");
    predict_range = {std::floor(lo), std::ceil(hi)};
  }

  fs::path dir(popts.output_dir);
  fs::create_directories(dir);
  const fs::path out_path = dir / "predictions.csv";
  auto out = open_output(out_path);
  out << "# model=" << popts.model_path << " noise="
      << (loaded.config.noise.is_zero() ? "zero" : "isotropic") << " epsilon="
      << loaded.config.epsilon << " rating_range=[" << predict_range.min << ","
      << predict_range.max << "]\n";
  out << "user,item,prediction\n";

  for (const std::string& user : user_order) {
    const auto& obs = per_user.at(user);
    std::vector<std::pair<int, double>> sorted = obs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
      if (sorted[k].first == sorted[k + 1].first)
        throw gmc::Error("duplicate observation for user " + user + ", item " +
                         std::to_string(sorted[k].first));
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd values(static_cast<Eigen::Index>(sorted.size()));
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      indices.push_back(sorted[k].first);
      values(static_cast<Eigen::Index>(k)) = sorted[k].second;
    }
    const Eigen::VectorXd estimate = gmc::map_estimate(
        loaded.model, gmc::MaskedSignal(dim, std::move(indices), std::move(values)),
        loaded.config.noise);
    for (int j : requested) {
      const int predicted = gmc::postprocess(estimate(j), predict_range);
      out << user << ",";
      if (!index_to_id.empty())
        out << index_to_id[static_cast<std::size_t>(j)];
      else
        out << j;
      out << "," << predicted << "\n";
    }
  }
  std::cout << "predictions written to " << out_path.string() << "\n";
  return 0;
}

struct BenchmarkOptions {
  std::string protocol;
  int runs = 3;
  int n_test_users = 0;
  double observed_fraction = 0.5;
  double factor = 0.0;
  bool factor_set = false;
  bool export_splits = false;
};

int cmd_benchmark(const SharedOptions& opts, const BenchmarkOptions& bopts) {
  const fs::path dir = prepare_output_dir(opts);
  std::vector<gmc::EvalReport> reports, baselines;
  std::vector<std::string> seeds;
  const gmc::EmConfig config = make_config(opts);

  double factor = bopts.factor;
  for (int run = 0; run < bopts.runs; ++run) {
    const std::uint64_t run_seed = opts.seed + static_cast<std::uint64_t>(run);
    seeds.push_back(std::to_string(run_seed));
    const gmc::SparseRatingMatrix data = load_input(opts, run_seed);
    if (!bopts.factor_set && run == 0) factor = gmc::default_nmae_factor(data.rating_range);
    if (!(factor > 0.0)) throw gmc::Error("NMAE factor must be > 0");

    gmc::EvalReport report, baseline;
    if (bopts.protocol == "weak") {
      const gmc::WeakSplit split = gmc::split_weak(data, run_seed);
      if (bopts.export_splits)
        gmc::save_weak_manifest(split, (dir / ("split_run" + std::to_string(run) + ".csv")).string());
      report = gmc::evaluate_weak(split, config, factor, opts.workers);
      baseline = gmc::mean_fill_baseline(split.train, split.test, factor);
    } else {
      const gmc::StrongSplit split =
          gmc::split_strong(data, bopts.n_test_users, bopts.observed_fraction, run_seed);
      if (bopts.export_splits)
        gmc::save_strong_manifest(split,
                                  (dir / ("split_run" + std::to_string(run) + ".csv")).string());
      report = gmc::evaluate_strong(split, config, factor, opts.workers);
      std::vector<gmc::Rating> heldout;
      for (const auto& user_heldout : split.test_heldout)
        heldout.insert(heldout.end(), user_heldout.begin(), user_heldout.end());
      baseline = gmc::mean_fill_baseline(split.train_users, heldout, factor);
    }
    reports.push_back(report);
    baselines.push_back(baseline);

    auto out = open_output(dir / ("run" + std::to_string(run) + ".kv"));
    char baseline_text[40];
    std::snprintf(baseline_text, sizeof(baseline_text), "%.17g", baseline.nmae);
    gmc::write_report_kv(out, report,
                         {{"protocol", bopts.protocol},
                          {"seed", std::to_string(run_seed)},
                          {"baseline_nmae", baseline_text},
                          {"config", config_echo(opts)}});
  }

  const gmc::EvalReport average = gmc::average_reports(reports);
  const gmc::EvalReport baseline_average = gmc::average_reports(baselines);

  std::string seed_list;
  for (std::size_t k = 0; k < seeds.size(); ++k) seed_list += (k ? "," : "") + seeds[k];
  {
    auto out = open_output(dir / "report.kv");
    char nmae_text[40];
    std::snprintf(nmae_text, sizeof(nmae_text), "%.17g", baseline_average.nmae);
    gmc::write_report_kv(out, average,
                         {{"protocol", bopts.protocol},
                          {"seeds", seed_list},
                          {"baseline_nmae", nmae_text},
                          {"config", config_echo(opts)}});
  }
  {
    auto out = open_output(dir / "report.txt");
    gmc::write_report_table(out, average, "gmc benchmark (" + bopts.protocol + ")");
    gmc::write_report_table(out, baseline_average, "mean-fill baseline");
  }
  gmc::write_report_table(std::cout, average, "gmc benchmark (" + bopts.protocol + ")");
  gmc::write_report_table(std::cout, baseline_average, "mean-fill baseline");
  return 0;
}

struct SynthOptions {
  int rows = 100;
  int cols = 20;
  int rank = 5;
  double signal_var = 1.0;
  double noise_floor = 0.1;
  double mean_base = 3.0;
  double mean_jitter = 0.5;
  double density = 0.5;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
};

int cmd_synth(const SynthOptions& sopts) {
  gmc::SynthSpec spec;
  spec.rows = sopts.rows;
  spec.cols = sopts.cols;
  spec.rank = sopts.rank;
  spec.signal_var = sopts.signal_var;
  spec.noise_floor = sopts.noise_floor;
  spec.mean_base = sopts.mean_base;
  spec.mean_jitter = sopts.mean_jitter;
  spec.density = sopts.density;
  spec.seed = sopts.seed;
  const gmc::SynthData data = gmc::synthesize(spec);

  std::ostringstream echo;
  echo << "rows=" << spec.rows << " cols=" << spec.cols << " rank=" << spec.rank
       << " signal_var=" << spec.signal_var << " noise_floor=" << spec.noise_floor
       << " mean_base=" << spec.mean_base << " mean_jitter=" << spec.mean_jitter
       << " density=" << spec.density << " seed=" << spec.seed;

  fs::path dir(sopts.output_dir);
  fs::create_directories(dir);
  gmc::save_csv(data.observed, (dir / "observed.csv").string(), "gmc synth " + echo.str());
  gmc::save_dense_matrix(data.full, (dir / "truth.csv").string(), "gmc synth " + echo.str());
  gmc::EmConfig truth_config;  // defaults echoed alongside the generating model
  gmc::save_model((dir / "truth_model.gmc").string(), data.truth, truth_config);

  std::cout << "synthetic dataset in " << dir.string() << ": " << data.observed.ratings.size()
            << " observed of " << spec.rows * spec.cols << " entries\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian matrix completion toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file (flags win)");

  SharedOptions fit_opts, bench_opts;
  PredictOptions predict_opts;
  BenchmarkOptions bench_extra;
  SynthOptions synth_opts;

  CLI::App* fit = app.add_subcommand("fit", "Train a Gaussian model on a ratings file");
  add_shared_options(fit, fit_opts, true);

  CLI::App* predict =
      app.add_subcommand("predict", "Predict ratings for users given their observed ratings");
  predict->add_option("--model", predict_opts.model_path, "Model file from fit")->required();
  predict->add_option("-i,--input", predict_opts.input, "Observed ratings CSV")->required();
  predict->add_option("--item-map", predict_opts.item_map,
                      "items.csv from fit; translates original item ids");
  predict->add_option("--items", predict_opts.items,
                      "Comma-separated dense item indices to predict (default: all)");
  predict->add_option("--users", predict_opts.users,
                      "Extra users to predict from the prior alone (no observations)");
  auto* pmin = predict->add_option("--rating-min", predict_opts.rating_min,
                                   "Integer projection lower bound");
  auto* pmax = predict->add_option("--rating-max", predict_opts.rating_max,
                                   "Integer projection upper bound");
  pmin->needs(pmax);
  pmax->needs(pmin);
  predict->add_option("-o,--output-dir", predict_opts.output_dir, "Directory for output files")
      ->capture_default_str();
  predict->callback(
      [pmin, &predict_opts] { predict_opts.range_set = pmin->count() > 0; });

  CLI::App* benchmark =
      app.add_subcommand("benchmark", "Weak/strong generalization protocol with NMAE scoring");
  add_shared_options(benchmark, bench_opts, true);
  benchmark->add_option("--protocol", bench_extra.protocol, "Generalization protocol")
      ->check(CLI::IsMember({"weak", "strong"}))
      ->required();
  benchmark->add_option("--runs", bench_extra.runs, "Number of seeded runs to average")
      ->capture_default_str();
  benchmark->add_option("--n-test-users", bench_extra.n_test_users,
                        "Held-out users (strong protocol)");
  benchmark->add_option("--observed-fraction", bench_extra.observed_fraction,
                        "Observed share of each test user's ratings (strong protocol)")
      ->capture_default_str();
  auto* factor_opt = benchmark->add_option(
      "--factor", bench_extra.factor,
      "NMAE normalization (default: (max-min)*0.4 from the rating range)");
  benchmark->add_flag("--export-splits", bench_extra.export_splits,
                      "Write split manifests next to the reports");
  benchmark->callback(
      [factor_opt, &bench_extra] { bench_extra.factor_set = factor_opt->count() > 0; });

  CLI::App* synth = app.add_subcommand("synth", "Generate a Gaussian ground-truth dataset");
  synth->add_option("--rows", synth_opts.rows, "Users")->capture_default_str();
  synth->add_option("--cols", synth_opts.cols, "Items")->capture_default_str();
  synth->add_option("--rank", synth_opts.rank, "Rank of the low-rank covariance part")
      ->capture_default_str();
  synth->add_option("--signal-var", synth_opts.signal_var, "Scale of the low-rank part")
      ->capture_default_str();
  synth->add_option("--noise-floor", synth_opts.noise_floor, "Diagonal added to the covariance")
      ->capture_default_str();
  synth->add_option("--mean-base", synth_opts.mean_base, "Mean level")->capture_default_str();
  synth->add_option("--mean-jitter", synth_opts.mean_jitter, "Per-coordinate mean spread")
      ->capture_default_str();
  synth->add_option("--density", synth_opts.density, "Observation probability per entry")
      ->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "Random seed")->capture_default_str();
  synth->add_option("-o,--output-dir", synth_opts.output_dir, "Directory for output files")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_opts);
    if (predict->parsed()) return cmd_predict(predict_opts);
    if (benchmark->parsed()) return cmd_benchmark(bench_opts, bench_extra);
    if (synth->parsed()) return cmd_synth(synth_opts);
  } catch (const gmc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const gmc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
