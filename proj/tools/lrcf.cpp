#include <algorithm>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrcf/csv.hpp"
#include "lrcf/density.hpp"
#include "lrcf/factorization.hpp"
#include "lrcf/model_io.hpp"
#include "lrcf/sampler.hpp"

namespace {

using namespace lrcf;

struct TrainArgs {
  std::string input;
  std::string output;
  FitOptions opts;
  char delimiter = ',';
};

void print_report(const FitReport& report) {
  std::printf("objective trajectory:");
  for (double v : report.trajectory) std::printf(" %.6g", v);
  std::printf("\n");
  std::printf("sweeps: %d (%s)\n", report.iterations,
              report.converged ? "converged" : "not converged");
  std::printf("triples retained: %zu\n", report.triples.size());
  std::printf("identifiability advisory: %s (generic uniqueness bound %lld)\n",
              report.identifiability_ok ? "ok" : "warn",
              static_cast<long long>(report.identifiability_bound));
  for (const std::string& w : report.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("wall time: %.2f s\n", report.wall_seconds);
}

int cmd_train(const TrainArgs& args) {
  const CsvTable table = read_csv(args.input, args.delimiter);
  FitResult result = fit(table.data, args.opts);
  print_report(result.report);
  save_model(args.output, result.model);
  std::printf("model written to %s\n", args.output.c_str());
  return 0;
}

struct GridSpec {
  std::vector<int> ranks;
  std::vector<int> harmonics;
};

GridSpec parse_grid(const std::string& spec) {
  GridSpec grid;
  std::istringstream parts(spec);
  std::string part;
  while (std::getline(parts, part, ';')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) throw invalid_argument("grid: expected F=...;K=...");
    const std::string key = part.substr(0, eq);
    std::vector<int>* dest = nullptr;
    if (key == "F") dest = &grid.ranks;
    else if (key == "K") dest = &grid.harmonics;
    else throw invalid_argument("grid: unknown key '" + key + "'");
    std::istringstream values(part.substr(eq + 1));
    std::string tok;
    while (std::getline(values, tok, ',')) {
      try {
        dest->push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw invalid_argument("grid: cannot parse '" + tok + "'");
      }
    }
  }
  if (grid.ranks.empty() || grid.harmonics.empty()) {
    throw invalid_argument("grid: both F and K value lists are required");
  }
  return grid;
}

//! Row split for validation: a seeded shuffle, first `fraction` of rows out.
std::pair<Dataset, Dataset> split_rows(const Dataset& data, double fraction, std::uint64_t seed) {
  const Index m = data.rows();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed ^ 0xc2b2ae3d27d4eb4fULL);
  for (Index i = m - 1; i > 0; --i) {
    const Index j = std::min<Index>(i, static_cast<Index>(rng.uniform() * (i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const Index val_rows = std::max<Index>(1, static_cast<Index>(fraction * m));
  if (val_rows >= m) throw data_error("validation split leaves no training rows");

  auto take = [&](Index begin, Index count) {
    RMatrix values(count, data.cols());
    BoolArray mask(count, data.cols());
    for (Index r = 0; r < count; ++r) {
      values.row(r) = data.values.row(order[static_cast<std::size_t>(begin + r)]);
      mask.row(r) = data.mask.row(order[static_cast<std::size_t>(begin + r)]);
    }
    return Dataset(std::move(values), std::move(mask));
  };
  return {take(val_rows, m - val_rows), take(0, val_rows)};
}

int cmd_crossval(const std::string& input, const std::string& grid_spec, const std::string& output,
                 double fraction, FitOptions base, char delimiter) {
  const CsvTable table = read_csv(input, delimiter);
  const GridSpec grid = parse_grid(grid_spec);
  auto [train_part, val_part] = split_rows(table.data, fraction, base.seed);

  struct Cell {
    int rank, harmonics;
    double val_ll = 0.0;
    bool ok = false;
    std::string message;
  };
  std::vector<Cell> cells;
  for (int f : grid.ranks) {
    for (int k : grid.harmonics) {
      Cell cell{f, k};
      try {
        FitOptions opts = base;
        opts.rank = f;
        opts.harmonics = k;
        const FitResult fitted = fit(train_part, opts);
        cell.val_ll = log_likelihood(fitted.model, val_part).mean_log_likelihood;
        cell.ok = true;
      } catch (const error& e) {
        cell.message = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }

  std::printf("%6s %6s %18s\n", "F", "K", "validation-ll");
  const Cell* best = nullptr;
  for (const Cell& c : cells) {
    if (c.ok) {
      std::printf("%6d %6d %18.6f\n", c.rank, c.harmonics, c.val_ll);
      // Ties break toward the smaller model (F first, then K).
      if (!best || c.val_ll > best->val_ll ||
          (c.val_ll == best->val_ll &&
           (c.rank < best->rank || (c.rank == best->rank && c.harmonics < best->harmonics)))) {
        best = &c;
      }
    } else {
      std::printf("%6d %6d %18s (%s)\n", c.rank, c.harmonics, "failed", c.message.c_str());
    }
  }
  if (!best) throw data_error("cross-validation: every grid cell failed");
  std::printf("selected F=%d K=%d\n", best->rank, best->harmonics);

  FitOptions opts = base;
  opts.rank = best->rank;
  opts.harmonics = best->harmonics;
  FitResult final_fit = fit(table.data, opts);
  print_report(final_fit.report);
  save_model(output, final_fit.model);
  std::printf("model written to %s\n", output.c_str());
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& input, char delimiter) {
  const CpdModel model = load_model(model_path);
  const CsvTable table = read_csv(input, delimiter);
  const LogLikelihoodReport report = log_likelihood(model, table.data);
  std::printf("rows scored: %lld (on observed-subset marginals: %lld, skipped: %lld)\n",
              static_cast<long long>(report.rows_scored),
              static_cast<long long>(report.rows_marginal),
              static_cast<long long>(report.rows_skipped));
  std::printf("clamped coordinates: %lld, floored densities: %lld\n",
              static_cast<long long>(report.diagnostics.clamped_coords),
              static_cast<long long>(report.diagnostics.floored_logs));
  std::printf("average log-likelihood: %.6f\n", report.mean_log_likelihood);
  return 0;
}

int cmd_sample(const std::string& model_path, Index count, std::uint64_t seed,
               const std::string& output, char delimiter) {
  const CpdModel model = load_model(model_path);
  const Dataset draws = sample(model, count, seed);
  write_csv(output, draws.values, {}, delimiter);
  std::printf("%lld samples written to %s\n", static_cast<long long>(count), output.c_str());
  return 0;
}

int cmd_regress(const std::string& model_path, const std::string& input,
                const std::string& targets_spec, const std::string& output, char delimiter) {
  const CpdModel model = load_model(model_path);
  const CsvTable table = read_csv(input, delimiter);
  if (table.data.cols() != model.num_vars) {
    throw invalid_argument("regress: input column count does not match the model");
  }

  std::vector<int> targets;
  std::vector<std::string> target_names;
  {
    std::istringstream spec(targets_spec);
    std::string tok;
    while (std::getline(spec, tok, ',')) {
      targets.push_back(table.column_index(tok));
      target_names.push_back(tok);
    }
  }
  if (targets.empty()) throw invalid_argument("regress: no targets given");

  const Index m = table.data.rows();
  RMatrix predictions(m, static_cast<Index>(targets.size()));
  std::vector<double> abs_err(targets.size(), 0.0);
  std::vector<Index> err_rows(targets.size(), 0);
  for (Index r = 0; r < m; ++r) {
    DensityQuery query;
    for (Index c = 0; c < table.data.cols(); ++c) {
      const bool is_target =
          std::find(targets.begin(), targets.end(), static_cast<int>(c)) != targets.end();
      if (!is_target && table.data.mask(r, c)) query.observed.push_back(static_cast<int>(c));
    }
    query.values.resize(static_cast<Index>(query.observed.size()));
    for (std::size_t q = 0; q < query.observed.size(); ++q) {
      query.values[static_cast<Index>(q)] = table.data.values(r, query.observed[q]);
    }
    query.targets = targets;
    const std::vector<ConditionalMean> result = impute(model, query);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      predictions(r, static_cast<Index>(t)) = result[t].value;
      if (table.data.mask(r, targets[t])) {
        abs_err[t] += std::abs(result[t].value - table.data.values(r, targets[t]));
        ++err_rows[t];
      }
    }
  }
  write_csv(output, predictions, target_names, delimiter);
  std::printf("predictions written to %s\n", output.c_str());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (err_rows[t] > 0) {
      std::printf("MAE[%s]: %.6f over %lld rows\n", target_names[t].c_str(),
                  abs_err[t] / static_cast<double>(err_rows[t]),
                  static_cast<long long>(err_rows[t]));
    }
  }
  return 0;
}

void add_fit_flags(CLI::App* cmd, FitOptions& opts) {
  cmd->add_option("--triples", opts.triple_budget, "Max variable triples (-1 = all)");
  cmd->add_option("--seed", opts.seed, "Random seed");
  cmd->add_option("--restarts", opts.restarts, "Random restarts");
  cmd->add_option("--min-count", opts.min_count, "Joint observations required per triple");
  cmd->add_option("--pad", opts.pad, "Normalization padding fraction");
  cmd->add_option("--max-iters", opts.max_outer_iters, "Outer sweep cap");
  cmd->add_option("--tol", opts.rel_tol, "Relative objective tolerance");
  cmd->add_flag("--weight-by-count", opts.weight_by_count,
                "Weight triples by their joint observation count");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank characteristic-tensor density estimation"};
  app.require_subcommand(1);

  char delimiter = ',';
  app.add_option("--delimiter", delimiter, "CSV field delimiter")->capture_default_str();

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Fit a density model to a CSV dataset");
  train_cmd->add_option("--input", train.input, "Training CSV")->required();
  train_cmd->add_option("--rank", train.opts.rank, "Mixture rank F")->required();
  train_cmd->add_option("--harmonics", train.opts.harmonics, "Harmonic cutoff K")->required();
  train_cmd->add_option("--output", train.output, "Model file to write")->required();
  add_fit_flags(train_cmd, train.opts);

  std::string cv_input, cv_grid, cv_output;
  double cv_fraction = 0.2;
  FitOptions cv_opts;
  CLI::App* cv_cmd = app.add_subcommand("crossval", "Grid-search F and K on a validation split");
  cv_cmd->add_option("--input", cv_input, "Training CSV")->required();
  cv_cmd->add_option("--grid", cv_grid, "Grid, e.g. \"F=2,4,8;K=3,5,7\"")->required();
  cv_cmd->add_option("--output", cv_output, "Model file to write")->required();
  cv_cmd->add_option("--val-fraction", cv_fraction, "Validation fraction of the training data")
      ->capture_default_str();
  add_fit_flags(cv_cmd, cv_opts);

  std::string eval_model, eval_input;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Average log-likelihood of a dataset");
  eval_cmd->add_option("--model", eval_model, "Model file")->required();
  eval_cmd->add_option("--input", eval_input, "CSV to score")->required();

  std::string sample_model, sample_output;
  Index sample_count = 0;
  std::uint64_t sample_seed = 0;
  CLI::App* sample_cmd = app.add_subcommand("sample", "Draw synthetic samples from a model");
  sample_cmd->add_option("--model", sample_model, "Model file")->required();
  sample_cmd->add_option("--count", sample_count, "Number of samples")->required();
  sample_cmd->add_option("--seed", sample_seed, "Random seed");
  sample_cmd->add_option("--output", sample_output, "CSV to write")->required();

  std::string reg_model, reg_input, reg_targets, reg_output = "predictions.csv";
  CLI::App* reg_cmd = app.add_subcommand("regress", "Predict target columns by conditional mean");
  reg_cmd->add_option("--model", reg_model, "Model file")->required();
  reg_cmd->add_option("--input", reg_input, "CSV with observed columns")->required();
  reg_cmd->add_option("--targets", reg_targets, "Comma-separated target columns")->required();
  reg_cmd->add_option("--output", reg_output, "Predictions CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) {
      train.delimiter = delimiter;
      return cmd_train(train);
    }
    if (*cv_cmd) return cmd_crossval(cv_input, cv_grid, cv_output, cv_fraction, cv_opts, delimiter);
    if (*eval_cmd) return cmd_eval(eval_model, eval_input, delimiter);
    if (*sample_cmd) return cmd_sample(sample_model, sample_count, sample_seed, sample_output, delimiter);
    if (*reg_cmd) return cmd_regress(reg_model, reg_input, reg_targets, reg_output, delimiter);
  } catch (const invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
