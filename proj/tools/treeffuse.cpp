// treeffuse: probabilistic tabular regression with tree-based diffusion.
//
// Subcommands: synth | train | sample | eval | newsvendor.
// Exit codes: 0 success, 1 validation error, 2 runtime/IO error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treeffuse/data.hpp"
#include "treeffuse/metrics.hpp"
#include "treeffuse/model_io.hpp"
#include "treeffuse/rng.hpp"
#include "treeffuse/synth.hpp"
#include "treeffuse/treeffuser.hpp"

namespace {

using namespace treeffuse;

int default_threads() {
  if (const char* env = std::getenv("TREEFFUSE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SynthArgs {
  std::string kind;
  std::size_t n = 1000;
  std::size_t d_x = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  auto [dataset, oracle] =
      generate(synth_kind_from_string(a.kind), a.n, a.d_x, a.seed);
  (void)oracle;
  save_csv(dataset, a.out);
  std::cerr << "wrote " << dataset.n() << " rows to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data;
  std::vector<std::string> response_cols;
  std::string model_out;
  TreeffuserConfig cfg;
};

int run_train(const TrainArgs& a) {
  validate(a.cfg);
  Dataset d = load_csv(a.data, a.response_cols);
  if (d.d_y() == 0) throw ValidationError("train: no response columns given");

  auto t0 = std::chrono::steady_clock::now();
  TreeffuserModel model = train(d, a.cfg);
  auto t1 = std::chrono::steady_clock::now();
  save_model(model, a.model_out);

  double secs = std::chrono::duration<double>(t1 - t0).count();
  for (std::size_t k = 0; k < model.d_y; ++k) {
    std::cerr << "dimension " << k + 1 << ": " << model.ensembles[k].trees.size()
              << " trees, best validation loss "
              << model.ensembles[k].best_valid_loss << "\n";
  }
  std::cerr << "trained in " << secs << " s; model written to " << a.model_out
            << "\n";
  return 0;
}

struct SampleArgs {
  std::string model;
  std::string data;
  std::vector<std::string> response_cols;  // dropped from the feature set
  std::size_t n_samples = 100;
  int n_steps = 50;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

int run_sample(const SampleArgs& a) {
  TreeffuserModel model = load_model(a.model);
  Dataset d = load_csv(a.data, a.response_cols);
  if (d.d_x() != model.d_x)
    throw ValidationError("sample: feature width mismatch (csv has " +
                          std::to_string(d.d_x()) + ", model expects " +
                          std::to_string(model.d_x) + ")");

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write file: " + a.out);
  out << "row,sample";
  for (std::size_t k = 0; k < model.d_y; ++k)
    out << ",y" << (model.d_y == 1 ? std::string() : std::to_string(k + 1));
  out << '\n';

  for (std::size_t i = 0; i < d.n(); ++i) {
    SamplerConfig sc{a.n_steps, derive_seed(a.seed, i)};
    SampleSet s = sample(model, d.features.row(i), a.n_samples, sc, a.threads);
    for (std::size_t j = 0; j < s.n_samples(); ++j) {
      out << i << ',' << j;
      for (std::size_t k = 0; k < model.d_y; ++k)
        out << ',' << fmt(s.draws(j, k));
      out << '\n';
    }
  }
  std::cerr << "wrote " << d.n() * a.n_samples << " samples to " << a.out
            << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::vector<std::string> response_cols;
  std::size_t crps_samples = 100;
  std::size_t mean_samples = 50;
  int n_steps = 50;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

int run_eval(const EvalArgs& a) {
  TreeffuserModel model = load_model(a.model);
  Dataset d = load_csv(a.data, a.response_cols);
  if (d.d_y() == 0) throw ValidationError("eval: no response columns given");
  if (d.d_x() != model.d_x || d.d_y() != model.d_y)
    throw ValidationError("eval: dataset shape does not match model");

  std::vector<SampleSet> sets;
  std::vector<std::vector<double>> truths;
  Matrix mean_preds(d.n(), d.d_y());
  Matrix y_true(d.n(), d.d_y());
  double crps_total = 0.0;

  for (std::size_t i = 0; i < d.n(); ++i) {
    SamplerConfig sc{a.n_steps, derive_seed(a.seed, i, 0)};
    SampleSet s =
        sample(model, d.features.row(i), a.crps_samples, sc, a.threads);
    crps_total += crps_multivariate(s, d.responses.row(i));

    SamplerConfig sc_mean{a.n_steps, derive_seed(a.seed, i, 1)};
    auto mean =
        predict_mean(model, d.features.row(i), a.mean_samples, sc_mean,
                     a.threads);
    for (std::size_t k = 0; k < d.d_y(); ++k) {
      mean_preds(i, k) = mean[k];
      y_true(i, k) = d.responses(i, k);
    }
    truths.emplace_back(d.responses.row(i).begin(), d.responses.row(i).end());
    sets.push_back(std::move(s));
  }

  EvalReport report;
  report.crps = crps_total / static_cast<double>(d.n());
  report.rmse = rmse(mean_preds, y_true);
  report.mae = mae(mean_preds, y_true);
  auto levels = default_mace_levels();
  report.mace = mace(sets, truths, levels);
  report.n_test = d.n();

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write file: " + a.out);
  out << report.to_key_value();
  std::cerr << report.to_key_value();
  return 0;
}

struct NewsvendorArgs {
  std::string model;
  std::string data;
  std::vector<std::string> response_cols;
  double price = 0.0;
  double cost = 0.0;
  std::size_t n_samples = 100;
  int n_steps = 50;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

int run_newsvendor(const NewsvendorArgs& a) {
  if (!(a.cost > 0.0 && a.cost < a.price))
    throw ValidationError("newsvendor requires 0 < cost < price");
  TreeffuserModel model = load_model(a.model);
  Dataset d = load_csv(a.data, a.response_cols);
  if (d.d_y() != 1)
    throw ValidationError("newsvendor: demand must be a single response column");
  if (d.d_x() != model.d_x || model.d_y != 1)
    throw ValidationError("newsvendor: dataset shape does not match model");

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write file: " + a.out);
  out << "row,order,profit,cumulative_profit\n";

  double cumulative = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    SamplerConfig sc{a.n_steps, derive_seed(a.seed, i)};
    SampleSet s = sample(model, d.features.row(i), a.n_samples, sc, a.threads);
    double order = newsvendor_order(s.column(0), a.price, a.cost);
    double profit = newsvendor_profit(order, d.responses(i, 0), a.price, a.cost);
    cumulative += profit;
    out << i << ',' << fmt(order) << ',' << fmt(profit) << ','
        << fmt(cumulative) << '\n';
  }
  std::cerr << "cumulative profit over " << d.n() << " rows: " << cumulative
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treeffuse: probabilistic tabular regression via tree-based "
               "diffusion models"};
  app.require_subcommand(1);

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd
      ->add_option("--kind", sy.kind,
                   "branching_mixture | inflated_gamma | arc_multioutput | "
                   "linear_gaussian")
      ->required();
  synth_cmd->add_option("--n", sy.n, "number of rows")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--dx", sy.d_x, "feature dimension (linear_gaussian)")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", sy.seed, "rng seed");
  synth_cmd->add_option("--out", sy.out, "output CSV path")->required();

  TrainArgs tr;
  tr.cfg.n_threads = default_threads();
  auto* train_cmd = app.add_subcommand("train", "train a model on a CSV");
  train_cmd->set_config("--config", "", "config file (flags take precedence)");
  train_cmd->add_option("--data", tr.data, "training CSV path")->required();
  train_cmd
      ->add_option("--response-cols", tr.response_cols,
                   "response column labels")
      ->required()
      ->delimiter(',');
  train_cmd->add_option("--model-out", tr.model_out, "model file path")
      ->required();
  train_cmd->add_option("--n-estimators", tr.cfg.gbt.n_estimators)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--learning-rate", tr.cfg.gbt.learning_rate)
      ->check(CLI::Range(std::numeric_limits<double>::min(), 1.0));
  train_cmd->add_option("--num-leaves", tr.cfg.gbt.num_leaves)
      ->check(CLI::Range(2, 1 << 20));
  train_cmd->add_option("--early-stopping-rounds",
                        tr.cfg.gbt.early_stopping_rounds)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-bins", tr.cfg.gbt.max_bins)
      ->check(CLI::Range(2, 65000));
  train_cmd->add_option("--min-samples-leaf", tr.cfg.gbt.min_samples_leaf)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--n-repeats", tr.cfg.n_repeats)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--alpha-min", tr.cfg.sde.alpha_min)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--alpha-max", tr.cfg.sde.alpha_max)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--horizon", tr.cfg.sde.horizon)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--validation-fraction", tr.cfg.validation_fraction)
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  train_cmd->add_option("--seed", tr.cfg.seed);
  train_cmd->add_flag_callback(
      "--no-noise-scaling", [&tr]() { tr.cfg.scale_noise = false; },
      "train on -zeta*sigma(t) and skip the 1/sigma division (ablation)");
  train_cmd->add_option("--threads", tr.cfg.n_threads)
      ->check(CLI::PositiveNumber);

  SampleArgs sa;
  sa.threads = default_threads();
  auto* sample_cmd =
      app.add_subcommand("sample", "draw predictive samples for each row");
  sample_cmd->add_option("--model", sa.model, "model file")->required();
  sample_cmd->add_option("--data", sa.data, "CSV with feature columns")
      ->required();
  sample_cmd
      ->add_option("--response-cols", sa.response_cols,
                   "columns to drop from the feature set")
      ->delimiter(',');
  sample_cmd->add_option("--n-samples", sa.n_samples)
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--n-steps", sa.n_steps)->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sa.seed);
  sample_cmd->add_option("--out", sa.out, "output CSV path")->required();
  sample_cmd->add_option("--threads", sa.threads)->check(CLI::PositiveNumber);

  EvalArgs ev;
  ev.threads = default_threads();
  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate CRPS/RMSE/MAE/MACE on a test CSV");
  eval_cmd->add_option("--model", ev.model, "model file")->required();
  eval_cmd->add_option("--data", ev.data, "test CSV path")->required();
  eval_cmd
      ->add_option("--response-cols", ev.response_cols,
                   "response column labels")
      ->required()
      ->delimiter(',');
  eval_cmd->add_option("--crps-samples", ev.crps_samples)
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--mean-samples", ev.mean_samples)
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--n-steps", ev.n_steps)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ev.seed);
  eval_cmd->add_option("--out", ev.out, "report file (key=value lines)")
      ->required();
  eval_cmd->add_option("--threads", ev.threads)->check(CLI::PositiveNumber);

  NewsvendorArgs nv;
  nv.threads = default_threads();
  auto* nv_cmd = app.add_subcommand(
      "newsvendor", "order by the (p-c)/p quantile and track profit");
  nv_cmd->add_option("--model", nv.model, "model file")->required();
  nv_cmd->add_option("--data", nv.data, "demand CSV path")->required();
  nv_cmd
      ->add_option("--response-cols", nv.response_cols,
                   "demand column label")
      ->required()
      ->delimiter(',');
  nv_cmd->add_option("--price", nv.price)->required();
  nv_cmd->add_option("--cost", nv.cost)->required();
  nv_cmd->add_option("--n-samples", nv.n_samples)->check(CLI::PositiveNumber);
  nv_cmd->add_option("--n-steps", nv.n_steps)->check(CLI::PositiveNumber);
  nv_cmd->add_option("--seed", nv.seed);
  nv_cmd->add_option("--out", nv.out, "profit ledger CSV path")->required();
  nv_cmd->add_option("--threads", nv.threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(sy);
    if (train_cmd->parsed()) return run_train(tr);
    if (sample_cmd->parsed()) return run_sample(sa);
    if (eval_cmd->parsed()) return run_eval(ev);
    if (nv_cmd->parsed()) return run_newsvendor(nv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
