#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "treeffuse/data.hpp"
#include "treeffuse/diffusion.hpp"
#include "treeffuse/gbt.hpp"
#include "treeffuse/metrics.hpp"

namespace treeffuse {

struct TreeffuserConfig {
  int n_repeats = 30;  // Monte Carlo draws per data point
  SdeConfig sde;
  GbtParams gbt;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  // Learn U with target -zeta and predict U/sigma. Disabling trains on
  // -zeta*sigma(t) and uses U directly (ablation variant; much worse).
  bool scale_noise = true;
  int n_threads = 1;
};

void validate(const TreeffuserConfig& cfg);

// Monte Carlo score-matching table. Input columns: [y_t | t | x];
// targets: -zeta per response dimension.
struct ScoreTrainingTable {
  Matrix inputs;
  Matrix targets;
};

struct SamplerConfig {
  int n_steps = 50;
  std::uint64_t seed = 0;
};

struct TreeffuserModel {
  std::vector<GbtEnsemble> ensembles;  // one per response dimension
  SdeConfig sde;
  ResponseScaler scaler;
  std::size_t d_x = 0;
  std::size_t d_y = 0;
  bool scale_noise = true;
};

// Expects responses already standardized. Row blocks are seeded per source
// row, so construction can be partitioned without changing the result.
ScoreTrainingTable build_training_table(const Dataset& d,
                                        const TreeffuserConfig& cfg,
                                        std::uint64_t table_seed);

TreeffuserModel train(const Dataset& d, const TreeffuserConfig& cfg);

// Estimated conditional score U(y, t, x) / sigma(t) in standardized space.
std::vector<double> score(const TreeffuserModel& m, std::span<const double> y,
                          double t, std::span<const double> x);

using ScoreFn = std::function<std::vector<double>(
    std::span<const double> y, double t, std::span<const double> x)>;

// Batch form: scores(i, k) for each row of ys at a shared (t, x).
using BatchScoreFn = std::function<void(const Matrix& ys, double t,
                                        std::span<const double> x,
                                        Matrix& scores)>;

// Reverse-SDE Euler-Maruyama with a caller-supplied score; no scaler
// inversion. Step: y <- y - (f~ * delta + g(t) * sqrt(delta) * w), score
// evaluated at the pre-step t, descending from T to delta.
SampleSet sample_with_score(const ScoreFn& score_fn, const SdeConfig& sde,
                            std::span<const double> x, std::size_t d_y,
                            std::size_t n_samples, const SamplerConfig& sc,
                            int n_threads = 1);

SampleSet sample_with_score(const BatchScoreFn& score_fn, const SdeConfig& sde,
                            std::span<const double> x, std::size_t d_y,
                            std::size_t n_samples, const SamplerConfig& sc,
                            int n_threads = 1);

// Full pipeline: sample in standardized space, invert through the scaler.
SampleSet sample(const TreeffuserModel& m, std::span<const double> x,
                 std::size_t n_samples, const SamplerConfig& sc,
                 int n_threads = 1);

std::vector<double> predict_mean(const TreeffuserModel& m,
                                 std::span<const double> x,
                                 std::size_t n_samples, const SamplerConfig& sc,
                                 int n_threads = 1);

std::vector<double> predict_quantile(const TreeffuserModel& m,
                                     std::span<const double> x, double q,
                                     std::size_t n_samples,
                                     const SamplerConfig& sc,
                                     int n_threads = 1);

}  // namespace treeffuse
