#include "treeffuse/treeffuser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "treeffuse/rng.hpp"

namespace treeffuse {

void validate(const TreeffuserConfig& cfg) {
  if (cfg.n_repeats < 1) throw ValidationError("n_repeats must be >= 1");
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0))
    throw ValidationError("validation_fraction must be in (0,1)");
  if (!(cfg.sde.alpha_min > 0.0 && cfg.sde.alpha_max > cfg.sde.alpha_min))
    throw ValidationError("require 0 < alpha_min < alpha_max");
  if (!(cfg.sde.horizon > 0.0)) throw ValidationError("horizon must be > 0");
  validate(cfg.gbt);
}

ScoreTrainingTable build_training_table(const Dataset& d,
                                        const TreeffuserConfig& cfg,
                                        std::uint64_t table_seed) {
  const std::size_t n = d.n();
  const std::size_t d_x = d.d_x();
  const std::size_t d_y = d.d_y();
  const auto repeats = static_cast<std::size_t>(cfg.n_repeats);
  const double T = cfg.sde.horizon;

  ScoreTrainingTable table;
  table.inputs = Matrix(n * repeats, d_y + 1 + d_x);
  table.targets = Matrix(n * repeats, d_y);

#pragma omp parallel for schedule(static) num_threads(cfg.n_threads)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Rng rng(derive_seed(table_seed, i));
    auto y0 = d.responses.row(i);
    auto x = d.features.row(i);
    for (std::size_t r = 0; r < repeats; ++r) {
      const std::size_t row = i * repeats + r;
      const double t = rng.uniform(0.0, T);
      const double s = sigma(cfg.sde, t);
      auto in = table.inputs.row(row);
      auto tgt = table.targets.row(row);
      for (std::size_t k = 0; k < d_y; ++k) {
        double zeta = rng.normal();
        in[k] = y0[k] + s * zeta;
        tgt[k] = cfg.scale_noise ? -zeta : -zeta * s;
      }
      in[d_y] = t;
      std::copy(x.begin(), x.end(), in.begin() + d_y + 1);
    }
  }
  return table;
}

TreeffuserModel train(const Dataset& d, const TreeffuserConfig& cfg) {
  validate(cfg);

  TreeffuserModel m;
  m.sde = cfg.sde;
  m.d_x = d.d_x();
  m.d_y = d.d_y();
  m.scale_noise = cfg.scale_noise;
  m.scaler = fit_scaler(d);

  Dataset standardized = d;
  for (std::size_t i = 0; i < d.n(); ++i) {
    auto z = apply_scaler(m.scaler, d.responses.row(i));
    std::copy(z.begin(), z.end(), standardized.responses.row(i).begin());
  }

  // Early stopping validates on held-out (t, zeta) draws: the table is built
  // over all rows and split at table-row level, so validation rows share
  // source x's with training but carry fresh noise. Holding out source rows
  // instead stops far too early and costs a lot of test accuracy.
  ScoreTrainingTable table =
      build_training_table(standardized, cfg, derive_seed(cfg.seed, 2));
  const std::size_t n_rows = table.inputs.rows;
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  {
    Rng rng(derive_seed(cfg.seed, 1));
    for (std::size_t i = n_rows; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
  }
  auto n_valid = static_cast<std::size_t>(
      std::llround(cfg.validation_fraction * static_cast<double>(n_rows)));
  n_valid = std::clamp<std::size_t>(n_valid, 1, n_rows - 1);

  ScoreTrainingTable train_table, valid_table;
  train_table.inputs = Matrix(n_rows - n_valid, table.inputs.cols);
  train_table.targets = Matrix(n_rows - n_valid, table.targets.cols);
  valid_table.inputs = Matrix(n_valid, table.inputs.cols);
  valid_table.targets = Matrix(n_valid, table.targets.cols);
  for (std::size_t i = 0; i < n_rows; ++i) {
    ScoreTrainingTable& dst = i < n_valid ? valid_table : train_table;
    const std::size_t row = i < n_valid ? i : i - n_valid;
    auto src_in = table.inputs.row(order[i]);
    auto src_tg = table.targets.row(order[i]);
    std::copy(src_in.begin(), src_in.end(), dst.inputs.row(row).begin());
    std::copy(src_tg.begin(), src_tg.end(), dst.targets.row(row).begin());
  }

  for (std::size_t k = 0; k < m.d_y; ++k) {
    std::vector<double> train_y(train_table.targets.rows);
    std::vector<double> valid_y(valid_table.targets.rows);
    for (std::size_t i = 0; i < train_y.size(); ++i)
      train_y[i] = train_table.targets(i, k);
    for (std::size_t i = 0; i < valid_y.size(); ++i)
      valid_y[i] = valid_table.targets(i, k);
    m.ensembles.push_back(fit_gbt(train_table.inputs, train_y,
                                  valid_table.inputs, valid_y, cfg.gbt,
                                  cfg.n_threads));
  }
  return m;
}

std::vector<double> score(const TreeffuserModel& m, std::span<const double> y,
                          double t, std::span<const double> x) {
  if (y.size() != m.d_y || x.size() != m.d_x)
    throw ValidationError("score: dimension mismatch");
  std::vector<double> input(m.d_y + 1 + m.d_x);
  std::copy(y.begin(), y.end(), input.begin());
  input[m.d_y] = t;
  std::copy(x.begin(), x.end(), input.begin() + m.d_y + 1);

  const double denom = m.scale_noise ? sigma(m.sde, t) : 1.0;
  std::vector<double> out(m.d_y);
  for (std::size_t k = 0; k < m.d_y; ++k)
    out[k] = m.ensembles[k].predict(input) / denom;
  return out;
}

SampleSet sample_with_score(const BatchScoreFn& score_fn, const SdeConfig& sde,
                            std::span<const double> x, std::size_t d_y,
                            std::size_t n_samples, const SamplerConfig& sc,
                            int n_threads) {
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  if (sc.n_steps < 1) throw ValidationError("n_steps must be >= 1");
  if (n_threads < 1) n_threads = 1;

  const double T = sde.horizon;
  const double delta = T / static_cast<double>(sc.n_steps);
  const double sqrt_delta = std::sqrt(delta);

  // One generator per sample, consumed in a fixed per-sample order
  // (p_simple draw, then one normal per step and dimension), so results do
  // not depend on thread count or batching.
  std::vector<Rng> rngs;
  rngs.reserve(n_samples);
  Matrix ys(n_samples, d_y);
  for (std::size_t s = 0; s < n_samples; ++s) {
    rngs.emplace_back(derive_seed(sc.seed, 0x5a4e, s));
    std::vector<double> y0 = sample_p_simple(sde, d_y, rngs.back());
    std::copy(y0.begin(), y0.end(), ys.row(s).begin());
  }

  Matrix scores(n_samples, d_y);
  bool diverged = false;
  for (int i = 0; i < sc.n_steps && !diverged; ++i) {
    const double t = T - static_cast<double>(i) * delta;
    const double g = diffusion_coeff(sde, t);
    score_fn(ys, t, x, scores);
#pragma omp parallel for schedule(static) num_threads(n_threads)
    for (std::int64_t ss = 0; ss < static_cast<std::int64_t>(n_samples); ++ss) {
      const auto s = static_cast<std::size_t>(ss);
      bool ok = true;
      for (std::size_t k = 0; k < d_y; ++k) {
        const double drift_term = -g * g * scores(s, k);  // f = 0 for the VESDE
        ys(s, k) -= drift_term * delta + g * sqrt_delta * rngs[s].normal();
        ok = ok && std::isfinite(ys(s, k));
      }
      if (!ok) {
#pragma omp atomic write
        diverged = true;
      }
    }
  }
  if (diverged)
    throw std::runtime_error(
        "sampler produced a non-finite state (divergent or miscaled score)");

  SampleSet out;
  out.x_ref.assign(x.begin(), x.end());
  out.draws = std::move(ys);
  return out;
}

SampleSet sample_with_score(const ScoreFn& score_fn, const SdeConfig& sde,
                            std::span<const double> x, std::size_t d_y,
                            std::size_t n_samples, const SamplerConfig& sc,
                            int n_threads) {
  BatchScoreFn batch = [&score_fn](const Matrix& ys, double t,
                                   std::span<const double> xv, Matrix& out) {
    for (std::size_t i = 0; i < ys.rows; ++i) {
      std::vector<double> v = score_fn(ys.row(i), t, xv);
      std::copy(v.begin(), v.end(), out.row(i).begin());
    }
  };
  return sample_with_score(batch, sde, x, d_y, n_samples, sc, n_threads);
}

SampleSet sample(const TreeffuserModel& m, std::span<const double> x,
                 std::size_t n_samples, const SamplerConfig& sc,
                 int n_threads) {
  if (x.size() != m.d_x) throw ValidationError("sample: x width mismatch");
  if (n_threads < 1) n_threads = 1;
  // Batched score: bin the whole sample block once per step so tree
  // traversal stays on integer comparisons.
  const std::size_t width = m.d_y + 1 + m.d_x;
  BatchScoreFn fn = [&m, width, n_threads](const Matrix& ys, double t,
                                           std::span<const double> xv,
                                           Matrix& out) {
    Matrix inputs(ys.rows, width);
    for (std::size_t i = 0; i < ys.rows; ++i) {
      auto dst = inputs.row(i);
      auto src = ys.row(i);
      std::copy(src.begin(), src.end(), dst.begin());
      dst[m.d_y] = t;
      std::copy(xv.begin(), xv.end(), dst.begin() + m.d_y + 1);
    }
    const double denom = m.scale_noise ? sigma(m.sde, t) : 1.0;
    for (std::size_t k = 0; k < m.d_y; ++k) {
      const GbtEnsemble& e = m.ensembles[k];
      const BinnedMatrix b = bin_matrix(e.bin_map, inputs);
#pragma omp parallel for schedule(static) num_threads(n_threads)
      for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(ys.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double p = e.base_score;
        for (const Tree& tree : e.trees)
          p += e.learning_rate * tree.eval_binned(b, i);
        out(i, k) = p / denom;
      }
    }
  };
  SampleSet s = sample_with_score(fn, m.sde, x, m.d_y, n_samples, sc, n_threads);
  for (std::size_t i = 0; i < s.n_samples(); ++i) {
    auto orig = invert_scaler(m.scaler, s.draws.row(i));
    std::copy(orig.begin(), orig.end(), s.draws.row(i).begin());
  }
  return s;
}

std::vector<double> predict_mean(const TreeffuserModel& m,
                                 std::span<const double> x,
                                 std::size_t n_samples, const SamplerConfig& sc,
                                 int n_threads) {
  SampleSet s = sample(m, x, n_samples, sc, n_threads);
  std::vector<double> mean(m.d_y, 0.0);
  for (std::size_t i = 0; i < s.n_samples(); ++i)
    for (std::size_t k = 0; k < m.d_y; ++k) mean[k] += s.draws(i, k);
  for (auto& v : mean) v /= static_cast<double>(s.n_samples());
  return mean;
}

std::vector<double> predict_quantile(const TreeffuserModel& m,
                                     std::span<const double> x, double q,
                                     std::size_t n_samples,
                                     const SamplerConfig& sc, int n_threads) {
  SampleSet s = sample(m, x, n_samples, sc, n_threads);
  std::vector<double> out(m.d_y);
  for (std::size_t k = 0; k < m.d_y; ++k)
    out[k] = empirical_quantile(s.column(k), q);
  return out;
}

}  // namespace treeffuse
