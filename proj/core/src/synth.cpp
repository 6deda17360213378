#include "treeffuse/synth.hpp"

#include <cmath>

namespace treeffuse {

namespace {

constexpr double kMixtureScale = 0.05;
constexpr double kInflationProb = 0.15;
constexpr double kArcScale = 0.05;
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

SynthKind synth_kind_from_string(const std::string& name) {
  if (name == "branching_mixture") return SynthKind::branching_mixture;
  if (name == "inflated_gamma") return SynthKind::inflated_gamma;
  if (name == "arc_multioutput") return SynthKind::arc_multioutput;
  if (name == "linear_gaussian") return SynthKind::linear_gaussian;
  throw ValidationError("unknown synthetic kind: " + name);
}

std::string to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::branching_mixture: return "branching_mixture";
    case SynthKind::inflated_gamma: return "inflated_gamma";
    case SynthKind::arc_multioutput: return "arc_multioutput";
    case SynthKind::linear_gaussian: return "linear_gaussian";
  }
  return "?";
}

std::vector<double> TruthOracle::branching_means(double x) {
  if (x <= 1.0 / 3.0) return {x, -x};
  if (x <= 2.0 / 3.0) return {x, 2.0 / 3.0 - x, -x};
  return {x, 4.0 / 3.0 - x, 2.0 / 3.0 - x, -x};
}

void TruthOracle::arc_params(double x, double& radius, double& theta0,
                             double& theta1) {
  if (x <= 0.5) {
    double l = (0.5 - x) / (0.5 - 0.17);
    double r = 1.0 - l;
    radius = l * 1.0 + r * 0.1;
    theta0 = l * (-0.05) + r * (-0.375);
    theta1 = l * 0.3 + r * 0.625;
  } else {
    double l = (0.83 - x) / (0.83 - 0.5);
    double r = 1.0 - l;
    radius = l * 0.1 + r * 1.0;
    theta0 = l * 0.125 + r * 0.45;
    theta1 = l * 1.125 + r * 0.8;
  }
}

std::vector<double> TruthOracle::sample_one(std::span<const double> x,
                                            Rng& rng) const {
  switch (kind) {
    case SynthKind::branching_mixture: {
      double xv = x[0];
      if (xv < 0.0 || xv > 1.0)
        throw ValidationError("truth_sample: x outside [0,1]");
      auto means = branching_means(xv);
      auto c = static_cast<std::size_t>(rng.uniform() * means.size());
      if (c >= means.size()) c = means.size() - 1;
      return {means[c] + kMixtureScale * rng.normal()};
    }
    case SynthKind::inflated_gamma: {
      double xv = x[0];
      if (xv < 0.0 || xv > 1.0)
        throw ValidationError("truth_sample: x outside [0,1]");
      if (rng.uniform() < kInflationProb) return {xv};
      return {xv + rng.exponential() + rng.exponential()};
    }
    case SynthKind::arc_multioutput: {
      double xv = x[0];
      if (xv < 0.0 || xv > 1.0)
        throw ValidationError("truth_sample: x outside [0,1]");
      double radius, t0, t1;
      arc_params(xv, radius, t0, t1);
      double angle = kTwoPi * rng.uniform(t0, t1);
      return {radius * std::cos(angle) + kArcScale * rng.normal(),
              radius * std::sin(angle) + kArcScale * rng.normal()};
    }
    case SynthKind::linear_gaussian: {
      if (x.size() != beta.size())
        throw ValidationError("truth_sample: x width mismatch");
      double mu = 0.0;
      for (std::size_t j = 0; j < beta.size(); ++j) mu += beta[j] * x[j];
      return {10.0 * mu + rng.normal()};
    }
  }
  throw std::runtime_error("unreachable");
}

SampleSet truth_sample(const TruthOracle& o, std::span<const double> x,
                       std::size_t m, Rng& rng) {
  SampleSet s;
  s.x_ref.assign(x.begin(), x.end());
  std::vector<double> first = o.sample_one(x, rng);
  s.draws = Matrix(m, first.size());
  std::copy(first.begin(), first.end(), s.draws.row(0).begin());
  for (std::size_t i = 1; i < m; ++i) {
    auto y = o.sample_one(x, rng);
    std::copy(y.begin(), y.end(), s.draws.row(i).begin());
  }
  return s;
}

namespace {

// Each row draws from its own derived stream so parallel generation by row
// ranges stays deterministic.
Rng row_rng(std::uint64_t seed, std::size_t row) {
  return Rng(derive_seed(seed, 0xda7a, row));
}

Dataset make_dataset(std::size_t n, std::size_t d_x, std::size_t d_y) {
  Dataset d;
  d.features = Matrix(n, d_x);
  d.responses = Matrix(n, d_y);
  for (std::size_t j = 0; j < d_x; ++j)
    d.feature_names.push_back(d_x == 1 ? "x" : "x" + std::to_string(j + 1));
  for (std::size_t k = 0; k < d_y; ++k)
    d.response_names.push_back(d_y == 1 ? "y" : "y" + std::to_string(k + 1));
  return d;
}

}  // namespace

std::pair<Dataset, TruthOracle> gen_branching_mixture(std::size_t n,
                                                      std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be >= 1");
  TruthOracle oracle{SynthKind::branching_mixture, {}};
  Dataset d = make_dataset(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = row_rng(seed, i);
    double x = rng.uniform();
    d.features(i, 0) = x;
    d.responses(i, 0) = oracle.sample_one(std::span(&x, 1), rng)[0];
  }
  return {std::move(d), oracle};
}

std::pair<Dataset, TruthOracle> gen_inflated_gamma(std::size_t n,
                                                   std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be >= 1");
  TruthOracle oracle{SynthKind::inflated_gamma, {}};
  Dataset d = make_dataset(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = row_rng(seed, i);
    double x = rng.uniform();
    d.features(i, 0) = x;
    d.responses(i, 0) = oracle.sample_one(std::span(&x, 1), rng)[0];
  }
  return {std::move(d), oracle};
}

std::pair<Dataset, TruthOracle> gen_arc_multioutput(std::size_t n,
                                                    std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be >= 1");
  TruthOracle oracle{SynthKind::arc_multioutput, {}};
  Dataset d = make_dataset(n, 1, 2);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = row_rng(seed, i);
    double x = rng.uniform();
    d.features(i, 0) = x;
    auto y = oracle.sample_one(std::span(&x, 1), rng);
    d.responses(i, 0) = y[0];
    d.responses(i, 1) = y[1];
  }
  return {std::move(d), oracle};
}

std::pair<Dataset, TruthOracle> gen_linear_gaussian(std::size_t n,
                                                    std::size_t d_x,
                                                    std::uint64_t seed) {
  if (n < 1 || d_x < 1) throw ValidationError("n and d_x must be >= 1");
  TruthOracle oracle{SynthKind::linear_gaussian, {}};
  Rng beta_rng(derive_seed(seed, 0xbe7a));
  oracle.beta.resize(d_x);
  for (auto& b : oracle.beta) b = beta_rng.normal();

  Dataset d = make_dataset(n, d_x, 1);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = row_rng(seed, i);
    for (std::size_t j = 0; j < d_x; ++j) d.features(i, j) = rng.normal();
    d.responses(i, 0) = oracle.sample_one(d.features.row(i), rng)[0];
  }
  return {std::move(d), oracle};
}

std::pair<Dataset, TruthOracle> generate(SynthKind kind, std::size_t n,
                                         std::size_t d_x, std::uint64_t seed) {
  switch (kind) {
    case SynthKind::branching_mixture: return gen_branching_mixture(n, seed);
    case SynthKind::inflated_gamma: return gen_inflated_gamma(n, seed);
    case SynthKind::arc_multioutput: return gen_arc_multioutput(n, seed);
    case SynthKind::linear_gaussian: return gen_linear_gaussian(n, d_x, seed);
  }
  throw std::runtime_error("unreachable");
}

}  // namespace treeffuse
