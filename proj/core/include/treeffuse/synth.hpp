#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "treeffuse/data.hpp"
#include "treeffuse/metrics.hpp"
#include "treeffuse/rng.hpp"

namespace treeffuse {

enum class SynthKind {
  branching_mixture,
  inflated_gamma,
  arc_multioutput,
  linear_gaussian,
};

SynthKind synth_kind_from_string(const std::string& name);
std::string to_string(SynthKind kind);

// Frozen ground-truth conditional sampler for a generated dataset.
struct TruthOracle {
  SynthKind kind = SynthKind::branching_mixture;
  std::vector<double> beta;  // linear_gaussian only

  // Component means of the branching mixture at covariate x.
  static std::vector<double> branching_means(double x);
  // Arc geometry at covariate x: radius and angle endpoints (in turns).
  static void arc_params(double x, double& radius, double& theta0,
                         double& theta1);

  std::vector<double> sample_one(std::span<const double> x, Rng& rng) const;
};

SampleSet truth_sample(const TruthOracle& o, std::span<const double> x,
                       std::size_t m, Rng& rng);

// x ~ U[0,1]; y from an equally-weighted Gaussian mixture whose component
// count and means branch with x (scale 0.05).
std::pair<Dataset, TruthOracle> gen_branching_mixture(std::size_t n,
                                                      std::uint64_t seed);

// x ~ U[0,1]; y = x with probability 0.15, else x + Gamma(shape 2, scale 1).
std::pair<Dataset, TruthOracle> gen_inflated_gamma(std::size_t n,
                                                   std::uint64_t seed);

// x ~ U[0,1]; y in R^2 on a moving circular arc plus N(0, 0.05^2 I) offset.
std::pair<Dataset, TruthOracle> gen_arc_multioutput(std::size_t n,
                                                    std::uint64_t seed);

// beta ~ N(0,I) once per seed; x ~ N(0,I); y ~ N(10 beta'x, 1).
std::pair<Dataset, TruthOracle> gen_linear_gaussian(std::size_t n,
                                                    std::size_t d_x,
                                                    std::uint64_t seed);

std::pair<Dataset, TruthOracle> generate(SynthKind kind, std::size_t n,
                                         std::size_t d_x, std::uint64_t seed);

}  // namespace treeffuse
