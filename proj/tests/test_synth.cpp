#include <doctest.h>

#include <cmath>
#include <vector>

#include "treeffuse/synth.hpp"

using namespace treeffuse;

TEST_CASE("kind names round-trip and unknown names are rejected") {
  for (auto k : {SynthKind::branching_mixture, SynthKind::inflated_gamma,
                 SynthKind::arc_multioutput, SynthKind::linear_gaussian})
    CHECK(synth_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(synth_kind_from_string("nope"), ValidationError);
}

TEST_CASE("branching component means at hand-picked covariates") {
  auto m1 = TruthOracle::branching_means(0.2);
  REQUIRE(m1.size() == 2);
  CHECK(m1[0] == doctest::Approx(0.2));
  CHECK(m1[1] == doctest::Approx(-0.2));

  auto m2 = TruthOracle::branching_means(0.5);
  REQUIRE(m2.size() == 3);
  CHECK(m2[0] == doctest::Approx(0.5));
  CHECK(m2[1] == doctest::Approx(2.0 / 3.0 - 0.5));
  CHECK(m2[2] == doctest::Approx(-0.5));

  auto m3 = TruthOracle::branching_means(0.9);
  REQUIRE(m3.size() == 4);
  CHECK(m3[0] == doctest::Approx(0.9));
  CHECK(m3[1] == doctest::Approx(4.0 / 3.0 - 0.9));
  CHECK(m3[2] == doctest::Approx(2.0 / 3.0 - 0.9));
  CHECK(m3[3] == doctest::Approx(-0.9));

  auto m0 = TruthOracle::branching_means(0.0);
  REQUIRE(m0.size() == 2);
  CHECK(m0[0] == 0.0);
  CHECK(m0[1] == 0.0);
}

TEST_CASE("branching dataset stays in plausible ranges") {
  auto [d, oracle] = gen_branching_mixture(2000, 11);
  CHECK(d.features.rows == 2000);
  CHECK(d.features.cols == 1);
  CHECK(d.responses.cols == 1);
  for (std::size_t i = 0; i < d.features.rows; ++i) {
    CHECK(d.features(i, 0) >= 0.0);
    CHECK(d.features(i, 0) < 1.0);
    // Means live in [-1, 4/3 - 2/3]; scale 0.05 keeps draws well inside +-1.5.
    CHECK(std::abs(d.responses(i, 0)) < 1.5);
  }
}

TEST_CASE("inflated gamma: point mass fraction, support, and tail mean") {
  const std::size_t n = 20000;
  auto [d, oracle] = gen_inflated_gamma(n, 13);
  std::size_t at_floor = 0;
  double tail_sum = 0.0;
  std::size_t tail_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = d.features(i, 0), y = d.responses(i, 0);
    CHECK(y >= x);
    if (y == x) {
      ++at_floor;
    } else {
      tail_sum += y - x;
      ++tail_n;
    }
  }
  // Binomial n=20000 p=0.15: sd of the fraction ~ 0.0025.
  double frac = double(at_floor) / double(n);
  CHECK(frac > 0.15 - 3 * 0.0025252);
  CHECK(frac < 0.15 + 3 * 0.0025252);
  // Gamma(shape 2, scale 1) has mean 2, sd sqrt(2).
  double tail_mean = tail_sum / double(tail_n);
  CHECK(tail_mean > 2.0 - 4 * std::sqrt(2.0 / double(tail_n)));
  CHECK(tail_mean < 2.0 + 4 * std::sqrt(2.0 / double(tail_n)));
}

TEST_CASE("arc geometry at the pinch point and endpoints") {
  double radius, t0, t1;
  TruthOracle::arc_params(0.5, radius, t0, t1);
  CHECK(radius == doctest::Approx(0.1));
  CHECK(t1 - t0 == doctest::Approx(1.0));
  TruthOracle::arc_params(0.17, radius, t0, t1);
  CHECK(radius == doctest::Approx(1.0));
  TruthOracle::arc_params(0.83, radius, t0, t1);
  CHECK(radius == doctest::Approx(1.0));
}

TEST_CASE("arc responses are two-dimensional and hug the arc radius") {
  auto [d, oracle] = gen_arc_multioutput(4000, 17);
  CHECK(d.responses.cols == 2);

  // Conditional check: distance from the origin concentrates near radius(x).
  double max_abs_err_mean = 0.0;
  for (double x : {0.2, 0.5, 0.8}) {
    double radius, t0, t1;
    TruthOracle::arc_params(x, radius, t0, t1);
    Rng rng(19);
    SampleSet s = truth_sample(oracle, std::span(&x, 1), 4000, rng);
    double mean_dist = 0.0;
    for (std::size_t i = 0; i < s.n_samples(); ++i)
      mean_dist += std::hypot(s.draws(i, 0), s.draws(i, 1));
    mean_dist /= double(s.n_samples());
    max_abs_err_mean = std::max(max_abs_err_mean,
                                std::abs(mean_dist - radius));
  }
  // Isotropic N(0, 0.05^2) noise inflates the mean distance by < 0.03.
  CHECK(max_abs_err_mean < 0.05);
}

TEST_CASE("linear gaussian: unit residual noise around 10 beta'x") {
  const std::size_t n = 20000;
  auto [d, oracle] = gen_linear_gaussian(n, 3, 23);
  REQUIRE(oracle.beta.size() == 3);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < 3; ++j) mu += oracle.beta[j] * d.features(i, j);
    double r = d.responses(i, 0) - 10.0 * mu;
    sum += r;
    sum2 += r * r;
  }
  double mean = sum / double(n);
  double var = sum2 / double(n) - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("linear gaussian: least squares recovers the scaled coefficient") {
  const std::size_t n = 50000;
  auto [d, oracle] = gen_linear_gaussian(n, 1, 29);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += d.features(i, 0) * d.responses(i, 0);
    sxx += d.features(i, 0) * d.features(i, 0);
  }
  CHECK(sxy / sxx == doctest::Approx(10.0 * oracle.beta[0]).epsilon(0.01));
}

TEST_CASE("linear gaussian truth at x = 0 is standard normal") {
  auto oracle = gen_linear_gaussian(10, 2, 31).second;
  double x[2] = {0.0, 0.0};
  Rng rng(37);
  SampleSet s = truth_sample(oracle, std::span(x, 2), 20000, rng);
  auto col = s.column(0);
  double sum = 0.0, sum2 = 0.0;
  for (double v : col) {
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / double(col.size());
  double var = sum2 / double(col.size()) - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("truth_sample returns the requested shape and echoes x") {
  auto oracle = gen_arc_multioutput(5, 41).second;
  double x = 0.3;
  Rng rng(43);
  SampleSet s = truth_sample(oracle, std::span(&x, 1), 7, rng);
  CHECK(s.n_samples() == 7);
  CHECK(s.d_y() == 2);
  REQUIRE(s.x_ref.size() == 1);
  CHECK(s.x_ref[0] == 0.3);
}

TEST_CASE("truth samplers reject covariates outside the unit interval") {
  auto oracle = gen_branching_mixture(5, 47).second;
  double bad = 1.5;
  Rng rng(53);
  CHECK_THROWS_AS(oracle.sample_one(std::span(&bad, 1), rng), ValidationError);

  auto lin = gen_linear_gaussian(5, 2, 47).second;
  double one = 0.5;
  CHECK_THROWS_AS(lin.sample_one(std::span(&one, 1), rng), ValidationError);
}

TEST_CASE("generation is bit-for-bit deterministic in the seed") {
  for (auto kind : {SynthKind::branching_mixture, SynthKind::inflated_gamma,
                    SynthKind::arc_multioutput, SynthKind::linear_gaussian}) {
    auto a = generate(kind, 200, 2, 59);
    auto b = generate(kind, 200, 2, 59);
    auto c = generate(kind, 200, 2, 60);
    CHECK(a.first.features.data == b.first.features.data);
    CHECK(a.first.responses.data == b.first.responses.data);
    CHECK(a.first.responses.data != c.first.responses.data);
    CHECK(a.second.beta == b.second.beta);
  }
}

TEST_CASE("generation with a prefix row count yields a prefix dataset") {
  auto big = generate(SynthKind::inflated_gamma, 100, 1, 61).first;
  auto small = generate(SynthKind::inflated_gamma, 40, 1, 61).first;
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(big.features(i, 0) == small.features(i, 0));
    CHECK(big.responses(i, 0) == small.responses(i, 0));
  }
}

TEST_CASE("generators validate their sizes") {
  CHECK_THROWS_AS(gen_branching_mixture(0, 1), ValidationError);
  CHECK_THROWS_AS(gen_linear_gaussian(10, 0, 1), ValidationError);
}
