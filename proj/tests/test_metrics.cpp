#include <doctest.h>

#include <cmath>
#include <vector>

#include "treeffuse/metrics.hpp"
#include "treeffuse/rng.hpp"

using namespace treeffuse;

namespace {

// O(m^2) double-sum reference with the same 1/(2m^2) normalization.
double crps_oracle(const std::vector<double>& s, double y) {
  const double m = double(s.size());
  double t1 = 0, t2 = 0;
  for (double a : s) t1 += std::abs(a - y);
  for (double a : s)
    for (double b : s) t2 += std::abs(a - b);
  return t1 / m - t2 / (2 * m * m);
}

}  // namespace

TEST_CASE("crps_empirical hand examples") {
  CHECK(crps_empirical(std::vector<double>{3.0, 3.0, 3.0}, 3.0) == 0.0);
  CHECK(crps_empirical(std::vector<double>{0.0, 1.0}, 0.0) ==
        doctest::Approx(0.25));
  CHECK(crps_empirical(std::vector<double>{0.0, 1.0}, 0.5) ==
        doctest::Approx(0.25));
}

TEST_CASE("crps_empirical with one sample is the absolute error") {
  CHECK(crps_empirical(std::vector<double>{2.0}, 5.0) == doctest::Approx(3.0));
}

TEST_CASE("crps_empirical rejects empty input") {
  CHECK_THROWS_AS(crps_empirical(std::vector<double>{}, 0.0), ValidationError);
}

TEST_CASE("sorted CRPS equals the quadratic oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t m = 1 + rng.next_u64() % 500;
    std::vector<double> s(m);
    for (auto& v : s) v = rng.normal() * rng.uniform(0.1, 10.0);
    double y = rng.normal() * 3;
    CHECK(std::abs(crps_empirical(s, y) - crps_oracle(s, y)) < 1e-10);
  }
}

TEST_CASE("crps is non-negative, zero only for a perfect point mass") {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(10);
    for (auto& v : s) v = rng.normal();
    CHECK(crps_empirical(s, rng.normal()) >= 0.0);
  }
}

TEST_CASE("crps translation and scale equivariance") {
  Rng rng(37);
  std::vector<double> s(40);
  for (auto& v : s) v = rng.normal();
  double y = 0.3;
  double base = crps_empirical(s, y);
  double a = 17.5, k = 4.0;
  std::vector<double> shifted = s, scaled = s;
  for (auto& v : shifted) v += a;
  for (auto& v : scaled) v *= k;
  CHECK(crps_empirical(shifted, y + a) == doctest::Approx(base).epsilon(1e-12));
  CHECK(crps_empirical(scaled, k * y) ==
        doctest::Approx(k * base).epsilon(1e-12));
}

TEST_CASE("crps_multivariate reductions") {
  SampleSet s;
  s.draws = Matrix(2, 1);
  s.draws(0, 0) = 0.0;
  s.draws(1, 0) = 1.0;
  CHECK(crps_multivariate(s, std::vector<double>{0.0}) ==
        doctest::Approx(crps_empirical(std::vector<double>{0.0, 1.0}, 0.0)));

  SampleSet twin;
  twin.draws = Matrix(2, 2);
  twin.draws(0, 0) = twin.draws(0, 1) = 0.0;
  twin.draws(1, 0) = twin.draws(1, 1) = 1.0;
  CHECK(crps_multivariate(twin, std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(0.25));
}

TEST_CASE("crps_multivariate averages per-dimension values") {
  // column 0: {0,1} with y=0 -> 0.25; column 1: {0,3} with y=0 -> 0.75
  SampleSet s;
  s.draws = Matrix(2, 2);
  s.draws(0, 0) = 0.0;
  s.draws(1, 0) = 1.0;
  s.draws(0, 1) = 0.0;
  s.draws(1, 1) = 3.0;
  CHECK(crps_multivariate(s, std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(0.5));
}

TEST_CASE("crps_multivariate rejects dimension mismatch") {
  SampleSet s;
  s.draws = Matrix(2, 2);
  CHECK_THROWS_AS(crps_multivariate(s, std::vector<double>{0.0}),
                  ValidationError);
}

TEST_CASE("empirical_quantile hand examples") {
  std::vector<double> s(100);
  for (int i = 0; i < 100; ++i) s[i] = double(i + 1);
  CHECK(empirical_quantile(s, 0.5) == 50.0);
  CHECK(empirical_quantile(s, 0.99) == 99.0);
  CHECK(empirical_quantile(std::vector<double>{7.0}, 0.123) == 7.0);
}

TEST_CASE("empirical_quantile is monotone and bounded") {
  Rng rng(41);
  std::vector<double> s(57);
  for (auto& v : s) v = rng.normal();
  double lo = *std::min_element(s.begin(), s.end());
  double hi = *std::max_element(s.begin(), s.end());
  double prev = lo;
  for (double q = 0.01; q < 1.0; q += 0.01) {
    double v = empirical_quantile(s, q);
    CHECK(v >= prev);
    CHECK(v >= lo);
    CHECK(v <= hi);
    prev = v;
  }
}

TEST_CASE("empirical_quantile validates its input") {
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5),
                  ValidationError);
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{1.0}, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{1.0}, 1.0),
                  ValidationError);
}

TEST_CASE("default_mace_levels is the 19-level grid") {
  auto levels = default_mace_levels();
  REQUIRE(levels.size() == 19);
  CHECK(levels.front() == doctest::Approx(0.05));
  CHECK(levels.back() == doctest::Approx(0.95));
  CHECK(levels[9] == doctest::Approx(0.5));
}

TEST_CASE("mace of an always-over forecaster is mean |1 - q|") {
  std::vector<SampleSet> sets(50);
  std::vector<std::vector<double>> truth(50);
  for (int i = 0; i < 50; ++i) {
    sets[i].draws = Matrix(20, 1);
    for (int k = 0; k < 20; ++k) sets[i].draws(k, 0) = 1000.0 + k;
    truth[i] = {0.0};
  }
  auto levels = default_mace_levels();
  double expect = 0;
  for (double q : levels) expect += std::abs(1.0 - q);
  expect /= levels.size();
  CHECK(mace(sets, truth, levels) == doctest::Approx(expect));
}

TEST_CASE("mace vanishes for exact half coverage at the median level") {
  std::vector<SampleSet> sets(2);
  std::vector<std::vector<double>> truth(2);
  for (int i = 0; i < 2; ++i) {
    sets[i].draws = Matrix(2, 1);
    sets[i].draws(0, 0) = 0.0;
    sets[i].draws(1, 0) = 1.0;
  }
  truth[0] = {-1.0};  // below the median quantile
  truth[1] = {0.5};   // above it (lower quantile at q=0.5 is 0)
  std::vector<double> levels = {0.5};
  CHECK(mace(sets, truth, levels) == doctest::Approx(0.0));
}

TEST_CASE("mace of a well-calibrated oracle forecaster is small") {
  Rng rng(47);
  const int n = 1000, m = 200;
  std::vector<SampleSet> sets(n);
  std::vector<std::vector<double>> truth(n);
  for (int i = 0; i < n; ++i) {
    double mu = rng.uniform(-2, 2);
    sets[i].draws = Matrix(m, 1);
    for (int k = 0; k < m; ++k) sets[i].draws(k, 0) = mu + rng.normal();
    truth[i] = {mu + rng.normal()};
  }
  CHECK(mace(sets, truth, default_mace_levels()) < 0.05);
}

TEST_CASE("mace rejects misaligned lists") {
  std::vector<SampleSet> sets(2);
  std::vector<std::vector<double>> truth(1);
  CHECK_THROWS_AS(mace(sets, truth, default_mace_levels()), ValidationError);
}

TEST_CASE("rmse and mae hand examples") {
  Matrix p(2, 1), t(2, 1);
  p(0, 0) = 1.0;
  p(1, 0) = -1.0;
  t(0, 0) = 0.0;
  t(1, 0) = 0.0;
  CHECK(rmse(p, t) == doctest::Approx(1.0));
  CHECK(mae(p, t) == doctest::Approx(1.0));

  p(0, 0) = 0.0;
  p(1, 0) = 2.0;
  CHECK(mae(p, t) == doctest::Approx(1.0));
  CHECK(rmse(p, t) == doctest::Approx(std::sqrt(2.0)));

  CHECK(rmse(t, t) == 0.0);
  CHECK(mae(t, t) == 0.0);
}

TEST_CASE("rmse rejects shape mismatch") {
  Matrix a(2, 1), b(3, 1);
  CHECK_THROWS_AS(rmse(a, b), ValidationError);
  CHECK_THROWS_AS(mae(a, b), ValidationError);
}

TEST_CASE("newsvendor_order picks the critical-ratio quantile") {
  std::vector<double> s(100);
  for (int i = 0; i < 100; ++i) s[i] = double(i + 1);
  CHECK(newsvendor_order(s, 2.0, 1.0) == 50.0);   // ratio 0.5 -> median
  CHECK(newsvendor_order(s, 10.0, 1.0) == 90.0);  // ratio 0.9
}

TEST_CASE("newsvendor_order rejects bad prices") {
  std::vector<double> s = {1.0, 2.0};
  CHECK_THROWS_AS(newsvendor_order(s, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(newsvendor_order(s, 1.0, 2.0), ValidationError);
  CHECK_THROWS_AS(newsvendor_order(s, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(newsvendor_order(s, 1.0, -1.0), ValidationError);
}

TEST_CASE("newsvendor_profit arithmetic and bound") {
  CHECK(newsvendor_profit(5.0, 3.0, 2.0, 1.0) == doctest::Approx(1.0));
  CHECK(newsvendor_profit(4.0, 4.0, 2.0, 1.0) == doctest::Approx(4.0));
  CHECK(newsvendor_profit(0.0, 10.0, 2.0, 1.0) == 0.0);

  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    double demand = rng.uniform(0, 10);
    double q = rng.uniform(0, 10);
    double p = rng.uniform(1.1, 5.0);
    double c = rng.uniform(0.1, p - 0.1);
    double profit = newsvendor_profit(q, demand, p, c);
    CHECK(profit <= (p - c) * demand + 1e-12);
  }
  // equality exactly at q = demand
  CHECK(newsvendor_profit(3.0, 3.0, 5.0, 2.0) == doctest::Approx(9.0));
}

TEST_CASE("report serializes as key=value lines") {
  EvalReport r;
  r.crps = 0.25;
  r.rmse = 1.5;
  r.mae = 1.0;
  r.mace = 0.03;
  r.n_test = 7;
  std::string text = r.to_key_value();
  CHECK(text.find("crps=") != std::string::npos);
  CHECK(text.find("rmse=") != std::string::npos);
  CHECK(text.find("mae=") != std::string::npos);
  CHECK(text.find("mace=") != std::string::npos);
  CHECK(text.find("n_test=7") != std::string::npos);
}
