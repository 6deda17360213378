#pragma once

#include <span>
#include <string>
#include <vector>

#include "treeffuse/common.hpp"

namespace treeffuse {

// Draws from one predictive distribution, in original response units.
struct SampleSet {
  Matrix draws;                // n_samples x d_y
  std::vector<double> x_ref;   // conditioning input, optional

  std::size_t n_samples() const { return draws.rows; }
  std::size_t d_y() const { return draws.cols; }
  std::vector<double> column(std::size_t k) const;
};

struct EvalReport {
  double crps = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double mace = 0.0;
  std::size_t n_test = 0;

  std::string to_key_value() const;
};

// Energy form (1/m) sum |x_i - y| - 1/(2 m^2) sum_ij |x_i - x_j|,
// evaluated in O(m log m) via sorting.
double crps_empirical(std::span<const double> samples, double y);

// Mean of the marginal CRPS over response dimensions.
double crps_multivariate(const SampleSet& s, std::span<const double> y);

// Lower empirical quantile: sorted sample at index ceil(q*m) - 1.
double empirical_quantile(std::span<const double> samples, double q);

// Mean over levels of |coverage(q) - q| with coverage(q) the fraction of
// test rows whose truth is <= the per-row empirical q-quantile.
double mace(const std::vector<SampleSet>& sample_sets,
            const std::vector<std::vector<double>>& y_true,
            std::span<const double> levels);

// 19 levels 0.05, 0.10, ..., 0.95.
std::vector<double> default_mace_levels();

double rmse(const Matrix& preds, const Matrix& y_true);
double mae(const Matrix& preds, const Matrix& y_true);

// Optimal order is the (p - c)/p quantile of the demand samples.
double newsvendor_order(std::span<const double> samples, double price,
                        double cost);

// Realized profit p * min(q, demand) - c * q.
double newsvendor_profit(double order, double demand, double price,
                         double cost);

}  // namespace treeffuse
