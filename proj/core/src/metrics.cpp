#include "treeffuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace treeffuse {

std::vector<double> SampleSet::column(std::size_t k) const {
  std::vector<double> out(draws.rows);
  for (std::size_t i = 0; i < draws.rows; ++i) out[i] = draws(i, k);
  return out;
}

std::string EvalReport::to_key_value() const {
  char buf[64];
  std::ostringstream os;
  std::snprintf(buf, sizeof(buf), "%.17g", crps);
  os << "crps=" << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", rmse);
  os << "rmse=" << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", mae);
  os << "mae=" << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", mace);
  os << "mace=" << buf << '\n';
  os << "n_test=" << n_test << '\n';
  return os.str();
}

double crps_empirical(std::span<const double> samples, double y) {
  const std::size_t m = samples.size();
  if (m == 0) throw ValidationError("crps_empirical: empty sample set");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());

  double abs_err = 0.0;
  for (double v : s) abs_err += std::fabs(v - y);

  // sum_{i<j} (s_j - s_i) = sum_k s_k * (2k - m + 1) for sorted s.
  double pair_sum = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    pair_sum += s[k] * (2.0 * static_cast<double>(k) -
                        static_cast<double>(m) + 1.0);

  const double md = static_cast<double>(m);
  return abs_err / md - pair_sum / (md * md);
}

double crps_multivariate(const SampleSet& s, std::span<const double> y) {
  if (y.size() != s.d_y())
    throw ValidationError("crps_multivariate: dimension mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < s.d_y(); ++k)
    total += crps_empirical(s.column(k), y[k]);
  return total / static_cast<double>(s.d_y());
}

double empirical_quantile(std::span<const double> samples, double q) {
  const std::size_t m = samples.size();
  if (m == 0) throw ValidationError("empirical_quantile: empty sample set");
  if (!(q > 0.0 && q < 1.0))
    throw ValidationError("empirical_quantile: q must be in (0,1)");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  auto idx = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(m)) - 1.0);
  if (idx >= m) idx = m - 1;
  return s[idx];
}

std::vector<double> default_mace_levels() {
  std::vector<double> levels;
  for (int i = 1; i <= 19; ++i) levels.push_back(0.05 * i);
  return levels;
}

double mace(const std::vector<SampleSet>& sample_sets,
            const std::vector<std::vector<double>>& y_true,
            std::span<const double> levels) {
  if (sample_sets.size() != y_true.size() || sample_sets.empty())
    throw ValidationError("mace: misaligned or empty inputs");
  if (levels.empty()) throw ValidationError("mace: no levels");

  double total = 0.0;
  for (double q : levels) {
    if (!(q > 0.0 && q < 1.0))
      throw ValidationError("mace: level outside (0,1)");
    std::size_t covered = 0, cells = 0;
    for (std::size_t i = 0; i < sample_sets.size(); ++i) {
      const SampleSet& s = sample_sets[i];
      if (y_true[i].size() != s.d_y())
        throw ValidationError("mace: dimension mismatch");
      for (std::size_t k = 0; k < s.d_y(); ++k) {
        if (y_true[i][k] <= empirical_quantile(s.column(k), q)) ++covered;
        ++cells;
      }
    }
    double coverage = static_cast<double>(covered) / static_cast<double>(cells);
    total += std::fabs(coverage - q);
  }
  return total / static_cast<double>(levels.size());
}

namespace {

void check_aligned(const Matrix& preds, const Matrix& y_true) {
  if (preds.rows != y_true.rows || preds.cols != y_true.cols ||
      preds.rows == 0)
    throw ValidationError("rmse/mae: misaligned or empty inputs");
}

}  // namespace

double rmse(const Matrix& preds, const Matrix& y_true) {
  check_aligned(preds, y_true);
  double s = 0.0;
  for (std::size_t k = 0; k < preds.data.size(); ++k) {
    double r = preds.data[k] - y_true.data[k];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(preds.data.size()));
}

double mae(const Matrix& preds, const Matrix& y_true) {
  check_aligned(preds, y_true);
  double s = 0.0;
  for (std::size_t k = 0; k < preds.data.size(); ++k)
    s += std::fabs(preds.data[k] - y_true.data[k]);
  return s / static_cast<double>(preds.data.size());
}

double newsvendor_order(std::span<const double> samples, double price,
                        double cost) {
  if (!(cost > 0.0)) throw ValidationError("newsvendor: cost must be > 0");
  if (!(cost < price)) throw ValidationError("newsvendor: cost must be < price");
  return empirical_quantile(samples, (price - cost) / price);
}

double newsvendor_profit(double order, double demand, double price,
                         double cost) {
  return price * std::min(order, demand) - cost * order;
}

}  // namespace treeffuse
