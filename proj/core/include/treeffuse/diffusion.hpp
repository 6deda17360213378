#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "treeffuse/common.hpp"
#include "treeffuse/rng.hpp"

namespace treeffuse {

// Variance-exploding SDE: zero drift, geometric noise schedule
// sigma(t) = alpha_min * (alpha_max/alpha_min)^(t/T).
struct SdeConfig {
  double alpha_min = 0.01;
  double alpha_max = 20.0;
  double horizon = 1.0;  // T
};

inline double clamp_time(const SdeConfig& c, double t) {
  return std::clamp(t, 0.0, c.horizon);
}

inline double sigma(const SdeConfig& c, double t) {
  t = clamp_time(c, t);
  return c.alpha_min * std::pow(c.alpha_max / c.alpha_min, t / c.horizon);
}

// g(t) = sqrt(d[sigma(t)^2]/dt) = sigma(t) * sqrt(2 ln(alpha_max/alpha_min) / T).
inline double diffusion_coeff(const SdeConfig& c, double t) {
  return sigma(c, t) *
         std::sqrt(2.0 * std::log(c.alpha_max / c.alpha_min) / c.horizon);
}

inline std::vector<double> drift(const SdeConfig&, std::span<const double> y,
                                 double) {
  return std::vector<double>(y.size(), 0.0);
}

struct PerturbedPoint {
  std::vector<double> y_t;
  double t = 0.0;
  std::vector<double> noise;
};

// h(zeta, t, y) = y + sigma(t) * zeta (VESDE keeps the mean at y).
inline PerturbedPoint perturb(const SdeConfig& c, std::span<const double> y0,
                              double t, std::span<const double> zeta) {
  PerturbedPoint p;
  p.t = clamp_time(c, t);
  p.noise.assign(zeta.begin(), zeta.end());
  p.y_t.resize(y0.size());
  const double s = sigma(c, p.t);
  for (std::size_t k = 0; k < y0.size(); ++k) p.y_t[k] = y0[k] + s * zeta[k];
  return p;
}

// Score of the perturbation kernel N(y0, sigma(t)^2 I) at y_t.
inline std::vector<double> conditional_score(const SdeConfig& c,
                                             std::span<const double> y0,
                                             std::span<const double> y_t,
                                             double t) {
  const double s2 = sigma(c, t) * sigma(c, t);
  std::vector<double> out(y0.size());
  for (std::size_t k = 0; k < y0.size(); ++k) out[k] = (y0[k] - y_t[k]) / s2;
  return out;
}

// Terminal distribution p_simple = N(0, sigma(T)^2 I).
inline std::vector<double> sample_p_simple(const SdeConfig& c, std::size_t d_y,
                                           Rng& rng) {
  const double s = sigma(c, c.horizon);
  std::vector<double> y(d_y);
  for (auto& v : y) v = s * rng.normal();
  return y;
}

// Score of the convolved density when the target is N(mu, s2 I):
// p_t = N(mu, (s2 + sigma(t)^2) I). Analytic oracle for sampler tests.
inline std::vector<double> gaussian_target_score(std::span<const double> mu,
                                                 double s2, const SdeConfig& c,
                                                 std::span<const double> y,
                                                 double t) {
  const double var = s2 + sigma(c, t) * sigma(c, t);
  std::vector<double> out(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) out[k] = (mu[k] - y[k]) / var;
  return out;
}

}  // namespace treeffuse
