#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "treeffuse/common.hpp"

namespace treeffuse {

// Row-major table of features (missing entries allowed, marked NaN) and
// responses (always complete).
struct Dataset {
  Matrix features;
  Matrix responses;
  std::vector<std::string> feature_names;
  std::vector<std::string> response_names;

  std::size_t n() const { return features.rows; }
  std::size_t d_x() const { return features.cols; }
  std::size_t d_y() const { return responses.cols; }
};

// Per-dimension standardization of the responses: z = (y - mean) / scale.
struct ResponseScaler {
  std::vector<double> means;
  std::vector<double> scales;
};

struct SplitSpec {
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
};

// CSV: UTF-8, comma separated, header row, '.' decimal separator.
// Empty cells and the literal "NaN" are missing (feature columns only).
Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& response_columns);
void save_csv(const Dataset& d, const std::string& path);

ResponseScaler fit_scaler(const Dataset& d);
std::vector<double> apply_scaler(const ResponseScaler& s,
                                 std::span<const double> y);
std::vector<double> invert_scaler(const ResponseScaler& s,
                                  std::span<const double> z);

// Seeded shuffle partition into (train, valid).
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

}  // namespace treeffuse
