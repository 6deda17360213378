#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treeffuse/common.hpp"

namespace treeffuse {

struct GbtParams {
  int n_estimators = 3000;
  double learning_rate = 0.1;
  int num_leaves = 31;
  int early_stopping_rounds = 50;
  int max_bins = 255;
  int min_samples_leaf = 20;
  std::uint64_t seed = 0;
};

void validate(const GbtParams& p);

// Per-feature histogram bins. For feature f, edges[f] holds ascending cut
// points; a finite value v falls in bin lower_bound(edges[f], v), i.e. bin b
// covers (edges[b-1], edges[b]]. Finite bin count is edges[f].size() + 1 and
// the missing bin index equals the finite bin count.
struct BinMap {
  std::vector<std::vector<double>> edges;

  std::size_t n_features() const { return edges.size(); }
  int n_finite_bins(std::size_t f) const {
    return static_cast<int>(edges[f].size()) + 1;
  }
  int missing_bin(std::size_t f) const { return n_finite_bins(f); }
  int bin_of(std::size_t f, double value) const;
};

BinMap build_bins(const Matrix& features, int max_bins);

// Column-major binned copy of a feature matrix.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint16_t> values;  // values[f * rows + i]
  std::vector<int> n_finite_bins;     // missing bin index per feature

  std::uint16_t at(std::size_t i, std::size_t f) const {
    return values[f * rows + i];
  }
};

BinnedMatrix bin_matrix(const BinMap& map, const Matrix& features);

// Flat binary tree. Node 0 is the root; leaves have feature == -1.
// An internal node sends a row left when bin(feature) <= threshold_bin;
// missing values follow missing_left.
struct TreeNode {
  int feature = -1;
  int threshold_bin = 0;
  bool missing_left = true;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  std::size_t n_leaves() const;
  double eval_binned(const BinnedMatrix& b, std::size_t row) const;
  double eval(const BinMap& map, std::span<const double> row) const;
};

// One round of leaf-wise growth on squared-loss residuals. Splits the leaf
// with the largest variance-reduction gain until num_leaves is reached or no
// candidate has positive gain. If leaf_of_row is non-null it receives, per
// training row, the leaf value assigned to that row.
Tree fit_tree(const BinnedMatrix& b, std::span<const double> residuals,
              const GbtParams& params, int n_threads = 1,
              std::vector<double>* leaf_of_row = nullptr);

struct GbtEnsemble {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  BinMap bin_map;
  double best_valid_loss = 0.0;  // reporting only, not serialized

  double predict(std::span<const double> row) const;
};

// Boosting with validation early stopping; returns the ensemble truncated
// at the best validation iteration.
GbtEnsemble fit_gbt(const Matrix& train_x, std::span<const double> train_y,
                    const Matrix& valid_x, std::span<const double> valid_y,
                    const GbtParams& params, int n_threads = 1);

inline double predict_gbt(const GbtEnsemble& e, std::span<const double> row) {
  return e.predict(row);
}

}  // namespace treeffuse
