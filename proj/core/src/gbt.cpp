#include "treeffuse/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

namespace treeffuse {

void validate(const GbtParams& p) {
  if (p.n_estimators < 1) throw ValidationError("n_estimators must be >= 1");
  if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0))
    throw ValidationError("learning_rate must be in (0,1]");
  if (p.num_leaves < 2) throw ValidationError("num_leaves must be >= 2");
  if (p.early_stopping_rounds < 1)
    throw ValidationError("early_stopping_rounds must be >= 1");
  if (p.max_bins < 2) throw ValidationError("max_bins must be >= 2");
  if (p.max_bins > 65535)
    throw ValidationError("max_bins must fit in 16 bits");
  if (p.min_samples_leaf < 1)
    throw ValidationError("min_samples_leaf must be >= 1");
}

int BinMap::bin_of(std::size_t f, double value) const {
  if (std::isnan(value)) return missing_bin(f);
  const auto& e = edges[f];
  return static_cast<int>(std::lower_bound(e.begin(), e.end(), value) -
                          e.begin());
}

BinMap build_bins(const Matrix& features, int max_bins) {
  BinMap map;
  map.edges.resize(features.cols);
  for (std::size_t f = 0; f < features.cols; ++f) {
    std::vector<double> vals;
    vals.reserve(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
      double v = features(i, f);
      if (!std::isnan(v)) vals.push_back(v);
    }
    if (vals.empty()) continue;  // all-missing: no edges, single missing bin
    std::sort(vals.begin(), vals.end());

    std::vector<double> distinct;
    for (double v : vals)
      if (distinct.empty() || v != distinct.back()) distinct.push_back(v);

    auto& edges = map.edges[f];
    if (static_cast<int>(distinct.size()) <= max_bins) {
      // One bin per distinct value, cut at midpoints.
      for (std::size_t k = 0; k + 1 < distinct.size(); ++k)
        edges.push_back(0.5 * (distinct[k] + distinct[k + 1]));
    } else {
      // Quantile cuts over runs of duplicates: snap each quantile position to
      // the end of the run containing it, so heavily repeated values (e.g. a
      // feature tiled across augmented rows) still yield full bin resolution.
      std::vector<std::size_t> run_end(distinct.size());  // exclusive end
      {
        std::size_t pos = 0;
        for (std::size_t k = 0; k < distinct.size(); ++k) {
          while (pos < vals.size() && vals[pos] == distinct[k]) ++pos;
          run_end[k] = pos;
        }
      }
      const std::size_t n = vals.size();
      for (int b = 1; b < max_bins; ++b) {
        std::size_t idx = (static_cast<std::size_t>(b) * n) / max_bins;
        if (idx == 0 || idx >= n) continue;
        std::size_t r = static_cast<std::size_t>(
            std::upper_bound(run_end.begin(), run_end.end(), idx) -
            run_end.begin());
        if (r + 1 >= distinct.size()) continue;
        double cut = 0.5 * (distinct[r] + distinct[r + 1]);
        if (edges.empty() || cut > edges.back()) edges.push_back(cut);
      }
    }
  }
  return map;
}

BinnedMatrix bin_matrix(const BinMap& map, const Matrix& features) {
  if (map.n_features() != features.cols)
    throw ValidationError("bin_matrix: feature count mismatch");
  BinnedMatrix b;
  b.rows = features.rows;
  b.cols = features.cols;
  b.values.resize(b.rows * b.cols);
  b.n_finite_bins.resize(b.cols);
  for (std::size_t f = 0; f < b.cols; ++f) {
    b.n_finite_bins[f] = map.n_finite_bins(f);
    for (std::size_t i = 0; i < b.rows; ++i)
      b.values[f * b.rows + i] =
          static_cast<std::uint16_t>(map.bin_of(f, features(i, f)));
  }
  return b;
}

std::size_t Tree::n_leaves() const {
  std::size_t c = 0;
  for (const auto& n : nodes)
    if (n.feature < 0) ++c;
  return c;
}

double Tree::eval_binned(const BinnedMatrix& b, std::size_t row) const {
  int k = 0;
  while (nodes[k].feature >= 0) {
    const TreeNode& n = nodes[k];
    int bin = b.at(row, static_cast<std::size_t>(n.feature));
    bool left;
    if (bin == b.n_finite_bins[static_cast<std::size_t>(n.feature)])
      left = n.missing_left;
    else
      left = bin <= n.threshold_bin;
    k = left ? n.left : n.right;
  }
  return nodes[k].value;
}

double Tree::eval(const BinMap& map, std::span<const double> row) const {
  int k = 0;
  while (nodes[k].feature >= 0) {
    const TreeNode& n = nodes[k];
    auto f = static_cast<std::size_t>(n.feature);
    double v = row[f];
    bool left;
    if (std::isnan(v))
      left = n.missing_left;
    else
      left = map.bin_of(f, v) <= n.threshold_bin;
    k = left ? n.left : n.right;
  }
  return nodes[k].value;
}

namespace {

// Per-leaf histograms: counts and residual sums over all features' bins,
// laid out contiguously with per-feature offsets.
struct Histogram {
  std::vector<double> sum;
  std::vector<std::uint32_t> count;
};

struct SplitCandidate {
  double gain = -1.0;
  int feature = -1;
  int bin = 0;
  bool missing_left = true;
  // Row counts/sums of the left child, for histogram subtraction bookkeeping.
  std::uint32_t left_count = 0;
  double left_sum = 0.0;
};

struct LeafState {
  int node = 0;
  std::size_t begin = 0, end = 0;  // range in the row-index array
  std::uint32_t count = 0;
  double sum = 0.0;
  Histogram hist;
  SplitCandidate best;
};

void build_histogram(const BinnedMatrix& b, std::span<const double> residuals,
                     const std::vector<std::uint32_t>& indices,
                     std::size_t begin, std::size_t end,
                     const std::vector<std::size_t>& offsets, Histogram& h,
                     int n_threads) {
  h.sum.assign(offsets.back(), 0.0);
  h.count.assign(offsets.back(), 0);
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (std::int64_t f = 0; f < static_cast<std::int64_t>(b.cols); ++f) {
    const std::uint16_t* col = b.values.data() + f * b.rows;
    double* sums = h.sum.data() + offsets[static_cast<std::size_t>(f)];
    std::uint32_t* counts = h.count.data() + offsets[static_cast<std::size_t>(f)];
    for (std::size_t p = begin; p < end; ++p) {
      std::uint32_t i = indices[p];
      std::uint16_t bin = col[i];
      sums[bin] += residuals[i];
      counts[bin] += 1;
    }
  }
}

void subtract_histogram(Histogram& parent, const Histogram& child) {
  for (std::size_t k = 0; k < parent.sum.size(); ++k) {
    parent.sum[k] -= child.sum[k];
    parent.count[k] -= child.count[k];
  }
}

// Best (feature, bin, missing-direction) split of a leaf by variance
// reduction; ties broken by lowest feature, then lowest bin, then missing
// left. Gains equal up to accumulation noise are treated as zero.
SplitCandidate find_best_split(const LeafState& leaf, const BinnedMatrix& b,
                               const std::vector<std::size_t>& offsets,
                               const GbtParams& params, int n_threads) {
  const auto min_leaf = static_cast<std::uint32_t>(params.min_samples_leaf);
  const double parent_score =
      leaf.sum * leaf.sum / static_cast<double>(leaf.count);
  const double min_gain = 1e-9 * (parent_score + 1e-12);

  std::vector<SplitCandidate> per_feature(b.cols);
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (std::int64_t f = 0; f < static_cast<std::int64_t>(b.cols); ++f) {
    const auto fu = static_cast<std::size_t>(f);
    const int nf = b.n_finite_bins[fu];
    const double* sums = leaf.hist.sum.data() + offsets[fu];
    const std::uint32_t* counts = leaf.hist.count.data() + offsets[fu];
    const double miss_sum = sums[nf];
    const std::uint32_t miss_count = counts[nf];

    SplitCandidate best;
    std::uint32_t cum_count = 0;
    double cum_sum = 0.0;
    for (int t = 0; t + 1 < nf; ++t) {
      cum_count += counts[t];
      cum_sum += sums[t];
      for (int miss_left = 1; miss_left >= 0; --miss_left) {
        std::uint32_t nl = cum_count + (miss_left ? miss_count : 0);
        double sl = cum_sum + (miss_left ? miss_sum : 0.0);
        std::uint32_t nr = leaf.count - nl;
        double sr = leaf.sum - sl;
        if (nl < min_leaf || nr < min_leaf) continue;
        double gain = sl * sl / nl + sr * sr / nr - parent_score;
        if (gain > best.gain) {
          best = {gain, static_cast<int>(f), t, miss_left != 0, nl, sl};
        }
      }
    }
    per_feature[fu] = best;
  }

  SplitCandidate best;
  for (const auto& c : per_feature) {
    if (c.feature >= 0 && c.gain > min_gain && c.gain > best.gain) best = c;
  }
  return best;
}

}  // namespace

Tree fit_tree(const BinnedMatrix& b, std::span<const double> residuals,
              const GbtParams& params, int n_threads,
              std::vector<double>* leaf_of_row) {
  const std::size_t n = b.rows;
  if (residuals.size() != n)
    throw ValidationError("fit_tree: residual length mismatch");
  if (n_threads < 1) n_threads = 1;

  std::vector<std::size_t> offsets(b.cols + 1, 0);
  for (std::size_t f = 0; f < b.cols; ++f)
    offsets[f + 1] = offsets[f] + static_cast<std::size_t>(b.n_finite_bins[f]) + 1;

  std::vector<std::uint32_t> indices(n);
  std::iota(indices.begin(), indices.end(), 0u);

  Tree tree;
  tree.nodes.emplace_back();

  std::vector<LeafState> leaves;
  {
    LeafState root;
    root.node = 0;
    root.begin = 0;
    root.end = n;
    root.count = static_cast<std::uint32_t>(n);
    root.sum = std::accumulate(residuals.begin(), residuals.end(), 0.0);
    build_histogram(b, residuals, indices, 0, n, offsets, root.hist, n_threads);
    root.best = find_best_split(root, b, offsets, params, n_threads);
    leaves.push_back(std::move(root));
  }

  while (static_cast<int>(leaves.size()) < params.num_leaves) {
    // Split the pending leaf with the largest gain.
    int pick = -1;
    double best_gain = 0.0;
    for (std::size_t j = 0; j < leaves.size(); ++j) {
      if (leaves[j].best.feature >= 0 && leaves[j].best.gain > best_gain) {
        best_gain = leaves[j].best.gain;
        pick = static_cast<int>(j);
      }
    }
    if (pick < 0) break;

    LeafState leaf = std::move(leaves[static_cast<std::size_t>(pick)]);
    leaves.erase(leaves.begin() + pick);
    const SplitCandidate& sp = leaf.best;
    const auto f = static_cast<std::size_t>(sp.feature);
    const int missing_bin = b.n_finite_bins[f];

    auto goes_left = [&](std::uint32_t i) {
      int bin = b.at(i, f);
      if (bin == missing_bin) return sp.missing_left;
      return bin <= sp.bin;
    };
    auto mid_it = std::stable_partition(indices.begin() + leaf.begin,
                                        indices.begin() + leaf.end, goes_left);
    const auto mid = static_cast<std::size_t>(mid_it - indices.begin());

    LeafState lhs, rhs;
    lhs.begin = leaf.begin;
    lhs.end = mid;
    lhs.count = sp.left_count;
    lhs.sum = sp.left_sum;
    rhs.begin = mid;
    rhs.end = leaf.end;
    rhs.count = leaf.count - sp.left_count;
    rhs.sum = leaf.sum - sp.left_sum;

    // Scan the smaller child; derive the sibling by subtraction.
    if (lhs.count <= rhs.count) {
      build_histogram(b, residuals, indices, lhs.begin, lhs.end, offsets,
                      lhs.hist, n_threads);
      rhs.hist = std::move(leaf.hist);
      subtract_histogram(rhs.hist, lhs.hist);
    } else {
      build_histogram(b, residuals, indices, rhs.begin, rhs.end, offsets,
                      rhs.hist, n_threads);
      lhs.hist = std::move(leaf.hist);
      subtract_histogram(lhs.hist, rhs.hist);
    }

    TreeNode& node = tree.nodes[static_cast<std::size_t>(leaf.node)];
    node.feature = sp.feature;
    node.threshold_bin = sp.bin;
    node.missing_left = sp.missing_left;
    node.left = static_cast<int>(tree.nodes.size());
    node.right = node.left + 1;
    lhs.node = node.left;
    rhs.node = node.right;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();

    lhs.best = find_best_split(lhs, b, offsets, params, n_threads);
    rhs.best = find_best_split(rhs, b, offsets, params, n_threads);
    leaves.push_back(std::move(lhs));
    leaves.push_back(std::move(rhs));
  }

  if (leaf_of_row) leaf_of_row->assign(n, 0.0);
  for (const auto& leaf : leaves) {
    double value = leaf.sum / static_cast<double>(leaf.count);
    tree.nodes[static_cast<std::size_t>(leaf.node)].value = value;
    if (leaf_of_row) {
      for (std::size_t p = leaf.begin; p < leaf.end; ++p)
        (*leaf_of_row)[indices[p]] = value;
    }
  }
  return tree;
}

double GbtEnsemble::predict(std::span<const double> row) const {
  if (row.size() != bin_map.n_features())
    throw ValidationError("predict: row width mismatch");
  double out = base_score;
  for (const auto& t : trees) out += learning_rate * t.eval(bin_map, row);
  return out;
}

GbtEnsemble fit_gbt(const Matrix& train_x, std::span<const double> train_y,
                    const Matrix& valid_x, std::span<const double> valid_y,
                    const GbtParams& params, int n_threads) {
  validate(params);
  if (train_x.rows == 0 || valid_x.rows == 0)
    throw ValidationError("fit_gbt: empty train or valid set");
  if (train_x.cols != valid_x.cols)
    throw ValidationError("fit_gbt: train/valid feature width mismatch");
  if (train_y.size() != train_x.rows || valid_y.size() != valid_x.rows)
    throw ValidationError("fit_gbt: target length mismatch");
  if (n_threads < 1) n_threads = 1;

  GbtEnsemble ens;
  ens.learning_rate = params.learning_rate;
  ens.bin_map = build_bins(train_x, params.max_bins);
  ens.base_score =
      std::accumulate(train_y.begin(), train_y.end(), 0.0) /
      static_cast<double>(train_y.size());

  const BinnedMatrix train_b = bin_matrix(ens.bin_map, train_x);
  const BinnedMatrix valid_b = bin_matrix(ens.bin_map, valid_x);

  std::vector<double> residuals(train_y.size());
  for (std::size_t i = 0; i < residuals.size(); ++i)
    residuals[i] = train_y[i] - ens.base_score;

  std::vector<double> valid_pred(valid_y.size(), ens.base_score);
  auto valid_loss = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < valid_y.size(); ++i) {
      double r = valid_y[i] - valid_pred[i];
      s += r * r;
    }
    return s / static_cast<double>(valid_y.size());
  };

  double best_loss = valid_loss();
  std::size_t best_iter = 0;
  std::vector<double> row_values;
  for (int m = 0; m < params.n_estimators; ++m) {
    Tree tree = fit_tree(train_b, residuals, params, n_threads, &row_values);
    for (std::size_t i = 0; i < residuals.size(); ++i)
      residuals[i] -= params.learning_rate * row_values[i];

#pragma omp parallel for schedule(static) num_threads(n_threads)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(valid_pred.size());
         ++i) {
      valid_pred[static_cast<std::size_t>(i)] +=
          params.learning_rate *
          tree.eval_binned(valid_b, static_cast<std::size_t>(i));
    }
    ens.trees.push_back(std::move(tree));

    double loss = valid_loss();
    if (loss < best_loss) {
      best_loss = loss;
      best_iter = ens.trees.size();
    } else if (ens.trees.size() - best_iter >=
               static_cast<std::size_t>(params.early_stopping_rounds)) {
      break;
    }
  }
  ens.trees.resize(best_iter);
  ens.best_valid_loss = best_loss;
  return ens;
}

}  // namespace treeffuse
