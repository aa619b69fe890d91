/*
 * Copyright 2026 The wcprank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcprank/parallel.h"
#include "wcprank/ranker.h"

namespace wcprank::ranker {
namespace {

using Entry = ColumnIndex::Entry;

struct Split {
  bool valid = false;
  double gain = 0.0;
  std::size_t feature = 0;  // position in the sampled feature list
  double threshold = 0.0;
};

struct OpenLeaf {
  int node = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  int depth = 0;
  double g = 0.0;
  double h = 0.0;
  Split best;
};

double Score(double g, double h, double l2) { return g * g / (h + l2); }

// Midpoint between consecutive distinct values; falls back to the lower
// value when the midpoint rounds up to the upper one.
double Midpoint(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

class TreeBuilder {
 public:
  TreeBuilder(const features::FeatureMatrix& x, std::span<const double> g,
              std::span<const double> h, const TrainConfig& config)
      : x_(x), g_(g), h_(h), config_(config) {}

  RegressionTree Build(const ColumnIndex& index, Rng& rng) {
    const std::size_t n = x_.num_rows;
    const std::size_t f_total = x_.num_cols;

    std::vector<char> sampled(n, 1);
    if (config_.row_subsample < 1.0) {
      for (std::size_t r = 0; r < n; ++r) {
        sampled[r] = rng.Bernoulli(config_.row_subsample) ? 1 : 0;
      }
    }
    std::vector<std::size_t> feats(f_total);
    std::iota(feats.begin(), feats.end(), 0);
    const std::size_t k = std::clamp<std::size_t>(
        static_cast<std::size_t>(
            std::ceil(config_.feature_subsample * static_cast<double>(f_total))),
        1, f_total);
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(feats[i], feats[i + rng.UniformIndex(f_total - i)]);
    }
    feats.resize(k);
    std::sort(feats.begin(), feats.end());
    features_ = feats;

    cols_.assign(k, {});
    for (std::size_t fi = 0; fi < k; ++fi) {
      const auto sorted = index.Sorted(features_[fi]);
      cols_[fi].reserve(n);
      for (const Entry& e : sorted) {
        if (sampled[e.row]) cols_[fi].push_back(e);
      }
    }
    const std::size_t m = cols_[0].size();
    if (m == 0) return RegressionTree();
    goes_left_.assign(n, 0);
    buffer_.resize(m);

    std::vector<TreeNode> nodes(1);
    std::vector<OpenLeaf> open;
    open.push_back(MakeLeaf(0, 0, m, 0));
    int leaves = 1;
    while (leaves < config_.max_leaves) {
      std::size_t pick = open.size();
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (!open[i].best.valid) continue;
        if (pick == open.size() || open[i].best.gain > open[pick].best.gain) {
          pick = i;
        }
      }
      if (pick == open.size()) break;
      const OpenLeaf leaf = open[pick];
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

      const std::size_t mid = Partition(leaf);
      const int left = static_cast<int>(nodes.size());
      nodes.resize(nodes.size() + 2);
      TreeNode& parent = nodes[leaf.node];
      parent.feature = static_cast<int>(features_[leaf.best.feature]);
      parent.threshold = leaf.best.threshold;
      parent.gain = leaf.best.gain;
      parent.left = left;
      parent.right = left + 1;
      open.push_back(MakeLeaf(left, leaf.begin, mid, leaf.depth + 1));
      open.push_back(MakeLeaf(left + 1, mid, leaf.end, leaf.depth + 1));
      ++leaves;
    }
    for (const auto& leaf : open) Finish(nodes, leaf);
    return RegressionTree(std::move(nodes));
  }

 private:
  OpenLeaf MakeLeaf(int node, std::size_t begin, std::size_t end, int depth) {
    OpenLeaf leaf{node, begin, end, depth, 0.0, 0.0, {}};
    for (std::size_t i = begin; i < end; ++i) {
      leaf.g += g_[cols_[0][i].row];
      leaf.h += h_[cols_[0][i].row];
    }
    leaf.best = FindSplit(leaf);
    return leaf;
  }

  void Finish(std::vector<TreeNode>& nodes, const OpenLeaf& leaf) const {
    TreeNode& node = nodes[leaf.node];
    node.value = -leaf.g / (leaf.h + config_.l2_leaf);
    node.count = static_cast<std::int64_t>(leaf.end - leaf.begin);
  }

  Split FindSplit(const OpenLeaf& leaf) const {
    const std::size_t count = leaf.end - leaf.begin;
    const auto min_leaf = static_cast<std::size_t>(config_.min_samples_leaf);
    if (leaf.depth >= config_.max_depth || count < 2 * min_leaf || count < 2) {
      return {};
    }
    const double l2 = config_.l2_leaf;
    const double parent = Score(leaf.g, leaf.h, l2);
    std::vector<Split> per_feature(features_.size());
    ParallelFor(features_.size(), config_.threads, [&](std::size_t fi) {
      const auto& col = cols_[fi];
      Split best;
      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t i = leaf.begin; i + 1 < leaf.end; ++i) {
        const std::uint32_t r = col[i].row;
        gl += g_[r];
        hl += h_[r];
        const std::size_t left_count = i - leaf.begin + 1;
        if (left_count < min_leaf) continue;
        if (count - left_count < min_leaf) break;
        const double v = col[i].value;
        const double next = col[i + 1].value;
        if (!(next > v)) continue;
        const double gain = 0.5 * (Score(gl, hl, l2) +
                                   Score(leaf.g - gl, leaf.h - hl, l2) - parent);
        if (gain > 0.0 && (!best.valid || gain > best.gain)) {
          best = {true, gain, fi, Midpoint(v, next)};
        }
      }
      per_feature[fi] = best;
    });
    Split best;
    for (const auto& s : per_feature) {
      if (s.valid && (!best.valid || s.gain > best.gain)) best = s;
    }
    return best;
  }

  // Stable partition of the leaf range of every feature column; returns the
  // boundary between the left and right child.
  std::size_t Partition(const OpenLeaf& leaf) {
    const double thr = leaf.best.threshold;
    std::size_t left_count = 0;
    for (std::size_t i = leaf.begin; i < leaf.end; ++i) {
      const Entry& e = cols_[leaf.best.feature][i];
      goes_left_[e.row] = e.value <= thr ? 1 : 0;
      left_count += goes_left_[e.row];
    }
    for (auto& col : cols_) {
      std::size_t l = leaf.begin;
      std::size_t b = 0;
      for (std::size_t i = leaf.begin; i < leaf.end; ++i) {
        if (goes_left_[col[i].row]) {
          col[l++] = col[i];
        } else {
          buffer_[b++] = col[i];
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(b),
                col.begin() + static_cast<std::ptrdiff_t>(l));
    }
    return leaf.begin + left_count;
  }

  const features::FeatureMatrix& x_;
  std::span<const double> g_;
  std::span<const double> h_;
  const TrainConfig& config_;
  std::vector<std::size_t> features_;
  std::vector<std::vector<Entry>> cols_;
  std::vector<char> goes_left_;
  std::vector<Entry> buffer_;
};

int DepthOf(const std::vector<TreeNode>& nodes, int node) {
  if (nodes[node].IsLeaf()) return 0;
  return 1 + std::max(DepthOf(nodes, nodes[node].left),
                      DepthOf(nodes, nodes[node].right));
}

}  // namespace

RegressionTree::RegressionTree(std::vector<TreeNode> nodes)
    : nodes_(std::move(nodes)) {
  Require(!nodes_.empty(), "RegressionTree: no nodes");
  const auto n = static_cast<int>(nodes_.size());
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes_[i];
    if (node.IsLeaf()) continue;
    Require(node.left > i && node.left < n && node.right > i && node.right < n,
            "RegressionTree: malformed child links");
  }
}

double RegressionTree::Predict(std::span<const double> row) const {
  int i = 0;
  while (!nodes_[i].IsLeaf()) {
    const auto& node = nodes_[i];
    i = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                       : node.right;
  }
  return nodes_[i].value;
}

int RegressionTree::num_leaves() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const TreeNode& n) { return n.IsLeaf(); }));
}

int RegressionTree::depth() const { return DepthOf(nodes_, 0); }

ColumnIndex::ColumnIndex(const features::FeatureMatrix& x) : num_rows_(x.num_rows) {
  Require(x.num_rows <= UINT32_MAX, "ColumnIndex: too many rows");
  entries_.resize(x.num_rows * x.num_cols);
  for (std::size_t f = 0; f < x.num_cols; ++f) {
    auto begin = entries_.begin() + static_cast<std::ptrdiff_t>(f * num_rows_);
    auto end = begin + static_cast<std::ptrdiff_t>(num_rows_);
    for (std::size_t r = 0; r < num_rows_; ++r) {
      begin[static_cast<std::ptrdiff_t>(r)] = {static_cast<std::uint32_t>(r), x.At(r, f)};
    }
    std::stable_sort(begin, end, [](const Entry& a, const Entry& b) {
      return a.value < b.value;
    });
  }
}

RegressionTree FitTree(const features::FeatureMatrix& x,
                       const ColumnIndex& index,
                       std::span<const double> gradient,
                       std::span<const double> hessian,
                       const TrainConfig& config, Rng& rng) {
  Require(gradient.size() == x.num_rows && hessian.size() == x.num_rows,
          "FitTree: gradient/hessian length mismatch");
  Require(x.num_cols > 0, "FitTree: no features");
  if (x.num_rows == 0) return RegressionTree();
  return TreeBuilder(x, gradient, hessian, config).Build(index, rng);
}

RegressionTree FitTree(const features::FeatureMatrix& x,
                       std::span<const double> gradient,
                       std::span<const double> hessian,
                       const TrainConfig& config, Rng& rng) {
  return FitTree(x, ColumnIndex(x), gradient, hessian, config, rng);
}

}  // namespace wcprank::ranker
