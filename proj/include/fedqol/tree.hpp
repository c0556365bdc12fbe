#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fedqol/error.hpp"

// CART with Gini impurity (classification) or variance reduction
// (regression). Pure nodes are never split; predictions are piecewise
// constant leaf values. Deliberately deterministic: best split ties resolve
// to the lowest feature index, then the lowest threshold.

namespace fedqol {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;  // leaf: positive-class fraction or mean target
};

struct CartConfig {
  int max_depth = 8;
  int min_leaf = 5;
  bool classification = true;
};

namespace detail {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // impurity decrease, > 0 when a split exists
};

inline double node_impurity(double sum, double sq_sum, double n,
                            bool classification) {
  if (classification) {
    double p = sum / n;  // labels are 0/1 so the mean is the positive rate
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  }
  double mean = sum / n;
  return sq_sum / n - mean * mean;
}

}  // namespace detail

class Cart {
 public:
  static std::vector<TreeNode> fit(const std::vector<std::vector<double>>& X,
                                   const std::vector<double>& y,
                                   const CartConfig& cfg) {
    if (X.empty()) throw data_error("cannot grow a tree on an empty dataset");
    Cart builder(X, y, cfg);
    std::vector<std::size_t> idx(X.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    builder.grow(std::move(idx), 0);
    return std::move(builder.nodes_);
  }

  static double predict_one(const std::vector<TreeNode>& nodes,
                            const std::vector<double>& x) {
    int at = 0;
    while (nodes[at].feature >= 0) {
      at = x[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left
                                                       : nodes[at].right;
    }
    return nodes[at].value;
  }

 private:
  Cart(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
       const CartConfig& cfg)
      : X_(X), y_(y), cfg_(cfg) {}

  int grow(std::vector<std::size_t> idx, int depth) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i : idx) {
      sum += y_[i];
      sq += y_[i] * y_[i];
    }
    double n = static_cast<double>(idx.size());
    double impurity = detail::node_impurity(sum, sq, n, cfg_.classification);

    int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[node_id].value = sum / n;

    bool splittable = depth < cfg_.max_depth &&
                      idx.size() >= 2 * static_cast<std::size_t>(cfg_.min_leaf) &&
                      impurity > 1e-12;  // a pure node stays a leaf
    if (!splittable) return node_id;

    detail::SplitChoice best = best_split(idx, sum, sq);
    if (best.feature < 0) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (X_[i][best.feature] <= best.threshold ? left : right).push_back(i);
    }
    nodes_[node_id].feature = best.feature;
    nodes_[node_id].threshold = best.threshold;
    int l = grow(std::move(left), depth + 1);
    int r = grow(std::move(right), depth + 1);
    nodes_[node_id].left = l;
    nodes_[node_id].right = r;
    return node_id;
  }

  detail::SplitChoice best_split(const std::vector<std::size_t>& idx,
                                 double total_sum, double total_sq) {
    std::size_t n = idx.size();
    double parent =
        detail::node_impurity(total_sum, total_sq, static_cast<double>(n),
                              cfg_.classification) *
        static_cast<double>(n);
    detail::SplitChoice best;
    std::size_t p = X_[0].size();
    std::vector<std::pair<double, double>> col(n);  // (feature value, target)
    for (std::size_t f = 0; f < p; ++f) {
      for (std::size_t i = 0; i < n; ++i) {
        col[i] = {X_[idx[i]][f], y_[idx[i]]};
      }
      std::sort(col.begin(), col.end());
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += col[i].second;
        left_sq += col[i].second * col[i].second;
        if (col[i].first == col[i + 1].first) continue;  // no boundary here
        std::size_t nl = i + 1, nr = n - nl;
        if (nl < static_cast<std::size_t>(cfg_.min_leaf) ||
            nr < static_cast<std::size_t>(cfg_.min_leaf)) {
          continue;
        }
        double children =
            detail::node_impurity(left_sum, left_sq, static_cast<double>(nl),
                                  cfg_.classification) *
                static_cast<double>(nl) +
            detail::node_impurity(total_sum - left_sum, total_sq - left_sq,
                                  static_cast<double>(nr),
                                  cfg_.classification) *
                static_cast<double>(nr);
        double gain = parent - children;
        if (gain > best.score + 1e-12) {
          best.score = gain;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (col[i].first + col[i + 1].first);
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& X_;
  const std::vector<double>& y_;
  CartConfig cfg_;
  std::vector<TreeNode> nodes_;
};

}  // namespace fedqol
