#pragma once

#include "core.hpp"
#include "dataset.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace eegemo {

struct KnnParams {
  int k = 5;
  // Even K can produce vote ties; rejected unless explicitly allowed.
  bool allow_even = false;

  void validate() const {
    if (k < 1) throw ConfigError("knn: K must be at least 1");
    if (k % 2 == 0 && !allow_even) throw ConfigError("knn: K must be odd (set allow_even to override)");
  }
};

struct KnnModel {
  RowMatrix train;
  std::vector<Level> labels;
  int k = 5;

  Eigen::Index dimension() const { return train.cols(); }
};

inline KnnModel knn_fit(RowMatrix x, std::vector<Level> labels, const KnnParams& params) {
  params.validate();
  if (x.rows() == 0) throw InputError("knn: empty training set");
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw InputError("knn: label count does not match rows");
  if (params.k > x.rows())
    throw ConfigError("knn: K=" + std::to_string(params.k) + " exceeds " + std::to_string(x.rows()) +
                      " training rows");
  return {std::move(x), std::move(labels), params.k};
}

/// Indices of the K nearest training rows in order of (distance, index).
template <typename Derived>
std::vector<Eigen::Index> knn_neighbors(const KnnModel& m, const Eigen::MatrixBase<Derived>& x) {
  if (m.train.rows() == 0) throw InputError("knn: empty training set");
  if (x.size() != m.dimension())
    throw InputError("knn_predict: expected " + std::to_string(m.dimension()) + " features, got " +
                     std::to_string(x.size()));
  const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(m.k, m.train.rows()));
  const auto d = m.train.cols();
  std::vector<double> q(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) q[static_cast<std::size_t>(j)] = x.derived().coeff(j);

  // Max-heap of the best k (distance, index) pairs seen so far.
  std::vector<std::pair<double, Eigen::Index>> heap;
  heap.reserve(k + 1);
  for (Eigen::Index i = 0; i < m.train.rows(); ++i) {
    const double* row = m.train.data() + i * d;
    double dist = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double t = row[j] - q[static_cast<std::size_t>(j)];
      dist += t * t;
    }
    const std::pair<double, Eigen::Index> cand{dist, i};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end());
    } else if (cand < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end());
    }
  }
  std::sort_heap(heap.begin(), heap.end());
  std::vector<Eigen::Index> out;
  out.reserve(k);
  for (const auto& [dist, idx] : heap) out.push_back(idx);
  return out;
}

/// Majority vote of the K nearest rows; a tied vote goes to the nearest
/// neighbor's label.
template <typename Derived>
Level knn_predict(const KnnModel& m, const Eigen::MatrixBase<Derived>& x) {
  const auto nn = knn_neighbors(m, x);
  std::size_t high = 0;
  for (auto idx : nn) high += m.labels[static_cast<std::size_t>(idx)] == Level::high;
  const std::size_t low = nn.size() - high;
  if (high != low) return high > low ? Level::high : Level::low;
  return m.labels[static_cast<std::size_t>(nn.front())];
}

}  // namespace eegemo
