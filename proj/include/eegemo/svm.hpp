#pragma once

#include "core.hpp"
#include "dataset.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace eegemo {

/// exp(-sigma * ||x - x'||^2). Note sigma multiplies the squared distance.
template <typename A, typename B>
double rbf_kernel(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& xp, double sigma) {
  if (x.size() != xp.size()) throw InputError("rbf_kernel: dimension mismatch");
  if (!(sigma > 0.0)) throw ConfigError("rbf_kernel: sigma must be positive");
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = x.derived().coeff(i) - xp.derived().coeff(i);
    d2 += t * t;
  }
  return std::exp(-sigma * d2);
}

struct SvmParams {
  double sigma = 2.0;
  double C = 1.0;
  double tol = 1e-3;
  // 0 selects max(10^7, 100 n).
  long long max_iterations = 0;
  std::size_t cache_megabytes = 512;
  bool record_objective = false;

  void validate() const {
    if (!(sigma > 0.0)) throw ConfigError("svm: sigma must be positive");
    if (!(C > 0.0)) throw ConfigError("svm: C must be positive");
    if (!(tol > 0.0)) throw ConfigError("svm: tol must be positive");
    if (max_iterations < 0) throw ConfigError("svm: max_iterations must be non-negative");
  }
};

struct SvmModel {
  RowMatrix support_vectors;
  Vector dual_coef;  // alpha_i * y_i for each stored support vector
  double bias = 0.0;
  double sigma = 2.0;
  double C = 1.0;

  Eigen::Index dimension() const { return support_vectors.cols(); }
};

struct SvmTrainInfo {
  long long iterations = 0;
  double final_gap = 0.0;  // max KKT pair violation at exit
  Eigen::Index support_count = 0;
  Eigen::Index bounded_count = 0;
  std::vector<double> objective;  // dual objective after each update (opt-in)
};

struct SvmTrainResult {
  SvmModel model;
  Vector alpha;  // full dual vector, one entry per training row
  SvmTrainInfo info;
};

namespace detail {

// LRU cache of kernel matrix rows.
class KernelRows {
public:
  KernelRows(const RowMatrix& x, double sigma, std::size_t budget_bytes)
      : x_(x), sigma_(sigma) {
    const auto row_bytes = static_cast<std::size_t>(x.rows()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, row_bytes ? budget_bytes / row_bytes : 2);
  }

  const Vector& row(Eigen::Index i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      auto& victim = lru_.back();
      index_.erase(victim.first);
      lru_.splice(lru_.begin(), lru_, std::prev(lru_.end()));
      lru_.front().first = i;
    } else {
      lru_.emplace_front(i, Vector());
    }
    Vector& out = lru_.front().second;
    out = (x_.rowwise() - x_.row(i)).rowwise().squaredNorm();
    out = (-sigma_ * out.array()).exp();
    index_[i] = lru_.begin();
    return out;
  }

private:
  using Entry = std::pair<Eigen::Index, Vector>;
  const RowMatrix& x_;
  double sigma_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<Eigen::Index, std::list<Entry>::iterator> index_;
};

}  // namespace detail

/// Soft-margin RBF SVM trained by sequential minimal optimization on the
/// dual. Labels are +1 (high) / -1 (low). Working pairs follow the
/// maximal-violator / second-order rule; the solver stops when the largest
/// KKT pair violation drops below `tol`.
inline SvmTrainResult svm_train(const RowMatrix& x, std::span<const int> y, const SvmParams& params) {
  params.validate();
  const auto n = x.rows();
  if (static_cast<Eigen::Index>(y.size()) != n) throw InputError("svm: label count does not match rows");
  if (n < 2) throw InputError("svm: need at least 2 training rows");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1)
      pos = true;
    else if (v == -1)
      neg = true;
    else
      throw InputError("svm: labels must be +1 or -1");
  }
  if (!pos || !neg) throw InputError("svm: training set contains a single class");
  if (!x.allFinite()) throw NumericalError("svm: non-finite training features");
  {
    bool all_same = true;
    for (Eigen::Index i = 1; i < n && all_same; ++i) all_same = x.row(i) == x.row(0);
    if (all_same)
      throw NumericalError("svm: degenerate problem, all training points identical with mixed labels");
  }

  const double C = params.C;
  const double tau = 1e-12;
  const long long max_iter = params.max_iterations > 0 ? params.max_iterations
                                                       : std::max<long long>(10'000'000, 100 * n);
  detail::KernelRows kernel(x, params.sigma, params.cache_megabytes << 20);
  Vector yd(n);
  for (Eigen::Index t = 0; t < n; ++t) yd[t] = y[static_cast<std::size_t>(t)];

  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);  // Q alpha - 1
  auto in_up = [&](Eigen::Index t) { return yd[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
  auto in_low = [&](Eigen::Index t) { return yd[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

  SvmTrainInfo info;
  auto dual_objective = [&] {
    double f = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return -0.5 * f;
  };

  long long iter = 0;
  double gap = 0.0;
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -yd[t] * grad[t] > gmax) {
        gmax = -yd[t] * grad[t];
        i = t;
      }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    const Vector* ki = i >= 0 ? &kernel.row(i) : nullptr;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = yd[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      const double b = gmax + v;
      if (ki && b > 0.0) {
        double a = 2.0 - 2.0 * (*ki)[t];  // K_ii = K_tt = 1 for the RBF kernel
        if (a <= 0.0) a = tau;
        const double obj = -(b * b) / a;
        if (obj < best) {
          best = obj;
          j = t;
        }
      }
    }
    gap = gmax + gmax2;
    if (i < 0 || j < 0 || gap < params.tol) break;
    if (iter >= max_iter)
      throw NumericalError("svm: SMO did not converge after " + std::to_string(iter) +
                           " iterations (KKT gap " + std::to_string(gap) + ")");
    ++iter;

    const Vector& Ki = kernel.row(i);
    const Vector& Kj = kernel.row(j);  // capacity >= 2 keeps Ki alive
    const double kij = Ki[j];
    const double yi = yd[i], yj = yd[j];
    const double old_ai = alpha[i], old_aj = alpha[j];
    double ai = old_ai, aj = old_aj;
    double quad = 2.0 - 2.0 * kij;
    if (quad <= 0.0) quad = tau;
    if (yi != yj) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
      }
      if (diff > 0.0) {
        if (ai > C) { ai = C; aj = C - diff; }
      } else {
        if (aj > C) { aj = C; ai = C + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) { ai = C; aj = sum - C; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
      }
      if (sum > C) {
        if (aj > C) { aj = C; ai = sum - C; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double dai = (ai - old_ai) * yi;
    const double daj = (aj - old_aj) * yj;
    grad.array() += yd.array() * (Ki.array() * dai + Kj.array() * daj);
    if (params.record_objective) info.objective.push_back(dual_objective());
  }

  // rho: mean of y G over free vectors, else midpoint of the feasible range.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  Eigen::Index n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = yd[t] * grad[t];
    if (alpha[t] >= C) {
      if (yd[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (yd[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      sum_free += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  SvmTrainResult out;
  out.alpha = alpha;
  out.model.sigma = params.sigma;
  out.model.C = C;
  out.model.bias = -rho;
  Eigen::Index nsv = 0;
  for (Eigen::Index t = 0; t < n; ++t) nsv += alpha[t] > 0.0;
  out.model.support_vectors.resize(nsv, x.cols());
  out.model.dual_coef.resize(nsv);
  Eigen::Index k = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    out.model.support_vectors.row(k) = x.row(t);
    out.model.dual_coef[k] = alpha[t] * yd[t];
    ++k;
    if (alpha[t] >= C) ++info.bounded_count;
  }
  info.iterations = iter;
  info.final_gap = gap;
  info.support_count = nsv;
  out.info = std::move(info);
  return out;
}

struct SvmPrediction {
  Level label;
  double decision;
};

template <typename Derived>
SvmPrediction svm_predict(const SvmModel& m, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != m.dimension())
    throw InputError("svm_predict: expected " + std::to_string(m.dimension()) + " features, got " +
                     std::to_string(x.size()));
  const Eigen::RowVectorXd row = x.derived().reshaped().transpose();
  Vector k = (m.support_vectors.rowwise() - row).rowwise().squaredNorm();
  k = (-m.sigma * k.array()).exp();
  const double f = m.dual_coef.dot(k) + m.bias;
  return {f > 0.0 ? Level::high : Level::low, f};
}

}  // namespace eegemo
