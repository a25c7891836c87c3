#pragma once

#include "core.hpp"
#include "io_util.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace eegemo {

/// Orthonormal decorrelating basis fitted on training features. Columns of
/// `basis` are principal directions in descending variance order; nothing is
/// dropped.
struct PcaBasis {
  Vector mean;       // zeros when fitted uncentered
  Matrix basis;      // d x d
  Vector variances;  // variance along each direction, descending
  bool centered = true;

  Eigen::Index dimension() const { return basis.cols(); }
};

struct PcaOptions {
  // The literal Z = X phi form without mean removal is available for
  // comparison; centering is what makes the training components uncorrelated.
  bool center = true;
};

template <typename Derived>
PcaBasis pca_fit(const Eigen::MatrixBase<Derived>& x, const PcaOptions& opts = {}) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (n < 2) throw InputError("PCA needs at least 2 rows, got " + std::to_string(n));
  if (d < 1) throw InputError("PCA needs at least one column");
  if (!x.allFinite()) throw NumericalError("PCA input has non-finite entries");

  PcaBasis out;
  out.centered = opts.center;
  out.mean = opts.center ? Vector(x.colwise().mean().transpose()) : Vector::Zero(d);
  const Matrix centered = x.rowwise() - out.mean.transpose();

  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeFullV);
  // Only min(n, d) singular values exist; the remaining directions of the
  // full V carry zero variance.
  Vector s = Vector::Zero(d);
  s.head(svd.singularValues().size()) = svd.singularValues();
  const Matrix& v = svd.matrixV();

  // Stable descending order; equal singular values keep solver column order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return s[a] > s[b]; });

  out.basis.resize(d, d);
  out.variances.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    Vector col = v.col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < d; ++i)
      if (std::abs(col[i]) > std::abs(col[arg])) arg = i;
    if (col[arg] < 0.0) col = -col;
    out.basis.col(j) = col;
    out.variances[j] = s[src] * s[src] / static_cast<double>(n - 1);
  }
  return out;
}

template <typename Derived>
Matrix pca_transform(const Eigen::MatrixBase<Derived>& x, const PcaBasis& basis) {
  if (x.cols() != basis.dimension())
    throw InputError("PCA transform: " + std::to_string(x.cols()) + " columns, basis has " +
                     std::to_string(basis.dimension()));
  return (x.rowwise() - basis.mean.transpose()) * basis.basis;
}

inline std::string pca_to_text(const PcaBasis& b) {
  std::string out = "# pca centered=" + std::string(b.centered ? "1" : "0") + "\n";
  out += io::matrix_to_text(b.mean.transpose());
  out += io::matrix_to_text(b.variances.transpose());
  out += io::matrix_to_text(b.basis);
  return out;
}

inline PcaBasis pca_from_text(const std::string& text, const std::string& context) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  PcaBasis b;
  if (line == "# pca centered=1")
    b.centered = true;
  else if (line == "# pca centered=0")
    b.centered = false;
  else
    throw InputError(context + ": not a PCA basis file");
  auto next_block = [&]() {
    std::string header;
    if (!std::getline(in, header)) throw InputError(context + ": truncated");
    long long rows = 0, cols = 0;
    if (std::sscanf(header.c_str(), "# rows=%lld cols=%lld", &rows, &cols) != 2)
      throw InputError(context + ": bad block header");
    std::string block = header + "\n";
    for (long long r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw InputError(context + ": truncated");
      block += line + "\n";
    }
    return io::matrix_from_text(block, context);
  };
  b.mean = next_block().transpose();
  b.variances = next_block().transpose();
  b.basis = next_block();
  if (b.basis.rows() != b.basis.cols() || b.basis.rows() != b.mean.size() || b.variances.size() != b.mean.size())
    throw InputError(context + ": inconsistent PCA dimensions");
  return b;
}

}  // namespace eegemo
