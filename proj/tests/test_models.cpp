#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace eegemo;
namespace fs = std::filesystem;

namespace {

// Two well-separated Gaussian blobs in 2-D, alternating labels.
struct Blobs {
  RowMatrix x;
  std::vector<int> y;
};

Blobs make_blobs(std::uint64_t seed, Eigen::Index n, double separation = 3.0, double spread = 0.3) {
  Rng r(seed);
  Blobs b{RowMatrix(n, 2), {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    b.x(i, 0) = label * separation / 2 + spread * r.normal();
    b.x(i, 1) = spread * r.normal();
    b.y.push_back(label);
  }
  return b;
}

std::vector<double> to_01(const std::vector<int>& y) {
  std::vector<double> out;
  for (int v : y) out.push_back(v > 0 ? 1.0 : 0.0);
  return out;
}

std::vector<Level> to_levels(const std::vector<int>& y) {
  std::vector<Level> out;
  for (int v : y) out.push_back(v > 0 ? Level::high : Level::low);
  return out;
}

double svm_training_accuracy(const SvmModel& m, const RowMatrix& x, const std::vector<int>& y) {
  int ok = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    ok += (svm_predict(m, x.row(i)).label == Level::high) == (y[static_cast<std::size_t>(i)] > 0);
  return static_cast<double>(ok) / static_cast<double>(x.rows());
}

// Max |a - b| over columns matched up to sign.
double max_col_diff_up_to_sign(const Matrix& a, const Matrix& b) {
  double worst = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double plus = (a.col(j) - b.col(j)).cwiseAbs().maxCoeff();
    const double minus = (a.col(j) + b.col(j)).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::min(plus, minus));
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

TEST(Pca, MatchesCovarianceEigenOracle) {
  std::mt19937_64 g(17);
  int compared = 0;
  for (int c = 0; c < 500; ++c) {
    const auto d = 1 + static_cast<Eigen::Index>(g() % 5);
    const auto n = d + 2 + static_cast<Eigen::Index>(g() % (49 - d));
    Matrix x = oracle::random_matrix(g, n, d, -2, 2);
    // Distinct scales keep eigenvalues apart so eigenvectors are well defined.
    for (Eigen::Index j = 0; j < d; ++j) x.col(j) *= 1.0 + static_cast<double>(j);
    const auto basis = pca_fit(x, PcaOptions{});
    const auto [vals, vecs] = oracle::jacobi_eigen(oracle::covariance(x));
    double min_gap = INFINITY;
    for (Eigen::Index j = 1; j < d; ++j) min_gap = std::min(min_gap, vals[j - 1] - vals[j]);
    EXPECT_LE((basis.variances - vals).cwiseAbs().maxCoeff(), 1e-10 * vals[0]);
    if (min_gap < 1e-3 * vals[0]) continue;
    ++compared;
    EXPECT_LE(max_col_diff_up_to_sign(basis.basis, vecs), 1e-8) << "case " << c;
  }
  EXPECT_GE(compared, 400);
}

TEST(Pca, OrthonormalAndDecorrelating) {
  std::mt19937_64 g(18);
  for (int c = 0; c < 200; ++c) {
    const auto d = 1 + static_cast<Eigen::Index>(g() % 20);
    const auto n = 2 + static_cast<Eigen::Index>(g() % 200);
    Matrix mix = oracle::random_matrix(g, d, d);
    const Matrix x = Matrix(oracle::random_matrix(g, n, d)) * mix;
    const auto basis = pca_fit(x, PcaOptions{});
    EXPECT_LE((basis.basis.transpose() * basis.basis - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-8);
    const Matrix z = pca_transform(x, basis);
    ASSERT_EQ(z.cols(), d);
    EXPECT_LE(z.colwise().mean().cwiseAbs().maxCoeff(), 1e-10);
    const Matrix cz = oracle::covariance(z);
    const double diag = cz.diagonal().maxCoeff();
    Matrix off = cz;
    off.diagonal().setZero();
    EXPECT_LE(off.cwiseAbs().maxCoeff(), 1e-8 * std::max(diag, 1e-300));
    const double var_x = oracle::covariance(x).trace();
    EXPECT_NEAR(cz.trace(), var_x, 1e-8 * var_x);
    for (Eigen::Index j = 1; j < d; ++j) EXPECT_GE(basis.variances[j - 1], basis.variances[j]);
  }
}

TEST(Pca, SignConventionLargestEntryPositive) {
  std::mt19937_64 g(19);
  const auto basis = pca_fit(Matrix(oracle::random_matrix(g, 30, 4)), PcaOptions{});
  for (Eigen::Index j = 0; j < 4; ++j) {
    Eigen::Index arg;
    basis.basis.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(basis.basis(arg, j), 0.0);
  }
}

TEST(Pca, AxisAlignedGivesSignedPermutation) {
  // Points on the coordinate axes: diagonal covariance with variances 1 : 25 : 4.
  Matrix x(6, 3);
  x << 1, 0, 0, -1, 0, 0, 0, 5, 0, 0, -5, 0, 0, 0, 2, 0, 0, -2;
  const auto basis = pca_fit(x, PcaOptions{});
  Matrix want = Matrix::Zero(3, 3);
  want(1, 0) = want(2, 1) = want(0, 2) = 1.0;
  EXPECT_LE((basis.basis - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, FewerRowsThanColumns) {
  std::mt19937_64 g(24);
  const Matrix x = oracle::random_matrix(g, 3, 6);
  const auto basis = pca_fit(x, PcaOptions{});
  EXPECT_LE((basis.basis.transpose() * basis.basis - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index j = 2; j < 6; ++j) EXPECT_LE(basis.variances[j], 1e-12);
  EXPECT_NEAR(basis.variances.sum(), oracle::covariance(x).trace(), 1e-10);
}

TEST(Pca, OneDimensional) {
  Matrix x(4, 1);
  x << 1, 2, 3, 6;
  const auto basis = pca_fit(x, PcaOptions{});
  EXPECT_EQ(std::abs(basis.basis(0, 0)), 1.0);
  const Matrix z = pca_transform(x, basis);
  Matrix want(4, 1);
  want << -2, -1, 0, 3;
  EXPECT_LE((z - want * basis.basis(0, 0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, MeanRowMapsToZero) {
  std::mt19937_64 g(21);
  const Matrix x = oracle::random_matrix(g, 20, 5, 0, 1);
  const auto basis = pca_fit(x, PcaOptions{});
  const Matrix mean_row = x.colwise().mean();
  EXPECT_LE(pca_transform(mean_row, basis).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, UncenteredVariantSkipsMean) {
  std::mt19937_64 g(22);
  const Matrix x = oracle::random_matrix(g, 20, 3, 0, 1);
  PcaOptions o;
  o.center = false;
  const auto basis = pca_fit(x, o);
  EXPECT_EQ(basis.mean, Vector::Zero(3));
  EXPECT_LE((pca_transform(x, basis) - x * basis.basis).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Pca, ErrorsAndTextRoundTrip) {
  EXPECT_THROW(pca_fit(Matrix(1, 3), PcaOptions{}), InputError);
  std::mt19937_64 g(23);
  const auto basis = pca_fit(Matrix(oracle::random_matrix(g, 10, 3)), PcaOptions{});
  EXPECT_THROW(pca_transform(Matrix(2, 4), basis), InputError);
  const auto back = pca_from_text(pca_to_text(basis), "t");
  EXPECT_EQ(back.basis, basis.basis);
  EXPECT_EQ(back.mean, basis.mean);
  EXPECT_EQ(back.variances, basis.variances);
  EXPECT_EQ(back.centered, basis.centered);
}

// ---------------------------------------------------------------------------
// SVM
// ---------------------------------------------------------------------------

TEST(RbfKernel, Examples) {
  const Eigen::Vector2d a(0, 0), b(1, 0), c(3, 1);
  EXPECT_EQ(rbf_kernel(a, a, 2.0), 1.0);
  EXPECT_NEAR(rbf_kernel(a, b, 2.0), 0.1353352832366127, 1e-15);
  EXPECT_NEAR(rbf_kernel(a, c, 0.1), 0.36787944117144233, 1e-15);
  EXPECT_THROW(rbf_kernel(a, Eigen::Vector3d(0, 0, 0), 2.0), InputError);
  EXPECT_THROW(rbf_kernel(a, b, 0.0), ConfigError);
}

TEST(RbfKernel, SymmetricBoundedAndPsd) {
  std::mt19937_64 g(30);
  for (int c = 0; c < 50; ++c) {
    const RowMatrix x = oracle::random_matrix(g, 40, 3, -2, 2);
    const double sigma = c % 2 ? 2.0 : 0.1;
    for (Eigen::Index i = 0; i < 40; ++i)
      for (Eigen::Index j = 0; j < 40; ++j) {
        const double k = rbf_kernel(x.row(i), x.row(j), sigma);
        EXPECT_EQ(k, rbf_kernel(x.row(j), x.row(i), sigma));
        EXPECT_GT(k, 0.0);
        EXPECT_LE(k, 1.0);
      }
    const Eigen::SelfAdjointEigenSolver<Matrix> es(oracle::gram(x, sigma));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(Svm, KktConditionsOnRandomProblems) {
  std::mt19937_64 g(31);
  for (int c = 0; c < 50; ++c) {
    const auto n = 20 + static_cast<Eigen::Index>(g() % 60);
    const RowMatrix x = oracle::random_matrix(g, n, 2 + static_cast<Eigen::Index>(g() % 3), -1.5, 1.5);
    std::vector<int> y;
    for (Eigen::Index i = 0; i < n; ++i) y.push_back((x(i, 0) + 0.5 * x(i, 1) > 0) != (g() % 5 == 0) ? 1 : -1);
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) y[0] = -y[0];
    SvmParams p;
    p.sigma = c % 2 ? 2.0 : 0.1;
    p.C = c % 3 ? 1.0 : 10.0;
    const auto res = svm_train(x, y, p);
    double sum = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      sum += res.alpha[i] * y[static_cast<std::size_t>(i)];
      EXPECT_GE(res.alpha[i], 0.0);
      EXPECT_LE(res.alpha[i], p.C);
    }
    EXPECT_LE(std::abs(sum), 1e-8);
    EXPECT_LE(oracle::kkt_residual(x, y, res.alpha, res.model.bias, p.C, p.sigma), p.tol) << "case " << c;
  }
}

TEST(Svm, SeparableBlobsAreFitExactly) {
  const auto b = make_blobs(40, 200);
  const auto res = svm_train(b.x, b.y, SvmParams{});
  EXPECT_EQ(svm_training_accuracy(res.model, b.x, b.y), 1.0);
}

TEST(Svm, XorIsLearned) {
  Rng r(41);
  RowMatrix x(200, 2);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 200; ++i) {
    x(i, 0) = r.uniform(-1, 1);
    x(i, 1) = r.uniform(-1, 1);
    y.push_back(x(i, 0) * x(i, 1) > 0 ? 1 : -1);
  }
  SvmParams p;
  p.C = 10;
  const auto res = svm_train(x, y, p);
  EXPECT_GE(svm_training_accuracy(res.model, x, y), 0.95);
}

TEST(Svm, DegenerateInputsAreReported) {
  RowMatrix same = RowMatrix::Ones(6, 2);
  const std::vector<int> mixed{1, -1, 1, -1, 1, -1};
  EXPECT_THROW(svm_train(same, mixed, SvmParams{}), NumericalError);
  const auto b = make_blobs(42, 10);
  EXPECT_THROW(svm_train(b.x, std::vector<int>(10, 1), SvmParams{}), InputError);
  EXPECT_THROW(svm_train(b.x, std::vector<int>(9, 1), SvmParams{}), InputError);
}

TEST(Svm, DualObjectiveNeverDecreases) {
  const auto b = make_blobs(43, 80, 1.0, 0.6);
  SvmParams p;
  p.record_objective = true;
  const auto res = svm_train(b.x, b.y, p);
  ASSERT_GT(res.info.objective.size(), 1u);
  for (std::size_t i = 1; i < res.info.objective.size(); ++i)
    EXPECT_GE(res.info.objective[i], res.info.objective[i - 1] - 1e-12);
}

TEST(Svm, DecisionValuesAtMarginAndFarAway) {
  const auto b = make_blobs(44, 120, 1.5, 0.5);
  const auto res = svm_train(b.x, b.y, SvmParams{});
  int free_count = 0;
  for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
    if (res.alpha[i] > 1e-8 && res.alpha[i] < 1.0 - 1e-8) {
      ++free_count;
      EXPECT_NEAR(std::abs(svm_predict(res.model, b.x.row(i)).decision), 1.0, SvmParams{}.tol);
    }
  }
  EXPECT_GT(free_count, 0);
  const auto far = svm_predict(res.model, Eigen::RowVector2d(100, 100));
  EXPECT_NEAR(far.decision, res.model.bias, 1e-12);
}

TEST(Svm, Deterministic) {
  const auto b = make_blobs(45, 60, 1.0, 0.6);
  const auto r1 = svm_train(b.x, b.y, SvmParams{});
  const auto r2 = svm_train(b.x, b.y, SvmParams{});
  EXPECT_EQ(r1.alpha, r2.alpha);
  EXPECT_EQ(r1.model.bias, r2.model.bias);
}

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

TEST(Knn, MatchesExhaustiveOracleForAllK) {
  std::mt19937_64 g(50);
  for (int c = 0; c < 20; ++c) {
    const RowMatrix train = oracle::random_matrix(g, 30, 3);
    std::vector<Level> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(g() % 2 ? Level::high : Level::low);
    for (int k = 1; k <= 30; ++k) {
      KnnParams p;
      p.k = k;
      p.allow_even = true;
      const auto m = knn_fit(train, labels, p);
      for (int q = 0; q < 5; ++q) {
        const Vector x = oracle::random_vector(g, 3);
        EXPECT_EQ(knn_predict(m, x), oracle::knn(train, labels, x, k)) << "k=" << k;
      }
    }
  }
}

TEST(Knn, FiveNearestOnHundredQueries) {
  std::mt19937_64 g(51);
  const RowMatrix train = oracle::random_matrix(g, 30, 3);
  std::vector<Level> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i % 3 ? Level::high : Level::low);
  const auto m = knn_fit(train, labels, KnnParams{});
  for (int q = 0; q < 100; ++q) {
    const Vector x = oracle::random_vector(g, 3);
    EXPECT_EQ(knn_predict(m, x), oracle::knn(train, labels, x, 5));
  }
}

TEST(Knn, ExactMatchAndTieBreak) {
  RowMatrix train(3, 1);
  train << -1, 1, 5;
  const std::vector<Level> labels{Level::high, Level::low, Level::low};
  KnnParams one;
  one.k = 1;
  const auto m = knn_fit(train, labels, one);
  EXPECT_EQ(knn_predict(m, Vector::Constant(1, 5.0)), Level::low);
  EXPECT_EQ(knn_predict(m, Vector::Constant(1, -1.0)), Level::high);
  // Equidistant from indices 0 and 1: lower index wins.
  EXPECT_EQ(knn_predict(m, Vector::Zero(1)), Level::high);
  EXPECT_EQ(knn_neighbors(m, Vector::Zero(1)), std::vector<Eigen::Index>{0});
}

TEST(Knn, RejectsBadK) {
  RowMatrix train = RowMatrix::Zero(4, 2);
  const std::vector<Level> labels(4, Level::low);
  KnnParams even;
  even.k = 4;
  EXPECT_THROW(knn_fit(train, labels, even), ConfigError);
  KnnParams big;
  big.k = 5;
  EXPECT_THROW(knn_fit(train, labels, big), ConfigError);
  KnnParams zero;
  zero.k = 0;
  EXPECT_THROW(knn_fit(train, labels, zero), ConfigError);
  const auto m = knn_fit(train, labels, KnnParams{3});
  EXPECT_THROW(knn_predict(m, Vector::Zero(3)), InputError);
}

// ---------------------------------------------------------------------------
// ANN
// ---------------------------------------------------------------------------

TEST(Ann, GradientMatchesFiniteDifferences) {
  std::mt19937_64 g(60);
  for (int c = 0; c < 10; ++c) {
    AnnParams p;
    p.seed = static_cast<std::uint64_t>(c + 1);
    const Matrix x = oracle::random_matrix(g, 5, 4);
    const std::vector<double> y{1, 0, 1, 1, 0};
    auto m = ann_init(4, p);
    // Nonzero biases so ReLU kinks are not hit exactly.
    for (auto& b : m.biases) b = oracle::random_vector(g, b.size(), -0.1, 0.1);
    const auto grad = ann_gradient(m, x, y);
    EXPECT_NEAR(grad.loss, ann_loss(m, x, y), 1e-15);
    const double h = 1e-6;
    double worst = 0;
    auto check = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + h;
      const double up = ann_loss(m, x, y);
      param = keep - h;
      const double down = ann_loss(m, x, y);
      param = keep;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) check(m.weights[l].data()[i], grad.weights[l].data()[i]);
      for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) check(m.biases[l][i], grad.biases[l][i]);
    }
    EXPECT_LE(worst, 1e-4) << "case " << c;
  }
}

TEST(Ann, LossMatchesScalarOracle) {
  std::mt19937_64 g(61);
  for (int c = 0; c < 20; ++c) {
    AnnParams p;
    p.seed = static_cast<std::uint64_t>(c);
    const auto m = ann_init(6, p);
    const Matrix x = oracle::random_matrix(g, 12, 6, -3, 3);
    std::vector<double> y;
    for (int i = 0; i < 12; ++i) y.push_back(static_cast<double>(g() % 2));
    EXPECT_NEAR(ann_loss(m, x, y), oracle::ann_loss(m, x, y), 1e-12);
    const Vector probs = ann_predict_batch(m, x);
    for (Eigen::Index i = 0; i < 12; ++i) EXPECT_NEAR(ann_predict(m, x.row(i)).probability, probs[i], 1e-15);
  }
}

TEST(Ann, SeparableBlobsAreLearned) {
  const auto b = make_blobs(62, 200);
  const auto res = ann_train(b.x, to_01(b.y), AnnParams{});
  const Vector p = ann_predict_batch(res.model, b.x);
  int ok = 0;
  for (Eigen::Index i = 0; i < 200; ++i) ok += (p[i] > 0.5) == (b.y[static_cast<std::size_t>(i)] > 0);
  EXPECT_GE(ok, 198);
}

TEST(Ann, IdenticalInputsConvergeToPrior) {
  const Matrix x = Matrix::Constant(40, 3, 0.5);
  std::vector<double> y(40, 0.0);
  for (int i = 0; i < 12; ++i) y[static_cast<std::size_t>(i * 3)] = 1.0;
  const double prior = 0.3;
  const double h = -(prior * std::log(prior) + (1 - prior) * std::log(1 - prior));

  // Full-batch descent reaches the constant-predictor optimum.
  AnnParams full;
  full.batch_size = 40;
  full.learning_rate = 0.5;
  full.epochs = 500;
  const auto res = ann_train(x, y, full);
  EXPECT_NEAR(ann_predict(res.model, x.row(0)).probability, prior, 1e-4);
  EXPECT_NEAR(res.loss_history.back(), h, 1e-6);

  // Default mini-batches move toward it; batch noise near the optimum
  // triggers repeated halving, so it stops short.
  const auto init = ann_init(3, AnnParams{});
  const auto mini = ann_train(x, y, AnnParams{});
  const double p0 = ann_predict(init, x.row(0)).probability;
  const double p1 = ann_predict(mini.model, x.row(0)).probability;
  EXPECT_LT(std::abs(p1 - prior), std::abs(p0 - prior));
  EXPECT_LT(mini.loss_history.back() - h, oracle::ann_loss(init, x, y) - h);
}

TEST(Ann, ClosedFormOutputs) {
  AnnParams p;
  auto m = ann_init(3, p);
  for (auto& w : m.weights) w.setZero();
  for (auto& b : m.biases) b.setZero();
  EXPECT_EQ(ann_predict(m, Eigen::Vector3d(4, -2, 7)).probability, 0.5);

  m = ann_init(3, p);
  m.biases[0].setConstant(-100.0);  // first hidden layer dead for bounded inputs
  m.biases[2][0] = 0.7;
  for (Eigen::Index i = 0; i < m.biases[1].size(); ++i) m.biases[1][i] = -0.1;
  EXPECT_NEAR(ann_predict(m, Eigen::Vector3d(1, 0.5, -1)).probability, 1 / (1 + std::exp(-0.7)), 1e-15);

  m = ann_init(3, p);
  const Eigen::Vector3d x(0.2, 0.4, 0.9);
  double last = 0;
  for (double b = -3; b <= 3; b += 0.5) {
    m.biases[2][0] = b;
    const double prob = ann_predict(m, x).probability;
    EXPECT_GT(prob, last);
    last = prob;
  }
}

TEST(Ann, LossHistoryNonIncreasingAndDeterministic) {
  const auto b = make_blobs(63, 100, 1.0, 0.8);
  AnnParams p;
  p.learning_rate = 0.5;  // large enough to trigger rollbacks
  p.epochs = 60;
  const auto r1 = ann_train(b.x, to_01(b.y), p);
  const auto r2 = ann_train(b.x, to_01(b.y), p);
  ASSERT_EQ(r1.loss_history.size(), 60u);
  for (std::size_t i = 1; i < r1.loss_history.size(); ++i) EXPECT_LE(r1.loss_history[i], r1.loss_history[i - 1]);
  EXPECT_EQ(r1.loss_history, r2.loss_history);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(r1.model.weights[l], r2.model.weights[l]);
  p.seed = 2;
  EXPECT_NE(ann_train(b.x, to_01(b.y), p).model.weights[0], r1.model.weights[0]);
}

TEST(Ann, RejectsBadInput) {
  const auto b = make_blobs(64, 10);
  EXPECT_THROW(ann_train(b.x, std::vector<double>(10, 1.0), AnnParams{}), InputError);
  AnnParams p;
  p.hidden = {4};
  EXPECT_THROW(ann_train(b.x, to_01(b.y), p), ConfigError);
  Matrix bad = b.x;
  bad(0, 0) = NAN;
  EXPECT_THROW(ann_train(bad, to_01(b.y), AnnParams{}), NumericalError);
}

// ---------------------------------------------------------------------------
// Bundles
// ---------------------------------------------------------------------------

TEST(Bundle, RoundTripPreservesPredictions) {
  const auto b = make_blobs(70, 60, 1.0, 0.6);
  const auto pca = pca_fit(b.x, PcaOptions{});
  const RowMatrix z = pca_transform(b.x, pca);
  const auto levels = to_levels(b.y);
  const std::vector<ColumnDescriptor> cols{{"F3", Band::beta, FeatureKind::entropy},
                                           {"F3", Band::beta, FeatureKind::energy}};
  for (auto kind : {ClassifierKind::svm, ClassifierKind::knn, ClassifierKind::ann}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.ann.epochs = 20;
    ModelBundle bundle{train_classifier(spec, z, levels), pca, cols, {{"config_hash", "abc"}}};
    const auto dir = fs::temp_directory_path() / ("eegemo-bundle-" + std::string(classifier_name(kind)));
    fs::remove_all(dir);
    save_bundle(dir, bundle);
    const auto back = load_bundle(dir);
    EXPECT_EQ(back.model.index(), bundle.model.index());
    EXPECT_EQ(back.columns, cols);
    EXPECT_EQ(back.extra.at("config_hash"), "abc");
    EXPECT_EQ(back.pca.basis, pca.basis);
    EXPECT_EQ(predict_batch(back.model, z), predict_batch(bundle.model, z)) << classifier_name(kind);
  }
  EXPECT_THROW(load_bundle(fs::temp_directory_path() / "eegemo-no-such-bundle"), InputError);
}
