#pragma once

#include "ann.hpp"
#include "core.hpp"
#include "features.hpp"
#include "io_util.hpp"
#include "knn.hpp"
#include "pca.hpp"
#include "svm.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace eegemo {

enum class ClassifierKind { svm, knn, ann };

inline std::string_view classifier_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::svm: return "SVM";
    case ClassifierKind::knn: return "KNN";
    case ClassifierKind::ann: return "ANN";
  }
  return "?";
}

inline ClassifierKind parse_classifier(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "svm") return ClassifierKind::svm;
  if (lower == "knn") return ClassifierKind::knn;
  if (lower == "ann") return ClassifierKind::ann;
  throw ConfigError("unknown classifier '" + std::string(name) + "'");
}

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::svm;
  SvmParams svm;
  KnnParams knn;
  AnnParams ann;
};

using TrainedModel = std::variant<SvmModel, KnnModel, AnnModel>;

inline TrainedModel train_classifier(const ClassifierSpec& spec, const RowMatrix& x,
                                     const std::vector<Level>& labels) {
  switch (spec.kind) {
    case ClassifierKind::svm: {
      std::vector<int> y;
      y.reserve(labels.size());
      for (Level l : labels) y.push_back(l == Level::high ? 1 : -1);
      return svm_train(x, y, spec.svm).model;
    }
    case ClassifierKind::knn:
      return knn_fit(x, labels, spec.knn);
    case ClassifierKind::ann: {
      std::vector<double> y;
      y.reserve(labels.size());
      for (Level l : labels) y.push_back(l == Level::high ? 1.0 : 0.0);
      return ann_train(x, y, spec.ann).model;
    }
  }
  throw ConfigError("unknown classifier");
}

inline std::vector<Level> predict_batch(const TrainedModel& model, const RowMatrix& x) {
  std::vector<Level> out(static_cast<std::size_t>(x.rows()));
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, AnnModel>) {
          const Vector p = ann_predict_batch(m, x);
          for (Eigen::Index i = 0; i < x.rows(); ++i)
            out[static_cast<std::size_t>(i)] = p[i] > 0.5 ? Level::high : Level::low;
        } else if constexpr (std::is_same_v<M, SvmModel>) {
          for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = svm_predict(m, x.row(i)).label;
        } else {
          for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = knn_predict(m, x.row(i));
        }
      },
      model);
  return out;
}

// ---------------------------------------------------------------------------
// Model bundle: a directory holding metadata.json plus text matrices.
//
//   metadata.json   kind, hyperparameters, feature columns, file names
//   pca.txt         PCA basis the classifier inputs were projected with
//   svm:  support_vectors.txt, dual_coef.txt
//   knn:  train.txt, labels.txt (1 = high, 0 = low)
//   ann:  weights_<l>.txt, biases_<l>.txt for l = 0, 1, 2
// ---------------------------------------------------------------------------

struct ModelBundle {
  TrainedModel model;
  PcaBasis pca;
  std::vector<ColumnDescriptor> columns;
  nlohmann::json extra;  // free-form provenance (config hash, seed, ...)
};

inline void save_bundle(const std::filesystem::path& dir, const ModelBundle& b) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  fs::create_directories(dir);
  json meta;
  meta["format"] = "eegemo-model";
  meta["version"] = 1;
  std::vector<std::string> cols;
  for (const auto& c : b.columns) cols.push_back(c.name());
  meta["feature_columns"] = cols;
  meta["pca"] = "pca.txt";
  meta["provenance"] = b.extra.is_null() ? json::object() : b.extra;
  io::write_text(dir / "pca.txt", pca_to_text(b.pca));

  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SvmModel>) {
          meta["kind"] = "svm";
          meta["hyperparameters"] = {{"sigma", m.sigma}, {"C", m.C}};
          meta["bias"] = m.bias;
          io::write_text(dir / "support_vectors.txt", io::matrix_to_text(m.support_vectors));
          io::write_text(dir / "dual_coef.txt", io::matrix_to_text(m.dual_coef));
        } else if constexpr (std::is_same_v<M, KnnModel>) {
          meta["kind"] = "knn";
          meta["hyperparameters"] = {{"k", m.k}, {"distance", "euclidean"}};
          io::write_text(dir / "train.txt", io::matrix_to_text(m.train));
          Matrix lab(static_cast<Eigen::Index>(m.labels.size()), 1);
          for (std::size_t i = 0; i < m.labels.size(); ++i)
            lab(static_cast<Eigen::Index>(i), 0) = m.labels[i] == Level::high ? 1.0 : 0.0;
          io::write_text(dir / "labels.txt", io::matrix_to_text(lab));
        } else {
          meta["kind"] = "ann";
          std::vector<Eigen::Index> sizes = m.layer_sizes();
          meta["hyperparameters"] = {{"layer_sizes", sizes}, {"hidden_activation", "relu"},
                                     {"output_activation", "sigmoid"}};
          for (std::size_t l = 0; l < m.weights.size(); ++l) {
            io::write_text(dir / ("weights_" + std::to_string(l) + ".txt"), io::matrix_to_text(m.weights[l]));
            io::write_text(dir / ("biases_" + std::to_string(l) + ".txt"), io::matrix_to_text(m.biases[l]));
          }
        }
      },
      b.model);
  io::write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

inline ModelBundle load_bundle(const std::filesystem::path& dir) {
  using nlohmann::json;
  const auto meta_path = dir / "metadata.json";
  json meta;
  try {
    meta = json::parse(io::read_text(meta_path));
  } catch (const json::exception& e) {
    throw InputError(meta_path.string() + ": " + e.what());
  }
  auto mat = [&](const std::string& name) {
    const auto p = dir / name;
    return io::matrix_from_text(io::read_text(p), p.string());
  };
  try {
    if (meta.at("format") != "eegemo-model") throw InputError(meta_path.string() + ": not a model bundle");
    ModelBundle b;
    for (const auto& c : meta.at("feature_columns")) b.columns.push_back(parse_column(c.get<std::string>()));
    b.pca = pca_from_text(io::read_text(dir / meta.at("pca").get<std::string>()), (dir / "pca.txt").string());
    b.extra = meta.value("provenance", json::object());
    const auto kind = meta.at("kind").get<std::string>();
    const auto& hp = meta.at("hyperparameters");
    if (kind == "svm") {
      SvmModel m;
      m.sigma = hp.at("sigma").get<double>();
      m.C = hp.at("C").get<double>();
      m.bias = meta.at("bias").get<double>();
      m.support_vectors = mat("support_vectors.txt");
      m.dual_coef = mat("dual_coef.txt").col(0);
      b.model = std::move(m);
    } else if (kind == "knn") {
      KnnModel m;
      m.k = hp.at("k").get<int>();
      m.train = mat("train.txt");
      const Matrix lab = mat("labels.txt");
      for (Eigen::Index i = 0; i < lab.rows(); ++i) m.labels.push_back(lab(i, 0) > 0.5 ? Level::high : Level::low);
      b.model = std::move(m);
    } else if (kind == "ann") {
      AnnModel m;
      const auto sizes = hp.at("layer_sizes").get<std::vector<long long>>();
      for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        m.weights.push_back(mat("weights_" + std::to_string(l) + ".txt"));
        m.biases.push_back(mat("biases_" + std::to_string(l) + ".txt").col(0));
      }
      b.model = std::move(m);
    } else {
      throw InputError(meta_path.string() + ": unknown model kind '" + kind + "'");
    }
    return b;
  } catch (const json::exception& e) {
    throw InputError(meta_path.string() + ": " + e.what());
  }
}

}  // namespace eegemo
