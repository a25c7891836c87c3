#pragma once

#include "dataset.hpp"
#include "eval.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace eegemo {

/// Validated run configuration shared by the CLI subcommands.
///
/// JSON schema (every key optional, unknown keys rejected):
///
///   dataset        path to a dataset manifest.json
///   synthetic      {participants, trials, duration_s, sampling_rate_hz,
///                   planted_band, planted_dimension, amplitude_ratio,
///                   base_amplitude, noise_std, drift_amplitude}
///   windows_s      [4]            window lengths in seconds
///   overlap        0.5
///   reference      "channel_mean" | "common_average"
///   channels       ["F3", ...]    defaults to the ten study channels
///   axis           "bands" | "pairs"
///   axis_values    band names or "F3-F4" style pairs (defaults: all)
///   classifiers    [{"kind": "svm", "sigma": 2, "C": 1, "tol": 0.001},
///                   {"kind": "knn", "k": 5},
///                   {"kind": "ann", "hidden": [32, 16], "batch_size": 32,
///                    "learning_rate": 0.01, "epochs": 200}]
///   dimensions     ["arousal", "valence"]
///   pca_center     true
///   folds          8
///   seed           1
///   threads        0 (EEGEMO_THREADS, else all cores)
///   out            output directory
struct RunConfig {
  std::optional<std::filesystem::path> dataset;
  std::optional<SyntheticConfig> synthetic;
  ExperimentConfig experiment;
  std::string axis_kind = "bands";
  std::filesystem::path out = "eegemo-out";
  nlohmann::json echo;  // canonical form, used for hashing and reports

  std::string hash() const { return hex64(fnv1a(echo.dump())); }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_as(const nlohmann::json& obj, const std::string& key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline ClassifierSpec parse_classifier_spec(const nlohmann::json& j) {
  const std::string where = "classifiers[]";
  if (j.is_string()) return parse_classifier_spec(nlohmann::json{{"kind", j}});
  if (!j.is_object() || !j.contains("kind")) throw ConfigError(where + " needs a 'kind'");
  ClassifierSpec spec;
  spec.kind = parse_classifier(get_as<std::string>(j, "kind", "", where));
  switch (spec.kind) {
    case ClassifierKind::svm:
      reject_unknown(j, {"kind", "sigma", "C", "tol", "max_iterations"}, "svm classifier");
      spec.svm.sigma = get_as(j, "sigma", spec.svm.sigma, where);
      spec.svm.C = get_as(j, "C", spec.svm.C, where);
      spec.svm.tol = get_as(j, "tol", spec.svm.tol, where);
      spec.svm.max_iterations = get_as(j, "max_iterations", spec.svm.max_iterations, where);
      spec.svm.validate();
      break;
    case ClassifierKind::knn:
      reject_unknown(j, {"kind", "k"}, "knn classifier");
      spec.knn.k = get_as(j, "k", spec.knn.k, where);
      spec.knn.validate();
      break;
    case ClassifierKind::ann:
      reject_unknown(j, {"kind", "hidden", "batch_size", "learning_rate", "epochs", "seed"}, "ann classifier");
      spec.ann.hidden = get_as(j, "hidden", spec.ann.hidden, where);
      spec.ann.batch_size = get_as(j, "batch_size", spec.ann.batch_size, where);
      spec.ann.learning_rate = get_as(j, "learning_rate", spec.ann.learning_rate, where);
      spec.ann.epochs = get_as(j, "epochs", spec.ann.epochs, where);
      spec.ann.seed = get_as(j, "seed", spec.ann.seed, where);
      spec.ann.validate();
      break;
  }
  return spec;
}

inline nlohmann::json classifier_echo(const ClassifierSpec& s) {
  switch (s.kind) {
    case ClassifierKind::svm:
      return {{"kind", "svm"}, {"sigma", s.svm.sigma}, {"C", s.svm.C}, {"tol", s.svm.tol},
              {"max_iterations", s.svm.max_iterations}};
    case ClassifierKind::knn:
      return {{"kind", "knn"}, {"k", s.knn.k}};
    case ClassifierKind::ann:
      return {{"kind", "ann"}, {"hidden", s.ann.hidden}, {"batch_size", s.ann.batch_size},
              {"learning_rate", s.ann.learning_rate}, {"epochs", s.ann.epochs}, {"seed", s.ann.seed}};
  }
  return {};
}

inline SyntheticConfig parse_synthetic(const nlohmann::json& j) {
  const std::string where = "synthetic";
  reject_unknown(j, {"participants", "trials", "duration_s", "sampling_rate_hz", "planted_band", "planted_dimension",
                     "amplitude_ratio", "base_amplitude", "noise_std", "drift_amplitude"},
                 where);
  SyntheticConfig s;
  s.participants = get_as(j, "participants", s.participants, where);
  s.trials = get_as(j, "trials", s.trials, where);
  s.duration_s = get_as(j, "duration_s", s.duration_s, where);
  s.sampling_rate_hz = get_as(j, "sampling_rate_hz", s.sampling_rate_hz, where);
  s.planted_band = parse_band(get_as<std::string>(j, "planted_band", "beta", where));
  const auto dim = get_as<std::string>(j, "planted_dimension", "both", where);
  if (dim == "both")
    s.planted_dimension = PlantedDimension::both;
  else if (dim == "arousal")
    s.planted_dimension = PlantedDimension::arousal;
  else if (dim == "valence")
    s.planted_dimension = PlantedDimension::valence;
  else
    throw ConfigError("synthetic.planted_dimension must be arousal, valence or both");
  s.amplitude_ratio = get_as(j, "amplitude_ratio", s.amplitude_ratio, where);
  s.base_amplitude = get_as(j, "base_amplitude", s.base_amplitude, where);
  s.noise_std = get_as(j, "noise_std", s.noise_std, where);
  s.drift_amplitude = get_as(j, "drift_amplitude", s.drift_amplitude, where);
  s.validate();
  return s;
}

inline nlohmann::json synthetic_echo(const SyntheticConfig& s) {
  const char* dim = s.planted_dimension == PlantedDimension::both      ? "both"
                    : s.planted_dimension == PlantedDimension::arousal ? "arousal"
                                                                        : "valence";
  return {{"participants", s.participants},   {"trials", s.trials},
          {"duration_s", s.duration_s},       {"sampling_rate_hz", s.sampling_rate_hz},
          {"planted_band", std::string(band_name(s.planted_band))},
          {"planted_dimension", dim},         {"amplitude_ratio", s.amplitude_ratio},
          {"base_amplitude", s.base_amplitude}, {"noise_std", s.noise_std},
          {"drift_amplitude", s.drift_amplitude}};
}

}  // namespace detail

/// Parses and validates a configuration object. Nothing is computed until
/// validation has passed.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  using nlohmann::json;
  const std::string where = "config";
  detail::reject_unknown(j, {"dataset", "synthetic", "windows_s", "overlap", "reference", "channels", "axis",
                             "axis_values", "classifiers", "dimensions", "pca_center", "folds", "seed", "threads",
                             "out"},
                         where);
  RunConfig rc;
  auto& ex = rc.experiment;
  if (j.contains("dataset")) rc.dataset = detail::get_as<std::string>(j, "dataset", "", where);
  if (j.contains("synthetic")) rc.synthetic = detail::parse_synthetic(j.at("synthetic"));
  if (rc.dataset && rc.synthetic) throw ConfigError("config names both a dataset and a synthetic spec");
  if (!rc.dataset && !rc.synthetic) rc.synthetic = SyntheticConfig{};

  ex.window_lengths_s = detail::get_as(j, "windows_s", ex.window_lengths_s, where);
  if (ex.window_lengths_s.empty()) throw ConfigError("windows_s is empty");
  for (double w : ex.window_lengths_s)
    if (!(w > 0.0)) throw ConfigError("window lengths must be positive");
  ex.overlap = detail::get_as(j, "overlap", ex.overlap, where);
  if (!(ex.overlap >= 0.0 && ex.overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");

  const auto ref = detail::get_as<std::string>(j, "reference", "channel_mean", where);
  if (ref == "channel_mean")
    ex.reference = ReferenceMode::channel_mean;
  else if (ref == "common_average")
    ex.reference = ReferenceMode::common_average;
  else
    throw ConfigError("reference must be channel_mean or common_average");

  if (j.contains("channels"))
    ex.channels = ChannelSelection(detail::get_as<std::vector<std::string>>(j, "channels", {}, where));

  rc.axis_kind = detail::get_as<std::string>(j, "axis", "bands", where);
  std::vector<std::string> axis_values = detail::get_as<std::vector<std::string>>(j, "axis_values", {}, where);
  if (rc.axis_kind == "bands") {
    if (axis_values.empty()) axis_values = {"gamma", "beta", "alpha", "theta"};
    for (const auto& v : axis_values) {
      const Band b = parse_band(v);
      if (b == Band::noise) throw ConfigError("the noise band is not a feature band");
      ex.axis.push_back(AssembleMode::per_band(b));
    }
  } else if (rc.axis_kind == "pairs") {
    if (axis_values.empty())
      for (const auto& [a, b] : study_channel_pairs()) axis_values.push_back(a + "-" + b);
    for (const auto& v : axis_values) {
      const auto parts = io::split(v, '-');
      if (parts.size() != 2) throw ConfigError("channel pair '" + v + "' must look like F3-F4");
      ChannelSelection check({std::string(parts[0]), std::string(parts[1])});
      ex.axis.push_back(AssembleMode::channel_pair(check.labels()[0], check.labels()[1]));
    }
  } else {
    throw ConfigError("axis must be 'bands' or 'pairs'");
  }

  if (j.contains("classifiers")) {
    if (!j.at("classifiers").is_array() || j.at("classifiers").empty())
      throw ConfigError("classifiers must be a non-empty array");
    for (const auto& c : j.at("classifiers")) ex.classifiers.push_back(detail::parse_classifier_spec(c));
  } else {
    for (auto k : {ClassifierKind::svm, ClassifierKind::knn, ClassifierKind::ann}) {
      ClassifierSpec s;
      s.kind = k;
      ex.classifiers.push_back(s);
    }
  }

  ex.dimensions.clear();
  for (const auto& d : detail::get_as<std::vector<std::string>>(j, "dimensions", {"arousal", "valence"}, where))
    ex.dimensions.push_back(parse_dimension(d));
  if (ex.dimensions.empty()) throw ConfigError("dimensions is empty");

  ex.pca.center = detail::get_as(j, "pca_center", true, where);
  ex.folds = detail::get_as(j, "folds", 8, where);
  if (ex.folds < 2) throw ConfigError("folds must be at least 2");
  ex.seed = detail::get_as<std::uint64_t>(j, "seed", 1, where);
  ex.threads = detail::get_as(j, "threads", 0, where);
  rc.out = detail::get_as<std::string>(j, "out", "eegemo-out", where);

  // Canonical echo; thread count and output location do not affect results.
  json echo;
  if (rc.dataset) echo["dataset"] = rc.dataset->string();
  if (rc.synthetic) echo["synthetic"] = detail::synthetic_echo(*rc.synthetic);
  echo["windows_s"] = ex.window_lengths_s;
  echo["overlap"] = ex.overlap;
  echo["reference"] = ref;
  const ChannelSelection selection = ex.channels ? *ex.channels : ChannelSelection::all_study();
  echo["channels"] = std::vector<std::string>(selection.labels().begin(), selection.labels().end());
  echo["axis"] = rc.axis_kind;
  std::vector<std::string> labels;
  for (const auto& a : ex.axis) labels.push_back(a.label());
  echo["axis_values"] = labels;
  echo["classifiers"] = json::array();
  for (const auto& c : ex.classifiers) echo["classifiers"].push_back(detail::classifier_echo(c));
  std::vector<std::string> dims;
  for (auto d : ex.dimensions) dims.emplace_back(dimension_name(d));
  echo["dimensions"] = dims;
  echo["pca_center"] = ex.pca.center;
  echo["folds"] = ex.folds;
  echo["seed"] = ex.seed;
  rc.echo = std::move(echo);
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("missing config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace eegemo
