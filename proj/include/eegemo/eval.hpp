#pragma once

#include "core.hpp"
#include "features.hpp"
#include "models.hpp"
#include "pca.hpp"
#include "pipeline.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace eegemo {

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

struct FoldPlan {
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> folds;

  int fold_of(int participant) const {
    for (std::size_t f = 0; f < folds.size(); ++f)
      if (std::find(folds[f].begin(), folds[f].end(), participant) != folds[f].end()) return static_cast<int>(f);
    return -1;
  }
};

/// Seeded shuffle of the participant ids followed by a contiguous split
/// into k equal folds.
inline FoldPlan make_folds(std::vector<int> participants, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("need at least 2 folds");
  std::sort(participants.begin(), participants.end());
  if (std::adjacent_find(participants.begin(), participants.end()) != participants.end())
    throw InputError("duplicate participant id");
  const auto n = static_cast<int>(participants.size());
  if (n == 0 || n % k != 0)
    throw ConfigError(std::to_string(n) + " participants cannot be split into " + std::to_string(k) +
                      " equal folds (remainder " + std::to_string(k ? n % k : 0) +
                      "); uneven folds are not supported");
  Rng rng(mix_seed(seed, 0xF01D));
  rng.shuffle(participants);
  FoldPlan plan;
  plan.seed = seed;
  const int per = n / k;
  for (int f = 0; f < k; ++f)
    plan.folds.emplace_back(participants.begin() + f * per, participants.begin() + (f + 1) * per);
  return plan;
}

// ---------------------------------------------------------------------------
// Metrics ("high" is the positive class)
// ---------------------------------------------------------------------------

struct MetricSet {
  double accuracy = 0.0;
  std::optional<double> sensitivity;  // undefined without positive labels
  std::optional<double> specificity;  // undefined without negative labels
  long long tp = 0, tn = 0, fp = 0, fn = 0;
};

inline MetricSet metrics_from_counts(long long tp, long long tn, long long fp, long long fn) {
  MetricSet m;
  m.tp = tp;
  m.tn = tn;
  m.fp = fp;
  m.fn = fn;
  const long long total = tp + tn + fp + fn;
  if (total == 0) throw InputError("metrics: empty input");
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
  if (tp + fn > 0) m.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (tn + fp > 0) m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return m;
}

inline MetricSet compute_metrics(std::span<const Level> predictions, std::span<const Level> labels) {
  if (predictions.size() != labels.size()) throw InputError("metrics: prediction/label length mismatch");
  if (predictions.empty()) throw InputError("metrics: empty input");
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == Level::high;
    const bool t = labels[i] == Level::high;
    tp += p && t;
    tn += !p && !t;
    fp += p && !t;
    fn += !p && t;
  }
  return metrics_from_counts(tp, tn, fp, fn);
}

// ---------------------------------------------------------------------------
// Experiment
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::vector<double> window_lengths_s{4.0};
  double overlap = 0.5;
  ReferenceMode reference = ReferenceMode::channel_mean;
  std::optional<ChannelSelection> channels;
  std::vector<AssembleMode> axis;
  std::vector<ClassifierSpec> classifiers;
  std::vector<Dimension> dimensions{Dimension::arousal, Dimension::valence};
  PcaOptions pca;
  int folds = 8;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: EEGEMO_THREADS or hardware concurrency
};

inline std::vector<AssembleMode> band_axis(const std::vector<Band>& bands = {Band::gamma, Band::beta, Band::alpha, Band::theta}) {
  std::vector<AssembleMode> out;
  for (Band b : bands) out.push_back(AssembleMode::per_band(b));
  return out;
}

inline std::vector<AssembleMode> pair_axis() {
  std::vector<AssembleMode> out;
  for (const auto& [a, b] : study_channel_pairs()) out.push_back(AssembleMode::channel_pair(a, b));
  return out;
}

inline std::string classifier_label(const ClassifierSpec& spec) { return std::string(classifier_name(spec.kind)); }

struct FoldResult {
  int fold = 0;
  MetricSet metrics;
  Eigen::Index train_rows = 0;
  Eigen::Index test_rows = 0;
  double train_high_fraction = 0.0;
  double test_high_fraction = 0.0;
  std::uint64_t train_checksum = 0;
  std::uint64_t test_checksum = 0;
};

struct CellResult {
  std::string classifier;
  std::size_t classifier_index = 0;
  Dimension dimension = Dimension::arousal;
  std::string axis_value;
  double window_s = 4.0;
  std::vector<FoldResult> folds;
  MetricSet pooled;          // from summed confusion counts
  double mean_accuracy = 0;  // headline: mean of per-fold accuracies
  std::optional<double> mean_sensitivity;
  std::optional<double> mean_specificity;
};

struct ExperimentReport {
  FoldPlan plan;
  std::vector<CellResult> cells;
  std::uint64_t seed = 0;

  const CellResult& cell(std::string_view classifier, Dimension d, std::string_view axis_value,
                         double window_s) const {
    for (const auto& c : cells)
      if (c.classifier == classifier && c.dimension == d && c.axis_value == axis_value && c.window_s == window_s)
        return c;
    throw InputError("no report cell " + std::string(classifier) + "/" + std::string(dimension_name(d)) + "/" +
                     std::string(axis_value));
  }
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EEGEMO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs job(i) for i in [0, count) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(count))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const auto i = next.fetch_add(1);
        if (i >= count) return;
        {
          std::lock_guard lock(error_mutex);
          if (error) return;
        }
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

namespace detail {

inline std::uint64_t row_hash(const RowMatrix& m, Eigen::Index r) {
  return fnv1a(m.data() + r * m.cols(), static_cast<std::size_t>(m.cols()) * sizeof(double));
}

inline RowMatrix take_rows(const RowMatrix& m, const std::vector<Eigen::Index>& idx) {
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

struct FoldSplit {
  std::vector<Eigen::Index> train, test;
};

inline FoldSplit split_rows(const FeatureMatrix& fm, const FoldPlan& plan, std::size_t fold) {
  const std::set<int> test_ids(plan.folds[fold].begin(), plan.folds[fold].end());
  FoldSplit s;
  for (std::size_t r = 0; r < fm.rows.size(); ++r)
    (test_ids.count(fm.rows[r].participant_id) ? s.test : s.train).push_back(static_cast<Eigen::Index>(r));
  return s;
}

// Guards the fit inputs: train and test participants and rows are disjoint,
// and the fit input is exactly the train rows. Returns (train checksum, test
// checksum).
inline std::pair<std::uint64_t, std::uint64_t> check_leakage(const FeatureMatrix& fm, const FoldSplit& split,
                                                             const RowMatrix& fit_input) {
  std::set<int> train_ids, test_ids;
  for (auto r : split.train) train_ids.insert(fm.rows[static_cast<std::size_t>(r)].participant_id);
  for (auto r : split.test) test_ids.insert(fm.rows[static_cast<std::size_t>(r)].participant_id);
  for (int id : test_ids)
    if (train_ids.count(id)) throw Error("leakage: participant " + std::to_string(id) + " in train and test");
  const std::set<Eigen::Index> test_rows(split.test.begin(), split.test.end());
  for (auto r : split.train)
    if (test_rows.count(r)) throw Error("leakage: row " + std::to_string(r) + " in train and test");
  if (fit_input.rows() != static_cast<Eigen::Index>(split.train.size()))
    throw Error("leakage: fit input does not match the train split");
  std::uint64_t test_sum = 0, train_sum = 0;
  for (auto r : split.test) test_sum ^= mix_seed(row_hash(fm.values, r), static_cast<std::uint64_t>(r));
  for (Eigen::Index k = 0; k < fit_input.rows(); ++k) {
    const auto r = split.train[static_cast<std::size_t>(k)];
    const auto h = row_hash(fit_input, k);
    if (h != row_hash(fm.values, r)) throw Error("leakage: fit input row " + std::to_string(k) + " is not a train row");
    train_sum ^= mix_seed(h, static_cast<std::uint64_t>(r));
  }
  return {train_sum, test_sum};
}

}  // namespace detail

inline void finalize_cell(CellResult& cell) {
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  double acc = 0.0, sens = 0.0, spec = 0.0;
  int n_sens = 0, n_spec = 0;
  for (const auto& f : cell.folds) {
    tp += f.metrics.tp;
    tn += f.metrics.tn;
    fp += f.metrics.fp;
    fn += f.metrics.fn;
    acc += f.metrics.accuracy;
    if (f.metrics.sensitivity) sens += *f.metrics.sensitivity, ++n_sens;
    if (f.metrics.specificity) spec += *f.metrics.specificity, ++n_spec;
  }
  cell.pooled = metrics_from_counts(tp, tn, fp, fn);
  cell.mean_accuracy = acc / static_cast<double>(cell.folds.size());
  cell.mean_sensitivity = n_sens ? std::optional<double>(sens / n_sens) : std::nullopt;
  cell.mean_specificity = n_spec ? std::optional<double>(spec / n_spec) : std::nullopt;
}

/// Cross-validates every (window length, axis value, classifier, dimension)
/// cell given precomputed full feature tables, one per window length.
inline ExperimentReport run_experiment_on_features(const std::vector<FeatureMatrix>& tables,
                                                   const ExperimentConfig& cfg) {
  if (tables.size() != cfg.window_lengths_s.size()) throw InputError("one feature table per window length");
  if (cfg.axis.empty()) throw ConfigError("experiment axis is empty");
  if (cfg.classifiers.empty()) throw ConfigError("no classifiers configured");
  if (cfg.dimensions.empty()) throw ConfigError("no label dimensions configured");

  std::set<int> ids;
  for (const auto& t : tables)
    for (const auto& r : t.rows) ids.insert(r.participant_id);
  ExperimentReport report;
  report.seed = cfg.seed;
  report.plan = make_folds({ids.begin(), ids.end()}, cfg.folds, cfg.seed);

  // Job = (window, axis value, fold); each job fits one PCA and every
  // classifier for every dimension.
  struct Job {
    std::size_t window, axis, fold;
  };
  std::vector<Job> jobs;
  for (std::size_t w = 0; w < tables.size(); ++w)
    for (std::size_t a = 0; a < cfg.axis.size(); ++a)
      for (std::size_t f = 0; f < report.plan.folds.size(); ++f) jobs.push_back({w, a, f});

  const std::size_t per_job = cfg.classifiers.size() * cfg.dimensions.size();
  std::vector<FoldResult> results(jobs.size() * per_job);

  std::vector<std::vector<FeatureMatrix>> selected(tables.size());
  for (std::size_t w = 0; w < tables.size(); ++w)
    for (const auto& mode : cfg.axis) selected[w].push_back(tables[w].select(columns_for(mode, tables[w].columns)));

  parallel_for(jobs.size(), resolve_threads(cfg.threads), [&](std::size_t ji) {
    const auto& job = jobs[ji];
    const FeatureMatrix& fm = selected[job.window][job.axis];
    const std::string where = "window " + io::format_double(cfg.window_lengths_s[job.window]) + " s, " +
                              cfg.axis[job.axis].label() + ", fold " + std::to_string(job.fold + 1);
    try {
      const auto split = detail::split_rows(fm, report.plan, job.fold);
      if (split.train.empty() || split.test.empty()) throw InputError("empty train or test fold");
      const RowMatrix train_raw = detail::take_rows(fm.values, split.train);
      const RowMatrix test_raw = detail::take_rows(fm.values, split.test);
      const auto [train_sum, test_sum] = detail::check_leakage(fm, split, train_raw);
      const PcaBasis basis = pca_fit(train_raw, cfg.pca);
      const RowMatrix train = pca_transform(train_raw, basis);
      const RowMatrix test = pca_transform(test_raw, basis);

      for (std::size_t d = 0; d < cfg.dimensions.size(); ++d) {
        const Dimension dim = cfg.dimensions[d];
        std::vector<Level> ytrain, ytest;
        for (auto r : split.train) ytrain.push_back(fm.rows[static_cast<std::size_t>(r)].label(dim));
        for (auto r : split.test) ytest.push_back(fm.rows[static_cast<std::size_t>(r)].label(dim));
        auto high_fraction = [](const std::vector<Level>& v) {
          return static_cast<double>(std::count(v.begin(), v.end(), Level::high)) / static_cast<double>(v.size());
        };
        for (std::size_t c = 0; c < cfg.classifiers.size(); ++c) {
          ClassifierSpec spec = cfg.classifiers[c];
          spec.ann.seed = mix_seed(mix_seed(cfg.seed, spec.ann.seed), ji * 131 + d * 17 + c);
          const auto model = train_classifier(spec, train, ytrain);
          const auto pred = predict_batch(model, test);
          FoldResult fr;
          fr.fold = static_cast<int>(job.fold);
          fr.metrics = compute_metrics(pred, ytest);
          fr.train_rows = train.rows();
          fr.test_rows = test.rows();
          fr.train_high_fraction = high_fraction(ytrain);
          fr.test_high_fraction = high_fraction(ytest);
          fr.train_checksum = train_sum;
          fr.test_checksum = test_sum;
          results[ji * per_job + d * cfg.classifiers.size() + c] = fr;
        }
      }
    } catch (const NumericalError& e) {
      throw NumericalError(where + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  });

  // Assemble cells in a fixed order: window, classifier, dimension, axis.
  for (std::size_t w = 0; w < tables.size(); ++w)
    for (std::size_t c = 0; c < cfg.classifiers.size(); ++c)
      for (std::size_t d = 0; d < cfg.dimensions.size(); ++d)
        for (std::size_t a = 0; a < cfg.axis.size(); ++a) {
          CellResult cell;
          cell.classifier = classifier_label(cfg.classifiers[c]);
          cell.classifier_index = c;
          cell.dimension = cfg.dimensions[d];
          cell.axis_value = cfg.axis[a].label();
          cell.window_s = cfg.window_lengths_s[w];
          for (std::size_t ji = 0; ji < jobs.size(); ++ji)
            if (jobs[ji].window == w && jobs[ji].axis == a)
              cell.folds.push_back(results[ji * per_job + d * cfg.classifiers.size() + c]);
          finalize_cell(cell);
          report.cells.push_back(std::move(cell));
        }
  return report;
}

inline std::vector<FeatureMatrix> feature_tables(const Dataset& data, const ExperimentConfig& cfg) {
  std::vector<FeatureMatrix> tables;
  for (double len : cfg.window_lengths_s) {
    FeatureOptions opts;
    opts.window = {len, cfg.overlap};
    opts.reference = cfg.reference;
    opts.channels = cfg.channels;
    tables.push_back(extract_features(data, opts));
  }
  return tables;
}

inline ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& cfg) {
  return run_experiment_on_features(feature_tables(data, cfg), cfg);
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string row_label(Dimension d, const std::string& classifier) {
  std::string dim(dimension_name(d));
  dim[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(dim[0])));
  return dim + "-" + classifier;
}

/// Accuracy table in the shape of the published tables: one block per
/// window length, rows "<Dimension>-<Classifier>", one column per axis
/// value, cross-validated mean accuracy in percent.
inline std::string report_table_text(const ExperimentReport& r, const ExperimentConfig& cfg,
                                     const std::string& header_comment, const std::string& metric = "accuracy") {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "# cross-validated " + metric + " (%), mean over " + std::to_string(r.plan.folds.size()) + " folds\n";
  out += "window_s,row";
  for (const auto& a : cfg.axis) out += "," + a.label();
  out += "\n";
  for (double w : cfg.window_lengths_s)
    for (std::size_t c = 0; c < cfg.classifiers.size(); ++c)
      for (Dimension d : cfg.dimensions) {
        out += io::format_double(w) + "," + row_label(d, classifier_label(cfg.classifiers[c]));
        for (const auto& a : cfg.axis) {
          const CellResult* cell = nullptr;
          for (const auto& x : r.cells)
            if (x.classifier_index == c && x.dimension == d && x.axis_value == a.label() && x.window_s == w) cell = &x;
          std::optional<double> v;
          if (metric == "accuracy") v = cell->mean_accuracy;
          if (metric == "sensitivity") v = cell->mean_sensitivity;
          if (metric == "specificity") v = cell->mean_specificity;
          out += "," + (v ? fixed(100.0 * *v, 2) : std::string("NA"));
        }
        out += "\n";
      }
  return out;
}

inline nlohmann::json metrics_json(const MetricSet& m) {
  nlohmann::json j{{"accuracy", m.accuracy}, {"tp", m.tp}, {"tn", m.tn}, {"fp", m.fp}, {"fn", m.fn}};
  j["sensitivity"] = m.sensitivity ? nlohmann::json(*m.sensitivity) : nlohmann::json(nullptr);
  j["specificity"] = m.specificity ? nlohmann::json(*m.specificity) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json report_json(const ExperimentReport& r) {
  using nlohmann::json;
  json j;
  j["seed"] = r.seed;
  j["fold_plan"] = {{"seed", r.plan.seed}, {"folds", r.plan.folds}};
  j["cells"] = json::array();
  for (const auto& c : r.cells) {
    json cell{{"classifier", c.classifier},
              {"dimension", std::string(dimension_name(c.dimension))},
              {"axis_value", c.axis_value},
              {"window_s", c.window_s},
              {"mean_accuracy", c.mean_accuracy},
              {"mean_sensitivity", c.mean_sensitivity ? json(*c.mean_sensitivity) : json(nullptr)},
              {"mean_specificity", c.mean_specificity ? json(*c.mean_specificity) : json(nullptr)},
              {"pooled", metrics_json(c.pooled)},
              {"folds", json::array()}};
    for (const auto& f : c.folds)
      cell["folds"].push_back({{"fold", f.fold},
                               {"metrics", metrics_json(f.metrics)},
                               {"train_rows", f.train_rows},
                               {"test_rows", f.test_rows},
                               {"train_high_fraction", f.train_high_fraction},
                               {"test_high_fraction", f.test_high_fraction},
                               {"train_checksum", hex64(f.train_checksum)},
                               {"test_checksum", hex64(f.test_checksum)}});
    j["cells"].push_back(std::move(cell));
  }
  return j;
}

}  // namespace eegemo
