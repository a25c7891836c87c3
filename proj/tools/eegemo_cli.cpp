// eegemo: batch front end for the EEG emotion-recognition pipeline.
//
//   eegemo synth    --config run.json [--seed N] [--out DIR]
//   eegemo features --config run.json [--seed N] [--out DIR]
//   eegemo evaluate --config run.json [--seed N] [--out DIR] [--export-models]
//   eegemo report   [--out DIR] [--metric accuracy|sensitivity|specificity]
//
// Exit codes: 0 success, 2 invalid configuration, 3 missing or malformed
// input, 4 numerical failure, 1 anything else.

#include "eegemo/config.hpp"
#include "eegemo/eval.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eegemo;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

RunConfig resolve_config(const CommonOptions& opts) {
  json j = json::object();
  if (!opts.config.empty()) {
    if (!fs::exists(opts.config)) throw InputError("missing config file " + opts.config);
    try {
      j = json::parse(io::read_text(opts.config));
    } catch (const json::exception& e) {
      throw ConfigError(opts.config + ": " + e.what());
    }
    // Relative dataset paths resolve against the config file's directory.
    if (j.is_object() && j.contains("dataset") && j["dataset"].is_string()) {
      fs::path p = j["dataset"].get<std::string>();
      if (p.is_relative()) j["dataset"] = (fs::path(opts.config).parent_path() / p).string();
    }
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (opts.seed) j["seed"] = *opts.seed;
  if (opts.out) j["out"] = *opts.out;
  return parse_run_config(j);
}

json provenance(const RunConfig& rc) {
  return {{"config_hash", rc.hash()}, {"seed", rc.experiment.seed}};
}

std::string provenance_comment(const RunConfig& rc) {
  return "config_hash=" + rc.hash() + " seed=" + std::to_string(rc.experiment.seed);
}

Dataset obtain_dataset(const RunConfig& rc) {
  if (rc.dataset) {
    fs::path p = *rc.dataset;
    if (fs::is_directory(p)) p /= "manifest.json";
    return load_dataset(p);
  }
  return generate_synthetic(*rc.synthetic, rc.experiment.seed);
}

std::string dataset_identity(const RunConfig& rc) {
  if (rc.dataset) {
    fs::path p = *rc.dataset;
    if (fs::is_directory(p)) p /= "manifest.json";
    return "dataset:" + hex64(fnv1a(io::read_text(p)));
  }
  return "synthetic:" + rc.echo.at("synthetic").dump() + ":" + std::to_string(rc.experiment.seed);
}

std::string cache_key(const RunConfig& rc, double window_s) {
  json k{{"data", dataset_identity(rc)},
         {"window_s", window_s},
         {"overlap", rc.experiment.overlap},
         {"reference", rc.echo.at("reference")},
         {"channels", rc.echo.at("channels")}};
  return hex64(fnv1a(k.dump()));
}

// Writes into a sibling temp directory then renames, so failures leave no
// partial output behind.
template <typename F>
void write_atomically(const fs::path& target, F&& fill) {
  fs::path tmp = target;
  tmp += ".tmp";
  fs::remove_all(tmp);
  try {
    fill(tmp);
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  fs::remove_all(target);
  fs::create_directories(target.parent_path().empty() ? fs::path(".") : target.parent_path());
  fs::rename(tmp, target);
}

std::vector<FeatureMatrix> cached_feature_tables(const RunConfig& rc, const Dataset* preloaded, bool verbose) {
  std::vector<FeatureMatrix> tables;
  std::optional<Dataset> loaded;
  for (double w : rc.experiment.window_lengths_s) {
    const fs::path dir = rc.out / "features" / ("cache-" + cache_key(rc, w));
    const fs::path file = dir / "all.csv";
    if (fs::exists(file)) {
      if (verbose) std::cerr << "using cached features " << file.string() << "\n";
      tables.push_back(parse_feature_table(io::read_text(file), file.string()));
      continue;
    }
    if (!preloaded && !loaded) loaded = obtain_dataset(rc);
    const Dataset& data = preloaded ? *preloaded : *loaded;
    FeatureOptions opts;
    opts.window = {w, rc.experiment.overlap};
    opts.reference = rc.experiment.reference;
    opts.channels = rc.experiment.channels;
    auto fm = extract_features(data, opts);
    fs::create_directories(dir);
    io::write_text(file, feature_table_text(fm, provenance_comment(rc) + " window_s=" + io::format_double(w)));
    tables.push_back(std::move(fm));
  }
  return tables;
}

int cmd_synth(const CommonOptions& opts) {
  const RunConfig rc = resolve_config(opts);
  if (!rc.synthetic) throw ConfigError("synth needs a 'synthetic' section, not a dataset path");
  const Dataset data = generate_synthetic(*rc.synthetic, rc.experiment.seed);
  json prov = provenance(rc);
  prov["synthetic"] = rc.echo.at("synthetic");
  const fs::path target = rc.out / "dataset";
  write_atomically(target, [&](const fs::path& tmp) { save_dataset(tmp, data, prov); });
  std::cout << "wrote " << data.size() << " trials from " << participant_ids(data).size() << " participants to "
            << (target / "manifest.json").string() << "\n";
  return 0;
}

int cmd_features(const CommonOptions& opts) {
  const RunConfig rc = resolve_config(opts);
  const Dataset data = obtain_dataset(rc);
  const auto tables = cached_feature_tables(rc, &data, false);
  for (std::size_t w = 0; w < tables.size(); ++w) {
    const double len = rc.experiment.window_lengths_s[w];
    for (const auto& mode : rc.experiment.axis) {
      const auto fm = tables[w].select(columns_for(mode, tables[w].columns));
      const fs::path file = rc.out / "features" / ("w" + io::format_double(len) + "_" + mode.label() + ".csv");
      io::write_text(file, feature_table_text(fm, provenance_comment(rc) + " window_s=" + io::format_double(len) +
                                                      " axis=" + mode.label()));
      std::cout << file.string() << ": " << fm.row_count() << " rows x " << fm.column_count() << " features\n";
    }
  }
  return 0;
}

void export_models(const RunConfig& rc, const std::vector<FeatureMatrix>& tables) {
  const auto& ex = rc.experiment;
  for (std::size_t w = 0; w < tables.size(); ++w)
    for (const auto& mode : ex.axis) {
      const auto fm = tables[w].select(columns_for(mode, tables[w].columns));
      const PcaBasis basis = pca_fit(fm.values, ex.pca);
      const RowMatrix z = pca_transform(fm.values, basis);
      for (std::size_t c = 0; c < ex.classifiers.size(); ++c)
        for (Dimension d : ex.dimensions) {
          std::vector<Level> y;
          for (const auto& r : fm.rows) y.push_back(r.label(d));
          ModelBundle b{train_classifier(ex.classifiers[c], z, y), basis, fm.columns, provenance(rc)};
          b.extra["window_s"] = ex.window_lengths_s[w];
          b.extra["axis_value"] = mode.label();
          b.extra["dimension"] = std::string(dimension_name(d));
          const std::string name = "w" + io::format_double(ex.window_lengths_s[w]) + "_" + mode.label() + "_" +
                                   std::string(dimension_name(d)) + "_" + classifier_label(ex.classifiers[c]) +
                                   "_" + std::to_string(c);
          save_bundle(rc.out / "models" / name, b);
        }
    }
}

int cmd_evaluate(const CommonOptions& opts, bool export_bundles) {
  const RunConfig rc = resolve_config(opts);
  const auto t0 = std::chrono::steady_clock::now();
  const auto tables = cached_feature_tables(rc, nullptr, true);
  const auto report = run_experiment_on_features(tables, rc.experiment);

  const fs::path dir = rc.out / "report";
  fs::create_directories(dir);
  const std::string comment = provenance_comment(rc);
  for (const char* metric : {"accuracy", "sensitivity", "specificity"})
    io::write_text(dir / (std::string("table_") + metric + ".csv"),
                   report_table_text(report, rc.experiment, comment, metric));
  json j = report_json(report);
  j["config_hash"] = rc.hash();
  j["config"] = rc.echo;
  io::write_text(dir / "report.json", j.dump(2) + "\n");
  if (export_bundles) export_models(rc, tables);

  std::cout << report_table_text(report, rc.experiment, comment);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "report written to " << dir.string() << " (" << fixed(secs, 1) << " s)\n";
  return 0;
}

int cmd_report(const std::string& out, const std::string& metric) {
  const fs::path file = fs::path(out) / "report" / "report.json";
  if (!fs::exists(file)) throw InputError("missing report " + file.string() + " (run evaluate first)");
  if (metric != "accuracy" && metric != "sensitivity" && metric != "specificity")
    throw ConfigError("metric must be accuracy, sensitivity or specificity");
  json j;
  try {
    j = json::parse(io::read_text(file));
  } catch (const json::exception& e) {
    throw InputError(file.string() + ": " + e.what());
  }
  // Rebuild the grid from the cells: rows (window, classifier, dimension),
  // columns axis values in first-seen order.
  std::vector<std::string> axis;
  std::vector<std::tuple<double, std::string, std::string>> rows;
  std::map<std::tuple<double, std::string, std::string, std::string>, json> values;
  for (const auto& c : j.at("cells")) {
    const double w = c.at("window_s").get<double>();
    const auto cls = c.at("classifier").get<std::string>();
    const auto dim = c.at("dimension").get<std::string>();
    const auto ax = c.at("axis_value").get<std::string>();
    if (std::find(axis.begin(), axis.end(), ax) == axis.end()) axis.push_back(ax);
    const auto key = std::make_tuple(w, cls, dim);
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    values[{w, cls, dim, ax}] = c.at("mean_" + metric);
  }
  std::cout << "# config_hash=" << j.value("config_hash", "") << " seed=" << j.at("seed").get<std::uint64_t>()
            << "\n# cross-validated " << metric << " (%)\nwindow_s,row";
  for (const auto& a : axis) std::cout << "," << a;
  std::cout << "\n";
  for (const auto& [w, cls, dim] : rows) {
    std::cout << io::format_double(w) << "," << row_label(parse_dimension(dim), cls);
    for (const auto& a : axis) {
      auto it = values.find({w, cls, dim, a});
      std::cout << "," << (it == values.end() || it->second.is_null() ? std::string("NA")
                                                                       : fixed(100.0 * it->second.get<double>(), 2));
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG emotion recognition: DWT features, PCA, SVM/KNN/ANN with grouped cross-validation"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::uint64_t seed = 0;
  std::string out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON run configuration");
    sub->add_option("--seed", seed, "seed (overrides the config file)");
    sub->add_option("--out", out, "output directory (overrides the config file)");
  };
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset on disk");
  add_common(synth);
  auto* features = app.add_subcommand("features", "compute feature tables");
  add_common(features);
  auto* evaluate = app.add_subcommand("evaluate", "cross-validate classifiers and write the report");
  add_common(evaluate);
  bool export_bundles = false;
  evaluate->add_flag("--export-models", export_bundles, "also fit every cell on all data and save model bundles");
  auto* report = app.add_subcommand("report", "print a table from an existing report");
  std::string report_out = "eegemo-out";
  std::string metric = "accuracy";
  report->add_option("--out", report_out, "output directory holding report/report.json");
  report->add_option("--metric", metric, "accuracy, sensitivity or specificity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto* sub : {synth, features, evaluate}) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) opts.seed = seed;
      if (sub->count("--out")) opts.out = out;
    }
    if (synth->parsed()) return cmd_synth(opts);
    if (features->parsed()) return cmd_features(opts);
    if (evaluate->parsed()) return cmd_evaluate(opts, export_bundles);
    if (report->parsed()) return cmd_report(report_out, metric);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
