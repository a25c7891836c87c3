#pragma once

#include "dataset.hpp"
#include "features.hpp"
#include "preprocess.hpp"
#include "wavelet.hpp"

#include <optional>
#include <vector>

namespace eegemo {

struct FeatureOptions {
  WindowSpec window;
  ReferenceMode reference = ReferenceMode::channel_mean;
  std::optional<ChannelSelection> channels;  // all ten study channels when empty
};

/// Preprocess, window, decompose and compute entropy/energy for one trial.
inline FeatureMatrix trial_pipeline(const Trial& trial, const FeatureOptions& opts) {
  const auto selection = opts.channels ? *opts.channels : ChannelSelection::all_study();
  Recording rec = select_channels(trial.recording, selection);
  rec = apply_reference(std::move(rec), opts.reference);
  rec = normalize_unit_interval(std::move(rec));
  const auto windowed = window(rec, opts.window);
  const auto dec = decompose(windowed, rec.sampling_rate_hz);
  return trial_features(dec, trial.rating);
}

/// Full feature table (every selected channel and feature band) for a
/// dataset, rows ordered as the dataset's trials.
inline FeatureMatrix extract_features(const Dataset& data, const FeatureOptions& opts) {
  if (data.empty()) throw InputError("empty dataset");
  std::vector<FeatureMatrix> parts(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) parts[i] = trial_pipeline(data[i], opts);
  FeatureMatrix out;
  out.columns = parts.front().columns;
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.columns != out.columns) throw InputError("trials produced different feature columns");
    rows += p.row_count();
  }
  out.values.resize(rows, static_cast<Eigen::Index>(out.columns.size()));
  out.rows.reserve(static_cast<std::size_t>(rows));
  Eigen::Index at = 0;
  for (auto& p : parts) {
    out.values.middleRows(at, p.row_count()) = p.values;
    at += p.row_count();
    out.rows.insert(out.rows.end(), p.rows.begin(), p.rows.end());
  }
  return out;
}

}  // namespace eegemo
