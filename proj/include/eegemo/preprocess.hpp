#pragma once

#include "core.hpp"
#include "dataset.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace eegemo {

enum class ReferenceMode {
  channel_mean,    // subtract each channel's own mean
  common_average,  // subtract the cross-channel average at every sample
};

inline Recording remove_mean(Recording rec) {
  if (rec.length() == 0) throw InputError(rec.identity() + ": empty channel");
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    auto row = rec.samples.row(c);
    row.array() -= row.mean();
  }
  return rec;
}

inline Recording remove_common_average(Recording rec) {
  if (rec.length() == 0 || rec.channels() == 0) throw InputError(rec.identity() + ": empty channel");
  const Eigen::RowVectorXd avg = rec.samples.colwise().mean();
  rec.samples.rowwise() -= avg;
  return rec;
}

inline Recording apply_reference(Recording rec, ReferenceMode mode) {
  return mode == ReferenceMode::channel_mean ? remove_mean(std::move(rec))
                                             : remove_common_average(std::move(rec));
}

/// Per-channel min-max scaling to [0, 1]. A constant channel becomes all
/// zeros and raises a warning.
inline Recording normalize_unit_interval(Recording rec) {
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    auto row = rec.samples.row(c);
    if (row.size() == 0) continue;
    const double lo = row.minCoeff();
    const double hi = row.maxCoeff();
    if (!(hi > lo)) {
      warn(rec.identity() + ": constant channel " + rec.channel_names[static_cast<std::size_t>(c)] +
           " normalized to zeros");
      row.setZero();
      continue;
    }
    row = (row.array() - lo) / (hi - lo);
  }
  return rec;
}

struct WindowSpec {
  double length_seconds = 4.0;
  double overlap_fraction = 0.5;

  Eigen::Index window_samples(double fs) const {
    if (!(length_seconds > 0.0)) throw ConfigError("window length must be positive");
    const auto w = static_cast<Eigen::Index>(std::llround(length_seconds * fs));
    if (w < 2) throw ConfigError("window shorter than 2 samples");
    return w;
  }

  Eigen::Index hop_samples(double fs) const {
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
      throw ConfigError("window overlap must lie in [0, 1)");
    const auto h = static_cast<Eigen::Index>(
        std::llround(static_cast<double>(window_samples(fs)) * (1.0 - overlap_fraction)));
    if (h < 1) throw ConfigError("window hop below one sample");
    return h;
  }
};

/// Overlapping windows of one recording. `windows[c]` is a
/// [window_index x samples] matrix for channel c.
struct WindowedSignal {
  int participant_id = 0;
  int trial_id = 0;
  double sampling_rate_hz = 0.0;
  std::vector<std::string> channel_names;
  std::vector<RowMatrix> windows;
  std::vector<Eigen::Index> starts;
  Eigen::Index window_samples = 0;
  Eigen::Index hop = 0;

  Eigen::Index count() const { return static_cast<Eigen::Index>(starts.size()); }
};

inline Eigen::Index window_count(Eigen::Index n, Eigen::Index w, Eigen::Index hop) {
  return n < w ? 0 : (n - w) / hop + 1;
}

/// Splits every channel into full windows; the trailing partial window is
/// dropped.
inline WindowedSignal window(const Recording& rec, const WindowSpec& spec) {
  const auto w = spec.window_samples(rec.sampling_rate_hz);
  const auto hop = spec.hop_samples(rec.sampling_rate_hz);
  const auto n = rec.length();
  if (n < w)
    throw InputError(rec.identity() + ": trial of " + std::to_string(n) +
                     " samples is shorter than one window of " + std::to_string(w));
  WindowedSignal out;
  out.participant_id = rec.participant_id;
  out.trial_id = rec.trial_id;
  out.sampling_rate_hz = rec.sampling_rate_hz;
  out.channel_names = rec.channel_names;
  out.window_samples = w;
  out.hop = hop;
  const auto count = window_count(n, w, hop);
  for (Eigen::Index k = 0; k < count; ++k) out.starts.push_back(k * hop);
  out.windows.reserve(static_cast<std::size_t>(rec.channels()));
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    RowMatrix m(count, w);
    for (Eigen::Index k = 0; k < count; ++k) m.row(k) = rec.samples.row(c).segment(k * hop, w);
    out.windows.push_back(std::move(m));
  }
  return out;
}

}  // namespace eegemo
