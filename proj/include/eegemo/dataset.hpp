#pragma once

#include "bands.hpp"
#include "core.hpp"
#include "io_util.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace eegemo {

/// One participant-trial multichannel EEG segment, channels by time.
struct Recording {
  int participant_id = 0;
  int trial_id = 0;
  RowMatrix samples;
  double sampling_rate_hz = 0.0;
  std::vector<std::string> channel_names;

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }

  std::string identity() const {
    return "participant " + std::to_string(participant_id) + " trial " + std::to_string(trial_id);
  }

  void validate() const {
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz))
      throw InputError(identity() + ": sampling rate must be positive");
    if (static_cast<Eigen::Index>(channel_names.size()) != samples.rows())
      throw InputError(identity() + ": " + std::to_string(channel_names.size()) +
                       " channel names for " + std::to_string(samples.rows()) + " channel rows");
  }
};

struct RatingRecord {
  int participant_id = 0;
  int trial_id = 0;
  double valence = 0.0;
  double arousal = 0.0;
};

enum class Dimension { arousal, valence };
enum class Level { low = 0, high = 1 };

struct BinaryLabel {
  Dimension dimension;
  Level value;
  friend bool operator==(const BinaryLabel&, const BinaryLabel&) = default;
};

inline std::string_view dimension_name(Dimension d) {
  return d == Dimension::arousal ? "arousal" : "valence";
}

inline Dimension parse_dimension(std::string_view name) {
  if (name == "arousal") return Dimension::arousal;
  if (name == "valence") return Dimension::valence;
  throw ConfigError("unknown dimension '" + std::string(name) + "'");
}

inline constexpr double kRatingMin = 1.0;
inline constexpr double kRatingMax = 9.0;
inline constexpr double kHighThreshold = 4.5;

/// High iff the rating is strictly greater than 4.5.
inline Level binarize(double rating) {
  if (!(rating >= kRatingMin && rating <= kRatingMax))
    throw InputError("rating " + io::format_double(rating) + " outside [1, 9]");
  return rating > kHighThreshold ? Level::high : Level::low;
}

inline BinaryLabel label_of(const RatingRecord& r, Dimension d) {
  return {d, binarize(d == Dimension::arousal ? r.arousal : r.valence)};
}

inline const std::array<std::string, 10>& study_channels() {
  static const std::array<std::string, 10> names{"F3", "F4", "F7", "F8", "FC1",
                                                 "FC2", "FC5", "FC6", "FP1", "FP2"};
  return names;
}

inline const std::array<std::pair<std::string, std::string>, 5>& study_channel_pairs() {
  static const std::array<std::pair<std::string, std::string>, 5> pairs{{
      {"F3", "F4"}, {"F7", "F8"}, {"FC1", "FC2"}, {"FC5", "FC6"}, {"FP1", "FP2"}}};
  return pairs;
}

inline std::string canonical_channel(std::string_view label) {
  std::string out(label);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

/// Ordered, duplicate-free subset of the ten study channels.
class ChannelSelection {
public:
  explicit ChannelSelection(const std::vector<std::string>& labels) {
    if (labels.empty()) throw ConfigError("channel selection is empty");
    for (const auto& raw : labels) {
      auto label = canonical_channel(raw);
      const auto& study = study_channels();
      if (std::find(study.begin(), study.end(), label) == study.end())
        throw ConfigError("unknown channel '" + raw + "'");
      if (std::find(labels_.begin(), labels_.end(), label) != labels_.end())
        throw ConfigError("duplicate channel '" + raw + "'");
      labels_.push_back(std::move(label));
    }
  }

  static ChannelSelection all_study() {
    return ChannelSelection({study_channels().begin(), study_channels().end()});
  }

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

private:
  std::vector<std::string> labels_;
};

inline Recording select_channels(const Recording& rec, const ChannelSelection& selection) {
  std::vector<Eigen::Index> rows;
  for (const auto& want : selection.labels()) {
    auto it = std::find_if(rec.channel_names.begin(), rec.channel_names.end(),
                           [&](const std::string& have) { return canonical_channel(have) == want; });
    if (it == rec.channel_names.end())
      throw InputError(rec.identity() + ": unknown channel '" + want + "'");
    rows.push_back(it - rec.channel_names.begin());
  }
  Recording out;
  out.participant_id = rec.participant_id;
  out.trial_id = rec.trial_id;
  out.sampling_rate_hz = rec.sampling_rate_hz;
  out.samples.resize(static_cast<Eigen::Index>(rows.size()), rec.length());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.samples.row(static_cast<Eigen::Index>(i)) = rec.samples.row(rows[i]);
    out.channel_names.push_back(selection.labels()[i]);
  }
  return out;
}

struct Trial {
  Recording recording;
  RatingRecord rating;
};

using Dataset = std::vector<Trial>;

inline std::vector<int> participant_ids(const Dataset& data) {
  std::set<int> ids;
  for (const auto& t : data) ids.insert(t.recording.participant_id);
  return {ids.begin(), ids.end()};
}

// ---------------------------------------------------------------------------
// On-disk layout
//
//   <dir>/manifest.json   format tag, sampling rate, channel names, ratings
//                         file name, and per participant the signal file and
//                         the ordered list of trials with their sample counts
//   <dir>/<signal>.f32    little-endian float32; trials back to back in
//                         manifest order, each stored channel-major
//                         (all samples of channel 0, then channel 1, ...)
//   <dir>/ratings.csv     header participant,trial,valence,arousal
// ---------------------------------------------------------------------------

inline constexpr const char* kDatasetFormat = "eegemo-dataset";

inline std::vector<RatingRecord> parse_ratings(const std::string& text, const std::string& path) {
  std::vector<RatingRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  do {
    if (!std::getline(in, line)) throw InputError(path + ": empty ratings table");
    ++lineno;
  } while (!line.empty() && line[0] == '#');
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "participant,trial,valence,arousal")
    throw InputError(path + ": expected header participant,trial,valence,arousal");
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto f = io::split(line, ',');
    const std::string ctx = path + ":" + std::to_string(lineno);
    if (f.size() != 4) throw InputError(ctx + ": expected 4 fields");
    RatingRecord r;
    r.participant_id = static_cast<int>(io::parse_int(f[0], ctx));
    r.trial_id = static_cast<int>(io::parse_int(f[1], ctx));
    r.valence = io::parse_double(f[2], ctx);
    r.arousal = io::parse_double(f[3], ctx);
    for (double v : {r.valence, r.arousal})
      if (!(v >= kRatingMin && v <= kRatingMax))
        throw InputError(ctx + ": participant " + std::to_string(r.participant_id) + " trial " +
                         std::to_string(r.trial_id) + ": rating " + io::format_double(v) +
                         " outside [1, 9]");
    out.push_back(r);
  }
  return out;
}

inline Dataset load_dataset(const std::filesystem::path& manifest_path) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  if (!fs::exists(manifest_path)) throw InputError("missing manifest " + manifest_path.string());
  const fs::path dir = manifest_path.parent_path();
  json m;
  try {
    m = json::parse(io::read_text(manifest_path));
  } catch (const json::exception& e) {
    throw InputError(manifest_path.string() + ": " + e.what());
  }
  try {
    if (m.value("format", "") != kDatasetFormat)
      throw InputError(manifest_path.string() + ": not an " + kDatasetFormat + " manifest");
    const double rate = m.at("sampling_rate_hz").get<double>();
    const auto channels = m.at("channel_names").get<std::vector<std::string>>();
    if (channels.empty()) throw InputError(manifest_path.string() + ": no channels");

    const fs::path ratings_path = dir / m.at("ratings").get<std::string>();
    if (!fs::exists(ratings_path)) throw InputError("missing ratings file " + ratings_path.string());
    std::map<std::pair<int, int>, RatingRecord> ratings;
    for (const auto& r : parse_ratings(io::read_text(ratings_path), ratings_path.string()))
      ratings[{r.participant_id, r.trial_id}] = r;

    Dataset data;
    const auto nch = static_cast<Eigen::Index>(channels.size());
    for (const auto& p : m.at("participants")) {
      const int pid = p.at("id").get<int>();
      const fs::path signal_path = dir / p.at("signal").get<std::string>();
      if (!fs::exists(signal_path)) throw InputError("missing signal file " + signal_path.string());
      const std::string bytes = io::read_text(signal_path);
      std::size_t offset = 0;
      for (const auto& t : p.at("trials")) {
        const int tid = t.at("trial").get<int>();
        const auto len = t.at("samples").get<long long>();
        Recording rec;
        rec.participant_id = pid;
        rec.trial_id = tid;
        rec.sampling_rate_hz = rate;
        rec.channel_names = channels;
        if (len <= 0) throw InputError(rec.identity() + ": non-positive sample count");
        const std::size_t need = static_cast<std::size_t>(nch * len) * 4;
        if (offset + need > bytes.size())
          throw InputError(rec.identity() + ": channel-count mismatch, " + signal_path.string() +
                           " holds fewer samples than " + std::to_string(nch) + " channels x " +
                           std::to_string(len));
        rec.samples.resize(nch, len);
        const char* base = bytes.data() + offset;
        for (Eigen::Index c = 0; c < nch; ++c)
          for (Eigen::Index s = 0; s < len; ++s)
            rec.samples(c, s) = io::read_f32le(base + 4 * (c * len + s));
        offset += need;
        rec.validate();
        auto it = ratings.find({pid, tid});
        if (it == ratings.end()) throw InputError(rec.identity() + ": trial without rating");
        data.push_back({std::move(rec), it->second});
      }
      if (offset != bytes.size())
        throw InputError("participant " + std::to_string(pid) + ": channel-count mismatch, " +
                         signal_path.string() + " has " + std::to_string(bytes.size() - offset) +
                         " trailing bytes");
    }
    return data;
  } catch (const json::exception& e) {
    throw InputError(manifest_path.string() + ": " + e.what());
  }
}

/// Writes `data` in the layout read by load_dataset. All trials must share
/// sampling rate and channel names. Samples are stored as float32.
/// `provenance` is copied into the manifest and, as a comment line, into the
/// ratings table.
inline void save_dataset(const std::filesystem::path& dir, const Dataset& data,
                         const nlohmann::json& provenance = {}) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  if (data.empty()) throw InputError("refusing to save an empty dataset");
  const auto& first = data.front().recording;
  for (const auto& t : data) {
    t.recording.validate();
    if (t.recording.sampling_rate_hz != first.sampling_rate_hz ||
        t.recording.channel_names != first.channel_names)
      throw InputError(t.recording.identity() + ": rate/channels differ from the first trial");
  }
  fs::create_directories(dir);

  std::map<int, std::vector<const Trial*>> by_participant;
  for (const auto& t : data) by_participant[t.recording.participant_id].push_back(&t);

  json manifest;
  manifest["format"] = kDatasetFormat;
  manifest["version"] = 1;
  manifest["sampling_rate_hz"] = first.sampling_rate_hz;
  manifest["channel_names"] = first.channel_names;
  manifest["ratings"] = "ratings.csv";
  manifest["participants"] = json::array();
  std::string ratings;
  if (!provenance.is_null()) {
    manifest["provenance"] = provenance;
    ratings += "# " + provenance.dump() + "\n";
  }
  ratings += "participant,trial,valence,arousal\n";
  for (const auto& [pid, trials] : by_participant) {
    char name[32];
    std::snprintf(name, sizeof(name), "p%03d.f32", pid);
    json p{{"id", pid}, {"signal", name}, {"trials", json::array()}};
    std::string bytes;
    for (const Trial* t : trials) {
      const auto& s = t->recording.samples;
      bytes.reserve(bytes.size() + static_cast<std::size_t>(s.size()) * 4);
      for (Eigen::Index c = 0; c < s.rows(); ++c)
        for (Eigen::Index i = 0; i < s.cols(); ++i) io::append_f32le(bytes, static_cast<float>(s(c, i)));
      p["trials"].push_back({{"trial", t->recording.trial_id}, {"samples", s.cols()}});
      ratings += std::to_string(pid) + "," + std::to_string(t->recording.trial_id) + "," +
                 io::format_double(t->rating.valence) + "," + io::format_double(t->rating.arousal) + "\n";
    }
    io::write_text(dir / name, bytes);
    manifest["participants"].push_back(std::move(p));
  }
  io::write_text(dir / "ratings.csv", ratings);
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

enum class PlantedDimension { arousal, valence, both };

struct SyntheticConfig {
  int participants = 32;
  int trials = 40;
  double duration_s = 60.0;
  double sampling_rate_hz = 128.0;
  Band planted_band = Band::beta;
  PlantedDimension planted_dimension = PlantedDimension::both;
  // Oscillation amplitude of "high" trials relative to "low" trials.
  double amplitude_ratio = 1.5;
  // Oscillation amplitude in low trials, as a multiple of the noise std.
  double base_amplitude = 1.0;
  double noise_std = 10.0;
  // Slow baseline wander below the theta band, as a multiple of the noise std.
  double drift_amplitude = 10.0;

  void validate() const {
    if (participants <= 0) throw ConfigError("synthetic: participants must be positive");
    if (trials < 2) throw ConfigError("synthetic: need at least 2 trials per participant");
    if (!(duration_s > 0.0)) throw ConfigError("synthetic: duration must be positive");
    if (!(sampling_rate_hz > 0.0)) throw ConfigError("synthetic: sampling rate must be positive");
    if (!(amplitude_ratio > 0.0)) throw ConfigError("synthetic: amplitude ratio must be positive");
    if (!(base_amplitude >= 0.0)) throw ConfigError("synthetic: base amplitude must be non-negative");
    if (!(noise_std > 0.0)) throw ConfigError("synthetic: noise std must be positive");
    if (!(drift_amplitude >= 0.0)) throw ConfigError("synthetic: drift amplitude must be non-negative");
    if (planted_band == Band::noise) throw ConfigError("synthetic: cannot plant into the noise band");
    if (nominal_range(planted_band).high_hz > sampling_rate_hz / 2.0)
      throw ConfigError("synthetic: planted band above Nyquist");
    if (std::lround(duration_s * sampling_rate_hz) < 2)
      throw ConfigError("synthetic: trial shorter than two samples");
  }
};

namespace detail {

inline double draw_rating(Rng& rng, Level level) {
  // Two-decimal ratings, strictly above 4.5 for high and at most 4.5 for low.
  const double raw = level == Level::high ? rng.uniform(4.51, 9.0) : rng.uniform(1.0, 4.5);
  return std::round(raw * 100.0) / 100.0;
}

}  // namespace detail

/// Seeded synthetic DEAP-shaped dataset over the ten study channels.
///
/// Every channel is a random DC offset plus a slow (0.2-1 Hz) drift plus
/// white Gaussian noise plus a sum of three sinusoids inside the planted band. High-class trials scale the
/// sinusoid amplitude by `amplitude_ratio`. Each participant has exactly
/// half of its trials in each class, and gets a random overall gain.
inline Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(std::lround(cfg.duration_s * cfg.sampling_rate_hz));
  const auto& names = study_channels();
  const auto nch = static_cast<Eigen::Index>(names.size());
  const auto range = nominal_range(cfg.planted_band);
  const double width = range.high_hz - range.low_hz;

  Dataset data;
  data.reserve(static_cast<std::size_t>(cfg.participants * cfg.trials));
  for (int p = 0; p < cfg.participants; ++p) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(p)));
    const double gain = rng.uniform(0.5, 2.0);

    std::vector<Level> primary(static_cast<std::size_t>(cfg.trials));
    std::vector<Level> secondary(primary.size());
    for (std::size_t t = 0; t < primary.size(); ++t) {
      primary[t] = t < primary.size() / 2 ? Level::high : Level::low;
      secondary[t] = primary[t];
    }
    rng.shuffle(primary);
    rng.shuffle(secondary);

    for (int t = 0; t < cfg.trials; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      Level arousal = primary[ti];
      Level valence = primary[ti];
      Level planted = primary[ti];
      if (cfg.planted_dimension == PlantedDimension::arousal) valence = secondary[ti];
      if (cfg.planted_dimension == PlantedDimension::valence) arousal = secondary[ti];

      Recording rec;
      rec.participant_id = p + 1;
      rec.trial_id = t + 1;
      rec.sampling_rate_hz = cfg.sampling_rate_hz;
      rec.channel_names.assign(names.begin(), names.end());
      rec.samples.resize(nch, n);

      const double amp = cfg.base_amplitude * cfg.noise_std *
                         (planted == Level::high ? cfg.amplitude_ratio : 1.0);
      for (Eigen::Index c = 0; c < nch; ++c) {
        const double offset = rng.uniform(-50.0, 50.0);
        const double drift_freq = rng.uniform(0.2, 1.0);
        const double drift_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double drift_amp = cfg.drift_amplitude * cfg.noise_std;
        std::array<double, 3> freq{}, phase{};
        for (int k = 0; k < 3; ++k) {
          freq[static_cast<std::size_t>(k)] = rng.uniform(range.low_hz + 0.2 * width, range.high_hz - 0.2 * width);
          phase[static_cast<std::size_t>(k)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double time = static_cast<double>(i) / cfg.sampling_rate_hz;
          double osc = 0.0;
          for (std::size_t k = 0; k < 3; ++k)
            osc += std::sin(2.0 * std::numbers::pi * freq[k] * time + phase[k]);
          const double drift = drift_amp * std::sin(2.0 * std::numbers::pi * drift_freq * time + drift_phase);
          const double v = gain * (offset + drift + cfg.noise_std * rng.normal() + amp * osc / std::sqrt(3.0));
          rec.samples(c, i) = static_cast<double>(static_cast<float>(v));
        }
      }

      RatingRecord rating{p + 1, t + 1, detail::draw_rating(rng, valence), detail::draw_rating(rng, arousal)};
      data.push_back({std::move(rec), rating});
    }
  }
  return data;
}

}  // namespace eegemo
