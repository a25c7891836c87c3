#pragma once

#include "bands.hpp"
#include "core.hpp"
#include "dataset.hpp"
#include "io_util.hpp"
#include "wavelet.hpp"

#include <cmath>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace eegemo {

inline void require_finite(std::span<const double> coeffs) {
  for (double c : coeffs)
    if (!std::isfinite(c)) throw NumericalError("non-finite wavelet coefficient");
}

/// Wavelet entropy -sum c^2 ln(c^2) over raw (unnormalized) coefficients,
/// with 0 ln 0 = 0. Can be negative.
inline double entropy(std::span<const double> coeffs) {
  require_finite(coeffs);
  double acc = 0.0;
  for (double c : coeffs) {
    const double p = c * c;
    if (p > 0.0) acc -= p * std::log(p);
  }
  return acc;
}

/// Wavelet energy: sum of squared coefficients.
inline double energy(std::span<const double> coeffs) {
  require_finite(coeffs);
  double acc = 0.0;
  for (double c : coeffs) acc += c * c;
  return acc;
}

inline double entropy(const Vector& v) { return entropy(std::span<const double>(v.data(), static_cast<std::size_t>(v.size()))); }
inline double energy(const Vector& v) { return energy(std::span<const double>(v.data(), static_cast<std::size_t>(v.size()))); }

enum class FeatureKind { entropy, energy };

inline std::string_view feature_kind_name(FeatureKind k) {
  return k == FeatureKind::entropy ? "entropy" : "energy";
}

struct ColumnDescriptor {
  std::string channel;
  Band band;
  FeatureKind kind;

  std::string name() const {
    return channel + "_" + std::string(band_name(band)) + "_" + std::string(feature_kind_name(kind));
  }
  friend bool operator==(const ColumnDescriptor&, const ColumnDescriptor&) = default;
};

inline ColumnDescriptor parse_column(const std::string& name) {
  const auto parts = io::split(name, '_');
  if (parts.size() != 3) throw InputError("bad feature column name '" + name + "'");
  FeatureKind kind;
  if (parts[2] == "entropy")
    kind = FeatureKind::entropy;
  else if (parts[2] == "energy")
    kind = FeatureKind::energy;
  else
    throw InputError("bad feature kind in column '" + name + "'");
  return {std::string(parts[0]), parse_band(parts[1]), kind};
}

struct RowMeta {
  int participant_id = 0;
  int trial_id = 0;
  int window_index = 0;
  Level arousal = Level::low;
  Level valence = Level::low;

  Level label(Dimension d) const { return d == Dimension::arousal ? arousal : valence; }
  friend bool operator==(const RowMeta&, const RowMeta&) = default;
};

/// One row per window; columns are (channel, band, feature kind).
struct FeatureMatrix {
  RowMatrix values;
  std::vector<ColumnDescriptor> columns;
  std::vector<RowMeta> rows;

  Eigen::Index row_count() const { return values.rows(); }
  Eigen::Index column_count() const { return values.cols(); }

  Eigen::Index column_index(const ColumnDescriptor& d) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == d) return static_cast<Eigen::Index>(i);
    return -1;
  }

  FeatureMatrix select(const std::vector<ColumnDescriptor>& wanted) const {
    FeatureMatrix out;
    out.columns = wanted;
    out.rows = rows;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(wanted.size()));
    for (std::size_t j = 0; j < wanted.size(); ++j) {
      const auto src = column_index(wanted[j]);
      if (src < 0) throw InputError("feature column " + wanted[j].name() + " absent");
      out.values.col(static_cast<Eigen::Index>(j)) = values.col(src);
    }
    return out;
  }

  void validate() const {
    if (static_cast<Eigen::Index>(columns.size()) != values.cols())
      throw InputError("feature matrix: descriptor count does not match columns");
    if (static_cast<Eigen::Index>(rows.size()) != values.rows())
      throw InputError("feature matrix: metadata count does not match rows");
    std::set<std::string> seen;
    for (const auto& c : columns)
      if (!seen.insert(c.name()).second) throw InputError("feature matrix: duplicate column " + c.name());
    if (!values.allFinite()) throw NumericalError("feature matrix: non-finite entry");
  }
};

/// Entropy and energy of every channel and every feature band present, for
/// every window of one trial. Columns are channel-major, then band
/// (theta..gamma), then entropy before energy.
inline FeatureMatrix trial_features(const BandDecomposition& dec, const RatingRecord& rating) {
  FeatureMatrix out;
  std::vector<Band> bands;
  for (Band b : kFeatureBands)
    if (dec.levels.has(b)) bands.push_back(b);
  for (const auto& ch : dec.channel_names)
    for (Band b : bands)
      for (FeatureKind k : {FeatureKind::entropy, FeatureKind::energy}) out.columns.push_back({ch, b, k});

  const Level arousal = binarize(rating.arousal);
  const Level valence = binarize(rating.valence);
  out.values.resize(dec.windows(), static_cast<Eigen::Index>(out.columns.size()));
  for (Eigen::Index w = 0; w < dec.windows(); ++w) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < dec.channel_names.size(); ++c)
      for (Band b : bands) {
        const Vector& d = dec.detail(w, c, b);
        out.values(w, col++) = entropy(d);
        out.values(w, col++) = energy(d);
      }
    out.rows.push_back({dec.participant_id, dec.trial_id, static_cast<int>(w), arousal, valence});
  }
  return out;
}

/// Experiment axis: a channel pair over all bands, or one band over all
/// channels.
struct AssembleMode {
  enum class Kind { channel_pair, per_band };
  Kind kind = Kind::per_band;
  std::pair<std::string, std::string> pair;
  Band band = Band::beta;

  static AssembleMode channel_pair(std::string a, std::string b) {
    return {Kind::channel_pair, {canonical_channel(a), canonical_channel(b)}, Band::beta};
  }
  static AssembleMode per_band(Band b) { return {Kind::per_band, {}, b}; }

  std::string label() const {
    return kind == Kind::channel_pair ? pair.first + "-" + pair.second : std::string(band_name(band));
  }
};

/// Columns an axis value selects out of a full trial_features table.
inline std::vector<ColumnDescriptor> columns_for(const AssembleMode& mode,
                                                 const std::vector<ColumnDescriptor>& available) {
  std::vector<ColumnDescriptor> out;
  if (mode.kind == AssembleMode::Kind::channel_pair) {
    for (const auto& ch : {mode.pair.first, mode.pair.second}) {
      const auto before = out.size();
      for (const auto& c : available)
        if (canonical_channel(c.channel) == ch) out.push_back(c);
      if (out.size() == before) throw InputError("channel " + ch + " absent from features");
    }
  } else {
    if (mode.band == Band::noise) throw ConfigError("the noise band is not a feature band");
    for (const auto& c : available)
      if (c.band == mode.band) out.push_back(c);
    if (out.empty()) throw InputError("band " + std::string(band_name(mode.band)) + " absent from features");
  }
  return out;
}

/// Appends `part` below `into`; both must have identical columns.
inline void append_rows(FeatureMatrix& into, const FeatureMatrix& part) {
  if (into.columns.empty() && into.rows.empty()) {
    into = part;
    return;
  }
  if (into.columns != part.columns) throw InputError("feature tables have different columns");
  const auto old = into.values.rows();
  into.values.conservativeResize(old + part.values.rows(), Eigen::NoChange);
  into.values.bottomRows(part.values.rows()) = part.values;
  into.rows.insert(into.rows.end(), part.rows.begin(), part.rows.end());
}

inline FeatureMatrix assemble(std::span<const BandDecomposition> decomps,
                              std::span<const RatingRecord> ratings, const AssembleMode& mode) {
  if (decomps.empty()) throw InputError("no windows to assemble");
  if (decomps.size() != ratings.size()) throw InputError("one rating per decomposition required");
  FeatureMatrix out;
  std::vector<ColumnDescriptor> wanted;
  for (std::size_t i = 0; i < decomps.size(); ++i) {
    if (i > 0 && (decomps[i].channel_names != decomps[0].channel_names ||
                  decomps[i].levels.feature_levels != decomps[0].levels.feature_levels))
      throw InputError("decompositions do not share channel and band sets");
    auto full = trial_features(decomps[i], ratings[i]);
    if (i == 0) wanted = columns_for(mode, full.columns);
    append_rows(out, full.select(wanted));
  }
  if (out.row_count() == 0) throw InputError("no windows to assemble");
  return out;
}

// Delimited-text table: optional '#' comment lines, then a header
// participant,trial,window,arousal,valence,<feature columns...>.

inline std::string feature_table_text(const FeatureMatrix& fm, const std::string& comment = {}) {
  fm.validate();
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "participant,trial,window,arousal,valence";
  for (const auto& c : fm.columns) out += "," + c.name();
  out += "\n";
  auto lvl = [](Level l) { return l == Level::high ? "high" : "low"; };
  for (Eigen::Index r = 0; r < fm.row_count(); ++r) {
    const auto& m = fm.rows[static_cast<std::size_t>(r)];
    out += std::to_string(m.participant_id) + "," + std::to_string(m.trial_id) + "," +
           std::to_string(m.window_index) + "," + lvl(m.arousal) + "," + lvl(m.valence);
    for (Eigen::Index c = 0; c < fm.column_count(); ++c) out += "," + io::format_double(fm.values(r, c));
    out += "\n";
  }
  return out;
}

inline FeatureMatrix parse_feature_table(const std::string& text, const std::string& context) {
  std::istringstream in(text);
  std::string line;
  do {
    if (!std::getline(in, line)) throw InputError(context + ": missing header");
  } while (!line.empty() && line[0] == '#');
  const auto header = io::split(line, ',');
  static const char* meta[] = {"participant", "trial", "window", "arousal", "valence"};
  if (header.size() < 5) throw InputError(context + ": header too short");
  for (std::size_t i = 0; i < 5; ++i)
    if (header[i] != meta[i]) throw InputError(context + ": unexpected header field " + std::string(header[i]));
  FeatureMatrix fm;
  for (std::size_t i = 5; i < header.size(); ++i) fm.columns.push_back(parse_column(std::string(header[i])));
  std::vector<std::vector<double>> rows;
  auto lvl = [&](std::string_view s) {
    if (s == "high") return Level::high;
    if (s == "low") return Level::low;
    throw InputError(context + ": bad label '" + std::string(s) + "'");
  };
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = io::split(line, ',');
    if (f.size() != header.size()) throw InputError(context + ": row " + std::to_string(lineno) + " has wrong field count");
    RowMeta m;
    m.participant_id = static_cast<int>(io::parse_int(f[0], context));
    m.trial_id = static_cast<int>(io::parse_int(f[1], context));
    m.window_index = static_cast<int>(io::parse_int(f[2], context));
    m.arousal = lvl(f[3]);
    m.valence = lvl(f[4]);
    fm.rows.push_back(m);
    std::vector<double> vals;
    for (std::size_t i = 5; i < f.size(); ++i) vals.push_back(io::parse_double(f[i], context));
    rows.push_back(std::move(vals));
  }
  fm.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(fm.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      fm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  fm.validate();
  return fm;
}

}  // namespace eegemo
