#pragma once

#include "bands.hpp"
#include "core.hpp"
#include "io_util.hpp"
#include "preprocess.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eegemo {

/// Analysis filter pair. Coefficients are applied by convolution:
/// approx[i] = sum_k lowpass[k] * x[2i - k].
struct WaveletFilterPair {
  std::vector<double> lowpass;
  std::vector<double> highpass;

  std::size_t length() const { return lowpass.size(); }
};

/// Daubechies wavelet with four vanishing moments (8 taps).
inline const WaveletFilterPair& db4_filters() {
  static const WaveletFilterPair filters = [] {
    WaveletFilterPair f;
    f.lowpass = {-0.010597401785069032, 0.0328830116668852,   0.030841381835560764,
                 -0.18703481171909309,  -0.027983769416859854, 0.6308807679298589,
                 0.7148465705529157,    0.2303778133088965};
    const std::size_t n = f.lowpass.size();
    f.highpass.resize(n);
    for (std::size_t k = 0; k < n; ++k)
      f.highpass[k] = (k % 2 == 0 ? 1.0 : -1.0) * f.lowpass[n - 1 - k];
    return f;
  }();
  return filters;
}

/// Half-point symmetric extension: x[-1] = x[0], x[n] = x[n-1].
inline Eigen::Index symmetric_index(Eigen::Index m, Eigen::Index n) {
  while (m < 0 || m >= n) {
    if (m < 0) m = -m - 1;
    if (m >= n) m = 2 * n - 1 - m;
  }
  return m;
}

inline Eigen::Index dwt_output_length(Eigen::Index n, std::size_t filter_len) {
  return (n + static_cast<Eigen::Index>(filter_len) - 1 + 1) / 2;
}

struct DwtLevel {
  Vector approx;
  Vector detail;
};

/// One analysis step: convolve with each filter over the symmetric extension
/// and keep even output indices. Output length is ceil((N + L - 1) / 2).
inline DwtLevel dwt_level(std::span<const double> x, const WaveletFilterPair& filters) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto len = filters.length();
  if (x.size() < len)
    throw InputError("signal of " + std::to_string(n) + " samples is shorter than the " +
                     std::to_string(len) + "-tap filter");
  const auto out_len = dwt_output_length(n, len);
  DwtLevel out{Vector(out_len), Vector(out_len)};
  const double* lo = filters.lowpass.data();
  const double* hi = filters.highpass.data();
  const auto L = static_cast<Eigen::Index>(len);
  for (Eigen::Index i = 0; i < out_len; ++i) {
    double a = 0.0, d = 0.0;
    const Eigen::Index base = 2 * i;
    if (base - (L - 1) >= 0 && base < n) {
      const double* xp = x.data() + base;
      for (Eigen::Index k = 0; k < L; ++k) {
        a += lo[k] * xp[-k];
        d += hi[k] * xp[-k];
      }
    } else {
      for (Eigen::Index k = 0; k < L; ++k) {
        const double v = x[static_cast<std::size_t>(symmetric_index(base - k, n))];
        a += lo[k] * v;
        d += hi[k] * v;
      }
    }
    out.approx[i] = a;
    out.detail[i] = d;
  }
  return out;
}

inline DwtLevel dwt_level(const Vector& x, const WaveletFilterPair& filters) {
  return dwt_level(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), filters);
}

/// Synthesis step inverting dwt_level for an input of `output_length` samples.
inline Vector idwt_level(const Vector& approx, const Vector& detail, Eigen::Index output_length,
                         const WaveletFilterPair& filters) {
  const auto L = static_cast<Eigen::Index>(filters.length());
  if (approx.size() != detail.size()) throw InputError("approximation/detail length mismatch");
  if (approx.size() != dwt_output_length(output_length, filters.length()))
    throw InputError("coefficient length does not match the requested output length");
  Vector x = Vector::Zero(output_length);
  for (Eigen::Index n = 0; n < output_length; ++n) {
    double acc = 0.0;
    // x[n] = sum_i lowpass[2i - n] approx[i] + highpass[2i - n] detail[i]
    for (Eigen::Index i = (n + 1) / 2; 2 * i - n < L && i < approx.size(); ++i) {
      const auto k = static_cast<std::size_t>(2 * i - n);
      acc += filters.lowpass[k] * approx[i] + filters.highpass[k] * detail[i];
    }
    x[n] = acc;
  }
  return x;
}

struct Wavedec {
  Vector approximation;         // deepest approximation
  std::vector<Vector> details;  // details[j - 1] is level j
  std::vector<Eigen::Index> input_lengths;  // input length of each level
};

inline Wavedec wavedec(const Vector& x, int levels, const WaveletFilterPair& filters) {
  if (levels < 1) throw ConfigError("decomposition depth must be at least 1");
  Wavedec out;
  Vector current = x;
  for (int j = 1; j <= levels; ++j) {
    if (current.size() < static_cast<Eigen::Index>(filters.length()))
      throw InputError("window too short for decomposition level " + std::to_string(j) + ": " +
                       std::to_string(current.size()) + " samples left");
    out.input_lengths.push_back(current.size());
    auto step = dwt_level(current, filters);
    out.details.push_back(std::move(step.detail));
    current = std::move(step.approx);
  }
  out.approximation = std::move(current);
  return out;
}

inline Vector waverec(const Wavedec& dec, const WaveletFilterPair& filters) {
  Vector current = dec.approximation;
  for (auto j = static_cast<std::ptrdiff_t>(dec.details.size()) - 1; j >= 0; --j) {
    const auto ju = static_cast<std::size_t>(j);
    current = idwt_level(current, dec.details[ju], dec.input_lengths[ju], filters);
  }
  return current;
}

/// Maps bands to detail levels for a sampling rate. Level j holds
/// (fs / 2^(j+1), fs / 2^j].
struct BandLevels {
  double sampling_rate_hz = 0.0;
  std::array<std::optional<int>, 4> feature_levels{};  // theta, alpha, beta, gamma
  std::vector<int> noise_levels;

  std::optional<int> level(Band b) const {
    if (b == Band::noise) return std::nullopt;
    return feature_levels[static_cast<std::size_t>(b)];
  }

  bool has(Band b) const { return b == Band::noise ? !noise_levels.empty() : level(b).has_value(); }

  int depth() const {
    int d = 0;
    for (const auto& l : feature_levels)
      if (l) d = std::max(d, *l);
    for (int l : noise_levels) d = std::max(d, l);
    return d;
  }
};

inline BandLevels band_level_map(double fs) {
  if (!(fs >= 16.0) || !std::isfinite(fs))
    throw ConfigError("sampling rate " + io::format_double(fs) + " Hz cannot resolve theta (need >= 16 Hz)");
  const double m = std::log2(fs);
  const double rounded = std::round(m);
  if (std::abs(m - rounded) > 1e-9)
    throw ConfigError("sampling rate " + io::format_double(fs) +
                      " Hz is not a power of two; dyadic levels cannot align to 4/8/16/32/64 Hz");
  const int exponent = static_cast<int>(rounded);
  BandLevels out;
  out.sampling_rate_hz = fs;
  for (Band b : kFeatureBands) {
    // top edge 2^e Hz sits at level exponent - e
    const int top = static_cast<int>(std::round(std::log2(nominal_range(b).high_hz)));
    const int j = exponent - top;
    if (j >= 1) out.feature_levels[static_cast<std::size_t>(b)] = j;
  }
  const auto gamma = out.feature_levels[static_cast<std::size_t>(Band::gamma)];
  if (gamma)
    for (int j = 1; j < *gamma; ++j) out.noise_levels.push_back(j);
  return out;
}

/// Detail coefficients of every window and channel of one trial, down to
/// the theta level.
struct BandDecomposition {
  int participant_id = 0;
  int trial_id = 0;
  std::vector<std::string> channel_names;
  std::vector<Eigen::Index> window_starts;
  BandLevels levels;
  // coefficients[channel][window]; details indexed by level - 1. The noise
  // levels and the residual approximation are kept but are not features.
  std::vector<std::vector<Wavedec>> coefficients;

  Eigen::Index windows() const { return static_cast<Eigen::Index>(window_starts.size()); }

  const Vector& detail(Eigen::Index window, std::size_t channel, Band band) const {
    const auto lvl = levels.level(band);
    if (!lvl) throw InputError("band " + std::string(band_name(band)) + " not present at this sampling rate");
    return coefficients.at(channel).at(static_cast<std::size_t>(window)).details.at(static_cast<std::size_t>(*lvl - 1));
  }
};

inline BandDecomposition decompose(const WindowedSignal& windowed, double fs,
                                   const WaveletFilterPair& filters = db4_filters()) {
  const BandLevels levels = band_level_map(fs);
  const int depth = levels.depth();
  // Same bound as pywt's dwt_max_level: 2^depth * (L - 1) samples.
  const auto need = (Eigen::Index{1} << depth) * static_cast<Eigen::Index>(filters.length() - 1);
  if (windowed.window_samples < need)
    throw InputError("window of " + std::to_string(windowed.window_samples) + " samples too short for " +
                     std::to_string(depth) + " decomposition levels (need " + std::to_string(need) + ")");
  BandDecomposition out;
  out.participant_id = windowed.participant_id;
  out.trial_id = windowed.trial_id;
  out.channel_names = windowed.channel_names;
  out.window_starts = windowed.starts;
  out.levels = levels;
  out.coefficients.resize(windowed.windows.size());
  for (std::size_t c = 0; c < windowed.windows.size(); ++c) {
    const auto& w = windowed.windows[c];
    out.coefficients[c].reserve(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index k = 0; k < w.rows(); ++k) {
      Vector x = w.row(k).transpose();
      out.coefficients[c].push_back(wavedec(x, depth, filters));
    }
  }
  return out;
}

/// Filter taps plus the single-level transform of a fixed ramp-and-sine test
/// signal, as `kind,index,value` lines.
inline std::string golden_vectors_text(const WaveletFilterPair& filters = db4_filters()) {
  std::string out = "kind,index,value\n";
  auto emit = [&](const char* kind, const auto& v) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(v.size()); ++i)
      out += std::string(kind) + "," + std::to_string(i) + "," + io::format_double(v[static_cast<std::size_t>(i)]) + "\n";
  };
  emit("lowpass", filters.lowpass);
  emit("highpass", filters.highpass);
  std::vector<double> sig(32);
  for (std::size_t i = 0; i < sig.size(); ++i)
    sig[i] = 0.25 * static_cast<double>(i) + std::sin(0.7 * static_cast<double>(i));
  emit("signal", sig);
  const auto lvl = dwt_level(std::span<const double>(sig), filters);
  std::vector<double> a(lvl.approx.data(), lvl.approx.data() + lvl.approx.size());
  std::vector<double> d(lvl.detail.data(), lvl.detail.data() + lvl.detail.size());
  emit("approx", a);
  emit("detail", d);
  return out;
}

}  // namespace eegemo
