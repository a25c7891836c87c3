#pragma once

#include "core.hpp"

#include <array>
#include <limits>
#include <string>
#include <string_view>

namespace eegemo {

// Physiological bands in ascending frequency order.
enum class Band { theta, alpha, beta, gamma, noise };

// The four bands features are taken from.
inline constexpr std::array<Band, 4> kFeatureBands{Band::theta, Band::alpha, Band::beta, Band::gamma};

struct BandRange {
  double low_hz;
  double high_hz;  // infinity for noise
};

inline constexpr BandRange nominal_range(Band b) {
  switch (b) {
    case Band::theta: return {4.0, 8.0};
    case Band::alpha: return {8.0, 16.0};
    case Band::beta: return {16.0, 32.0};
    case Band::gamma: return {32.0, 64.0};
    case Band::noise: return {64.0, std::numeric_limits<double>::infinity()};
  }
  return {0.0, 0.0};
}

inline std::string_view band_name(Band b) {
  switch (b) {
    case Band::theta: return "theta";
    case Band::alpha: return "alpha";
    case Band::beta: return "beta";
    case Band::gamma: return "gamma";
    case Band::noise: return "noise";
  }
  return "?";
}

inline Band parse_band(std::string_view name) {
  for (Band b : {Band::theta, Band::alpha, Band::beta, Band::gamma, Band::noise})
    if (band_name(b) == name) return b;
  throw ConfigError("unknown band '" + std::string(name) + "'");
}

}  // namespace eegemo
