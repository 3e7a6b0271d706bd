#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mapgroups {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle to [0, 2π).
double wrap_angle(double x);

/// Distance on the circle ℝ/2πℤ.
double circular_distance(double a, double b);

/// Least-squares slope of log(y) against log(x). Non-positive entries are skipped;
/// fewer than two usable points yields NaN.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// FNV-1a; stable across platforms, used for seeds and descriptor hashes.
std::uint64_t fnv1a(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for an independent random substream, derived from the run seed and a suite name.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view suite);

/// Deterministic standard normal keyed by an arbitrary integer tuple.
double keyed_normal(std::uint64_t seed, std::span<const std::int64_t> key);

std::string hex64(std::uint64_t value);

}  // namespace mapgroups
