#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rampsim {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// Seed for an independent stream identified by (master seed, tag, index).
/// Streams for different indices never depend on how many other streams exist.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
  return Rng{derive_seed(master, tag, index)};
}

double standard_normal_cdf(double z);
double standard_normal_quantile(double p);

}  // namespace rampsim
