#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace odr {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named stream from a root seed. Every consumer of
/// randomness asks for its own (stream, index) pair, so results never depend on the
/// order in which work is scheduled.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

}  // namespace odr
