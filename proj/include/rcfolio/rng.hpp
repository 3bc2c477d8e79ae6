#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rcfolio {

// Named sub-stream of a run seed, so that e.g. "init" and "rollout" draws are
// independently reproducible.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace rcfolio

namespace rcfolio {

// A 64-bit seed for a named child component, derived from a run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  auto stream = make_stream(seed, name);
  return stream();
}

}  // namespace rcfolio
