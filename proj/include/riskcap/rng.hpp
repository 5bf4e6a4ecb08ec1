#pragma once

#include <cstdint>

#include "riskcap/statfn.hpp"

namespace riskcap::montecarlo {

// SplitMix64-style counter generator with keyed substreams. Draw j of
// stream s under seed m depends only on (m, s, j), so per-security
// substreams are stable under any parallel schedule and unaffected by how
// many other streams exist.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : state_(derive_key(seed, stream)) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on (0, 1) with 53-bit resolution; never exactly 0, 1/2, or 1.
  double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal by inversion, so one counter tick per variate.
  double next_normal() { return statfn::normal_quantile(next_uniform()); }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^
               mix((stream + 1) * 0xD1B54A32D192ED03ULL));
  }

  std::uint64_t state_;
};

}  // namespace riskcap::montecarlo
