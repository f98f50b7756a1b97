#pragma once

#include <cstdint>
#include <random>

namespace rough {

/// Per-replica random stream.
///
/// Each replica owns an mt19937_64 seeded from (master seed, replica index)
/// through std::seed_seq, so replica r draws the same numbers no matter how
/// replicas are scheduled across threads. Both engine and seed_seq are fully
/// specified by the standard, which makes streams portable.
class ReplicaRng {
 public:
  ReplicaRng(std::uint64_t master_seed, std::uint64_t replica) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32), 0x726f75u};
    engine_.seed(seq);
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rough
