#pragma once

#include <cstdint>

#include "latentmark/chacha20.hpp"

namespace latentmark {

/// Counter-based random stream: the value at a given draw index depends only
/// on (master_seed, stream, index), so per-element draws are schedule
/// independent. Backed by ChaCha20 with the stream id as nonce.
class StreamRng {
 public:
  StreamRng(std::uint64_t master_seed, std::uint64_t stream);

  /// 64 uniform bits for draw `index`.
  std::uint64_t word(std::uint64_t index) const;

  /// Uniform draw strictly inside (0,1): (k + 1/2) / 2^53 for a 53-bit k,
  /// so 0 and 1 are unreachable and quantiles stay finite.
  double uniform_open01(std::uint64_t index) const {
    return (double((word(index) >> 11)) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw via quantile inversion.
  double normal(std::uint64_t index) const;

  bool bernoulli(std::uint64_t index, double p) const { return uniform_open01(index) < p; }

  /// Uniform integer in [0, bound), bound >= 1.
  std::uint32_t below(std::uint64_t index, std::uint32_t bound) const {
    return std::uint32_t((static_cast<unsigned __int128>(word(index)) * bound) >> 64);
  }

 private:
  ChaChaKey key_;
  std::uint64_t nonce_;
  mutable std::uint64_t cached_block_ = ~std::uint64_t{0};
  mutable std::uint8_t block_[64];
};

/// Sequential convenience wrapper with an internal draw counter.
class SequentialRng {
 public:
  SequentialRng(std::uint64_t master_seed, std::uint64_t stream) : rng_(master_seed, stream) {}

  std::uint64_t next() { return rng_.word(ctr_++); }
  double uniform_open01() { return rng_.uniform_open01(ctr_++); }
  double normal() { return rng_.normal(ctr_++); }
  bool bernoulli(double p) { return rng_.bernoulli(ctr_++, p); }
  std::uint32_t below(std::uint32_t bound) { return rng_.below(ctr_++, bound); }

 private:
  StreamRng rng_;
  std::uint64_t ctr_ = 0;
};

}  // namespace latentmark
