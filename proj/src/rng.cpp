#include "latentmark/rng.hpp"

#include <cstring>

#include "latentmark/sampler.hpp"

namespace latentmark {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

StreamRng::StreamRng(std::uint64_t master_seed, std::uint64_t stream) : nonce_(stream) {
  std::uint64_t state = master_seed;
  std::uint8_t key_bytes[32];
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t w = splitmix64(state);
    std::memcpy(key_bytes + 8 * i, &w, 8);
  }
  key_ = ChaChaKey::from_bytes(key_bytes);
}

std::uint64_t StreamRng::word(std::uint64_t index) const {
  const std::uint64_t block = index >> 3;
  if (block != cached_block_) {
    chacha20_block(key_, block, nonce_, block_);
    cached_block_ = block;
  }
  std::uint64_t w;
  std::memcpy(&w, block_ + 8 * (index & 7), 8);
  return w;
}

double StreamRng::normal(std::uint64_t index) const { return quantile(uniform_open01(index)); }

}  // namespace latentmark
