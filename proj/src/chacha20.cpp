#include "latentmark/chacha20.hpp"

#include <bit>
#include <cstring>

namespace latentmark {

namespace {

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
  a += b; d ^= a; d = std::rotl(d, 16);
  c += d; b ^= c; b = std::rotl(b, 12);
  a += b; d ^= a; d = std::rotl(d, 8);
  c += d; b ^= c; b = std::rotl(b, 7);
}

}  // namespace

ChaChaKey ChaChaKey::from_bytes(const std::uint8_t bytes[32]) {
  ChaChaKey k;
  for (int i = 0; i < 8; ++i) {
    k.words[i] = std::uint32_t(bytes[4 * i]) | std::uint32_t(bytes[4 * i + 1]) << 8 |
                 std::uint32_t(bytes[4 * i + 2]) << 16 | std::uint32_t(bytes[4 * i + 3]) << 24;
  }
  return k;
}

void chacha20_block(const ChaChaKey& key, std::uint64_t counter, std::uint64_t nonce,
                    std::uint8_t out[64]) {
  std::uint32_t st[16] = {
      0x61707865u, 0x3320646eu, 0x79622d32u, 0x6b206574u,
      key.words[0], key.words[1], key.words[2], key.words[3],
      key.words[4], key.words[5], key.words[6], key.words[7],
      std::uint32_t(counter), std::uint32_t(counter >> 32),
      std::uint32_t(nonce), std::uint32_t(nonce >> 32)};
  std::uint32_t x[16];
  std::memcpy(x, st, sizeof(st));
  for (int round = 0; round < 10; ++round) {
    quarter_round(x[0], x[4], x[8], x[12]);
    quarter_round(x[1], x[5], x[9], x[13]);
    quarter_round(x[2], x[6], x[10], x[14]);
    quarter_round(x[3], x[7], x[11], x[15]);
    quarter_round(x[0], x[5], x[10], x[15]);
    quarter_round(x[1], x[6], x[11], x[12]);
    quarter_round(x[2], x[7], x[8], x[13]);
    quarter_round(x[3], x[4], x[9], x[14]);
  }
  for (int i = 0; i < 16; ++i) {
    const std::uint32_t v = x[i] + st[i];
    out[4 * i] = std::uint8_t(v);
    out[4 * i + 1] = std::uint8_t(v >> 8);
    out[4 * i + 2] = std::uint8_t(v >> 16);
    out[4 * i + 3] = std::uint8_t(v >> 24);
  }
}

void chacha20_keystream(const ChaChaKey& key, std::uint64_t nonce, std::size_t nbytes,
                        std::uint8_t* out) {
  std::uint8_t block[64];
  std::uint64_t counter = 0;
  while (nbytes > 0) {
    chacha20_block(key, counter++, nonce, block);
    const std::size_t take = nbytes < 64 ? nbytes : 64;
    std::memcpy(out, block, take);
    out += take;
    nbytes -= take;
  }
}

}  // namespace latentmark
