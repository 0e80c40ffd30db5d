#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace latentmark {

/// ChaCha20 keystream generator (djb variant: 64-bit block counter,
/// 64-bit nonce, 20 rounds).
struct ChaChaKey {
  std::array<std::uint32_t, 8> words{};

  static ChaChaKey from_bytes(const std::uint8_t bytes[32]);
};

void chacha20_block(const ChaChaKey& key, std::uint64_t counter, std::uint64_t nonce,
                    std::uint8_t out[64]);

/// Keystream bytes for blocks 0,1,... of the given nonce.
void chacha20_keystream(const ChaChaKey& key, std::uint64_t nonce, std::size_t nbytes,
                        std::uint8_t* out);

}  // namespace latentmark
