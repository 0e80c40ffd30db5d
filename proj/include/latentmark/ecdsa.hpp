#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "latentmark/rng.hpp"

namespace latentmark {

using uint128 = unsigned __int128;

constexpr uint128 make_u128(std::uint64_t hi, std::uint64_t lo) {
  return (uint128(hi) << 64) | lo;
}

struct EcPoint {
  uint128 x = 0;
  uint128 y = 0;
  bool inf = true;

  bool operator==(const EcPoint&) const = default;
};

struct EcdsaKeyPair {
  uint128 sk = 0;
  EcPoint vk;
};

/// (r, s) packed as two 14-byte big-endian integers: exactly 224 bits.
using EcdsaSignature = std::array<std::uint8_t, 28>;

/// secp112r1: ~112-bit group order, so signatures fit the 224-bit budget.
namespace secp112r1 {
extern const uint128 p;  // field prime
extern const uint128 a;  // curve coefficient, p - 3
extern const uint128 b;
extern const uint128 n;  // group order
extern const EcPoint G;

bool on_curve(const EcPoint& pt);
EcPoint add(const EcPoint& p1, const EcPoint& p2);
EcPoint mul(const EcPoint& pt, uint128 k);
}  // namespace secp112r1

EcPoint ecdsa_public_key(uint128 sk);
EcdsaKeyPair ecdsa_keygen(SequentialRng& rng);

/// Deterministic nonces (RFC-6979 style HMAC-DRBG), so a (key, message)
/// pair always produces the same signature.
EcdsaSignature ecdsa_sign(uint128 sk, const std::vector<std::uint8_t>& msg);
bool ecdsa_verify(const EcPoint& vk, const std::vector<std::uint8_t>& msg,
                  const EcdsaSignature& sig);

}  // namespace latentmark
