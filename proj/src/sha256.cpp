#include "latentmark/sha256.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace latentmark {

namespace {

// Round constants are the first 32 fractional bits of the cube roots of the
// first 64 primes; initial state the same for square roots of the first 8.
// Deriving them avoids transcribing 72 hex literals; the official test
// vectors in the test suite pin the result.
struct Tables {
  std::array<std::uint32_t, 64> k{};
  std::array<std::uint32_t, 8> h0{};

  Tables() {
    int primes[64];
    int count = 0;
    for (int cand = 2; count < 64; ++cand) {
      bool prime = true;
      for (int d = 2; d * d <= cand; ++d)
        if (cand % d == 0) {
          prime = false;
          break;
        }
      if (prime) primes[count++] = cand;
    }
    for (int i = 0; i < 64; ++i) {
      const long double root = std::cbrt(static_cast<long double>(primes[i]));
      k[i] = static_cast<std::uint32_t>(std::floor((root - std::floor(root)) * 4294967296.0L));
    }
    for (int i = 0; i < 8; ++i) {
      const long double root = std::sqrt(static_cast<long double>(primes[i]));
      h0[i] = static_cast<std::uint32_t>(std::floor((root - std::floor(root)) * 4294967296.0L));
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

inline std::uint32_t load_be32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 |
         std::uint32_t(p[3]);
}

}  // namespace

Sha256::Sha256() : state_(tables().h0) {}

void Sha256::process_block(const std::uint8_t block[64]) {
  const auto& K = tables().k;
  std::uint32_t w[64];
  for (int i = 0; i < 16; ++i) w[i] = load_be32(block + 4 * i);
  for (int i = 16; i < 64; ++i) {
    const std::uint32_t s0 = std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
    const std::uint32_t s1 = std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
  std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
  for (int i = 0; i < 64; ++i) {
    const std::uint32_t S1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
    const std::uint32_t ch = (e & f) ^ (~e & g);
    const std::uint32_t t1 = h + S1 + ch + K[i] + w[i];
    const std::uint32_t S0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
    const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    const std::uint32_t t2 = S0 + maj;
    h = g; g = f; f = e; e = d + t1;
    d = c; c = b; b = a; a = t1 + t2;
  }
  state_[0] += a; state_[1] += b; state_[2] += c; state_[3] += d;
  state_[4] += e; state_[5] += f; state_[6] += g; state_[7] += h;
}

void Sha256::update(const std::uint8_t* data, std::size_t len) {
  total_len_ += len;
  while (len > 0) {
    const std::size_t take = std::min(len, buf_.size() - buf_len_);
    std::memcpy(buf_.data() + buf_len_, data, take);
    buf_len_ += take;
    data += take;
    len -= take;
    if (buf_len_ == 64) {
      process_block(buf_.data());
      buf_len_ = 0;
    }
  }
}

Digest256 Sha256::finish() {
  const std::uint64_t bit_len = total_len_ * 8;
  const std::uint8_t pad = 0x80;
  update(&pad, 1);
  const std::uint8_t zero = 0x00;
  while (buf_len_ != 56) update(&zero, 1);
  std::uint8_t len_be[8];
  for (int i = 0; i < 8; ++i) len_be[i] = std::uint8_t(bit_len >> (56 - 8 * i));
  update(len_be, 8);
  Digest256 out;
  for (int i = 0; i < 8; ++i) {
    out[4 * i] = std::uint8_t(state_[i] >> 24);
    out[4 * i + 1] = std::uint8_t(state_[i] >> 16);
    out[4 * i + 2] = std::uint8_t(state_[i] >> 8);
    out[4 * i + 3] = std::uint8_t(state_[i]);
  }
  return out;
}

Digest256 Sha256::digest(const std::uint8_t* data, std::size_t len) {
  Sha256 h;
  h.update(data, len);
  return h.finish();
}

Digest256 hmac_sha256(const std::vector<std::uint8_t>& key, const std::vector<std::uint8_t>& msg) {
  std::array<std::uint8_t, 64> k{};
  if (key.size() > 64) {
    const Digest256 d = Sha256::digest(key);
    std::memcpy(k.data(), d.data(), d.size());
  } else {
    std::memcpy(k.data(), key.data(), key.size());
  }
  std::array<std::uint8_t, 64> ipad, opad;
  for (int i = 0; i < 64; ++i) {
    ipad[i] = k[i] ^ 0x36;
    opad[i] = k[i] ^ 0x5c;
  }
  Sha256 inner;
  inner.update(ipad.data(), ipad.size());
  inner.update(msg.data(), msg.size());
  const Digest256 ih = inner.finish();
  Sha256 outer;
  outer.update(opad.data(), opad.size());
  outer.update(ih.data(), ih.size());
  return outer.finish();
}

}  // namespace latentmark
