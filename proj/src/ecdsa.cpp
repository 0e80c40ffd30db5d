#include "latentmark/ecdsa.hpp"

#include <stdexcept>

#include "latentmark/sha256.hpp"

namespace latentmark {

namespace {

using u128 = uint128;

inline u128 add_mod(u128 x, u128 y, u128 m) {
  u128 r = x + y;  // operands < 2^112, no wrap
  if (r >= m) r -= m;
  return r;
}

inline u128 sub_mod(u128 x, u128 y, u128 m) { return x >= y ? x - y : m - (y - x); }

u128 mul_mod(u128 x, u128 y, u128 m) {
  u128 r = 0;
  x %= m;
  while (y) {
    if (y & 1) r = add_mod(r, x, m);
    x = add_mod(x, x, m);
    y >>= 1;
  }
  return r;
}

/// Binary extended gcd inverse; m odd, gcd(a, m) = 1.
u128 inv_mod(u128 a, u128 m) {
  u128 u = a % m, v = m;
  u128 x1 = 1, x2 = 0;
  while (u != 1 && v != 1) {
    while ((u & 1) == 0) {
      u >>= 1;
      x1 = (x1 & 1) == 0 ? x1 >> 1 : (x1 + m) >> 1;
    }
    while ((v & 1) == 0) {
      v >>= 1;
      x2 = (x2 & 1) == 0 ? x2 >> 1 : (x2 + m) >> 1;
    }
    if (u >= v) {
      u -= v;
      x1 = sub_mod(x1, x2, m);
    } else {
      v -= u;
      x2 = sub_mod(x2, x1, m);
    }
  }
  return u == 1 ? x1 % m : x2 % m;
}

void store_be14(u128 v, std::uint8_t* out) {
  for (int i = 13; i >= 0; --i) {
    out[i] = std::uint8_t(v & 0xff);
    v >>= 8;
  }
}

u128 load_be14(const std::uint8_t* in) {
  u128 v = 0;
  for (int i = 0; i < 14; ++i) v = (v << 8) | in[i];
  return v;
}

std::vector<std::uint8_t> int2octets(u128 v) {
  std::vector<std::uint8_t> out(14);
  store_be14(v, out.data());
  return out;
}

}  // namespace

namespace secp112r1 {

// SEC 2 v1.0 parameters.
const u128 p = make_u128(0x0000DB7C2ABF62E3ull, 0x5E668076BEAD208Bull);
const u128 a = make_u128(0x0000DB7C2ABF62E3ull, 0x5E668076BEAD2088ull);
const u128 b = make_u128(0x0000659EF8BA0439ull, 0x16EEDE8911702B22ull);
const u128 n = make_u128(0x0000DB7C2ABF62E3ull, 0x5E7628DFAC6561C5ull);
const EcPoint G = {make_u128(0x000009487239995Aull, 0x5EE76B55F9C2F098ull),
                   make_u128(0x0000A89CE5AF8724ull, 0xC0A23E0E0FF77500ull), false};

bool on_curve(const EcPoint& pt) {
  if (pt.inf) return true;
  const u128 lhs = mul_mod(pt.y, pt.y, p);
  const u128 x2 = mul_mod(pt.x, pt.x, p);
  const u128 rhs = add_mod(add_mod(mul_mod(x2, pt.x, p), mul_mod(a, pt.x, p), p), b, p);
  return lhs == rhs;
}

EcPoint add(const EcPoint& p1, const EcPoint& p2) {
  if (p1.inf) return p2;
  if (p2.inf) return p1;
  u128 lambda;
  if (p1.x == p2.x) {
    if (add_mod(p1.y, p2.y, p) == 0) return {};  // P + (-P)
    const u128 num = add_mod(mul_mod(3, mul_mod(p1.x, p1.x, p), p), a, p);
    lambda = mul_mod(num, inv_mod(add_mod(p1.y, p1.y, p), p), p);
  } else {
    const u128 num = sub_mod(p2.y, p1.y, p);
    lambda = mul_mod(num, inv_mod(sub_mod(p2.x, p1.x, p), p), p);
  }
  EcPoint out;
  out.inf = false;
  out.x = sub_mod(sub_mod(mul_mod(lambda, lambda, p), p1.x, p), p2.x, p);
  out.y = sub_mod(mul_mod(lambda, sub_mod(p1.x, out.x, p), p), p1.y, p);
  return out;
}

EcPoint mul(const EcPoint& pt, u128 k) {
  EcPoint acc;  // infinity
  EcPoint base = pt;
  while (k) {
    if (k & 1) acc = add(acc, base);
    base = add(base, base);
    k >>= 1;
  }
  return acc;
}

}  // namespace secp112r1

namespace {

/// Leftmost 112 bits of the message digest, reduced mod n.
u128 hash_to_scalar(const std::vector<std::uint8_t>& msg) {
  const Digest256 h = Sha256::digest(msg);
  return load_be14(h.data()) % secp112r1::n;
}

/// RFC 6979 HMAC-DRBG nonce stream for (sk, digest).
class NonceStream {
 public:
  NonceStream(u128 sk, const Digest256& h1) {
    v_.assign(32, 0x01);
    k_.assign(32, 0x00);
    std::vector<std::uint8_t> h1_octets = int2octets(load_be14(h1.data()) % secp112r1::n);
    step(0x00, sk, h1_octets);
    step(0x01, sk, h1_octets);
  }

  u128 next() {
    for (;;) {
      v_ = to_vec(hmac_sha256(k_, v_));
      const u128 k = load_be14(v_.data());
      if (k >= 1 && k < secp112r1::n) return k;
      bump();
    }
  }

  void bump() {
    std::vector<std::uint8_t> m = v_;
    m.push_back(0x00);
    k_ = to_vec(hmac_sha256(k_, m));
    v_ = to_vec(hmac_sha256(k_, v_));
  }

 private:
  static std::vector<std::uint8_t> to_vec(const Digest256& d) {
    return std::vector<std::uint8_t>(d.begin(), d.end());
  }

  void step(std::uint8_t tag, u128 sk, const std::vector<std::uint8_t>& h1_octets) {
    std::vector<std::uint8_t> m = v_;
    m.push_back(tag);
    const std::vector<std::uint8_t> x = int2octets(sk);
    m.insert(m.end(), x.begin(), x.end());
    m.insert(m.end(), h1_octets.begin(), h1_octets.end());
    k_ = to_vec(hmac_sha256(k_, m));
    v_ = to_vec(hmac_sha256(k_, v_));
  }

  std::vector<std::uint8_t> v_, k_;
};

}  // namespace

EcPoint ecdsa_public_key(u128 sk) { return secp112r1::mul(secp112r1::G, sk); }

EcdsaKeyPair ecdsa_keygen(SequentialRng& rng) {
  const u128 n = secp112r1::n;
  for (;;) {
    const std::uint64_t hi = rng.next() & ((std::uint64_t(1) << 48) - 1);
    const std::uint64_t lo = rng.next();
    const u128 sk = make_u128(hi, lo);
    if (sk >= 1 && sk < n) return {sk, ecdsa_public_key(sk)};
  }
}

EcdsaSignature ecdsa_sign(u128 sk, const std::vector<std::uint8_t>& msg) {
  using namespace secp112r1;
  if (sk == 0 || sk >= n) throw std::invalid_argument("ecdsa_sign: invalid private key");
  const u128 e = hash_to_scalar(msg);
  NonceStream nonces(sk, Sha256::digest(msg));
  for (;;) {
    const u128 k = nonces.next();
    const EcPoint R = mul(G, k);
    const u128 r = R.x % n;
    if (r == 0) {
      nonces.bump();
      continue;
    }
    const u128 s = mul_mod(inv_mod(k, n), add_mod(e, mul_mod(r, sk, n), n), n);
    if (s == 0) {
      nonces.bump();
      continue;
    }
    EcdsaSignature sig;
    store_be14(r, sig.data());
    store_be14(s, sig.data() + 14);
    return sig;
  }
}

bool ecdsa_verify(const EcPoint& vk, const std::vector<std::uint8_t>& msg,
                  const EcdsaSignature& sig) {
  using namespace secp112r1;
  if (vk.inf || !on_curve(vk)) return false;
  const u128 r = load_be14(sig.data());
  const u128 s = load_be14(sig.data() + 14);
  if (r == 0 || r >= n || s == 0 || s >= n) return false;
  const u128 e = hash_to_scalar(msg);
  const u128 w = inv_mod(s, n);
  const EcPoint X = add(mul(G, mul_mod(e, w, n)), mul(vk, mul_mod(r, w, n)));
  if (X.inf) return false;
  return X.x % n == r;
}

}  // namespace latentmark
