#include "latentmark/gs.hpp"

#include <cmath>
#include <stdexcept>

#include "latentmark/chacha20.hpp"
#include "latentmark/sha256.hpp"

namespace latentmark {

void GsParams::validate_for(const LatentShape& shape) const {
  if (v != 1) throw std::invalid_argument("GsParams: only v = 1 is supported");
  if (shape.ch % 2 != 0) throw std::invalid_argument("GsParams: channel count must be even");
  if (f_ch == 0 || (shape.ch / 2) % f_ch != 0)
    throw std::invalid_argument("GsParams: ch/2 must be divisible by f_ch");
  if (f_hw == 0 || shape.h % f_hw != 0 || shape.w % f_hw != 0)
    throw std::invalid_argument("GsParams: h and w must be divisible by f_hw");
}

std::uint32_t gs_capacity(const LatentShape& shape, const GsParams& p) {
  p.validate_for(shape);
  return std::uint32_t(shape.half_elems() / p.replication());
}

std::vector<std::uint8_t> signed_message(std::uint32_t user_info) {
  return {std::uint8_t(user_info >> 24), std::uint8_t(user_info >> 16),
          std::uint8_t(user_info >> 8), std::uint8_t(user_info)};
}

BitVec pack_payload(std::uint32_t user_info, std::uint32_t q, PayloadMode mode,
                    const EcdsaKeyPair* signer) {
  if (mode == PayloadMode::operator_tiled) {
    BitVec payload(q);
    for (std::uint32_t j = 0; j < q; ++j)
      if ((user_info >> (j % 32)) & 1) payload.set(j, true);
    return payload;
  }
  if (q != 256)
    throw std::invalid_argument("pack_payload: third-party mode needs q = 256 (32 + 224)");
  if (!signer) throw std::invalid_argument("pack_payload: third-party mode needs a signing key");
  const EcdsaSignature sig = ecdsa_sign(signer->sk, signed_message(user_info));
  return payload_from_parts(user_info, sig);
}

BitVec payload_from_parts(std::uint32_t user_info, const EcdsaSignature& sig) {
  BitVec payload(256);
  for (std::uint32_t j = 0; j < 32; ++j)
    if ((user_info >> j) & 1) payload.set(j, true);
  for (std::uint32_t k = 0; k < 28; ++k)
    for (std::uint32_t b = 0; b < 8; ++b)
      if ((sig[k] >> b) & 1) payload.set(32 + 8 * k + b, true);
  return payload;
}

UnpackResult unpack_payload(const BitVec& bits, PayloadMode mode, const EcPoint* vk) {
  UnpackResult out;
  if (mode == PayloadMode::operator_tiled) {
    const std::uint32_t q = std::uint32_t(bits.size());
    for (std::uint32_t b = 0; b < 32; ++b) {
      int votes = 0, present = 0;
      for (std::uint32_t j = b; j < q; j += 32) {
        votes += bits.get(j) ? 1 : -1;
        ++present;
      }
      if (present > 0 && votes > 0) out.user_info |= std::uint32_t(1) << b;
    }
    return out;
  }
  if (bits.size() != 256)
    throw std::invalid_argument("unpack_payload: third-party payload must be 256 bits");
  for (std::uint32_t j = 0; j < 32; ++j)
    if (bits.get(j)) out.user_info |= std::uint32_t(1) << j;
  EcdsaSignature sig{};
  for (std::uint32_t k = 0; k < 28; ++k)
    for (std::uint32_t b = 0; b < 8; ++b)
      if (bits.get(32 + 8 * k + b)) sig[k] |= std::uint8_t(1u << b);
  if (vk != nullptr)
    out.signature_valid = ecdsa_verify(*vk, signed_message(out.user_info), sig);
  return out;
}

std::uint32_t replica_payload_index(std::uint32_t i, const GsParams& p, const LatentShape& shape) {
  const std::uint32_t cb = (shape.ch / 2) / p.f_ch;
  const std::uint32_t hb = shape.h / p.f_hw;
  const std::uint32_t wb = shape.w / p.f_hw;
  const std::uint32_t c = i / (shape.h * shape.w);
  const std::uint32_t rem = i % (shape.h * shape.w);
  const std::uint32_t y = rem / shape.w;
  const std::uint32_t x = rem % shape.w;
  return ((c % cb) * hb + (y % hb)) * wb + (x % wb);
}

BitVec diffuse(const BitVec& payload, const GsParams& p, const LatentShape& shape) {
  const std::uint32_t q = gs_capacity(shape, p);
  if (payload.size() != q)
    throw std::invalid_argument("diffuse: payload length != capacity q");
  const std::uint32_t half = std::uint32_t(shape.half_elems());
  BitVec sd(half);
  for (std::uint32_t i = 0; i < half; ++i)
    if (payload.get(replica_payload_index(i, p, shape))) sd.set(i, true);
  return sd;
}

BitVec derive_stream_key(const BitVec& seed, const BitVec& sk_c, std::size_t n_bits) {
  std::vector<std::uint8_t> material = seed.to_bytes();
  const auto sk_bytes = sk_c.to_bytes();
  material.insert(material.end(), sk_bytes.begin(), sk_bytes.end());
  const Digest256 digest = Sha256::digest(material);
  const ChaChaKey key = ChaChaKey::from_bytes(digest.data());
  std::vector<std::uint8_t> stream((n_bits + 7) / 8);
  chacha20_keystream(key, /*nonce=*/0, stream.size(), stream.data());
  return BitVec::from_bytes(stream, n_bits);
}

Eigen::ArrayXf gs_randomize(const BitVec& sd, const BitVec& K) {
  if (sd.size() != K.size()) throw std::invalid_argument("gs_randomize: length mismatch");
  Eigen::ArrayXf symbols(static_cast<Eigen::Index>(sd.size()));
  for (std::size_t i = 0; i < sd.size(); ++i)
    symbols[static_cast<Eigen::Index>(i)] = (sd.get(i) ^ K.get(i)) ? -1.0f : 1.0f;
  return symbols;
}

namespace {

template <typename Contribution>
GsDecodeResult combine_replicas(const Eigen::ArrayXd& soft_gs, const BitVec& K, const GsParams& p,
                                const LatentShape& shape, Contribution contribution) {
  p.validate_for(shape);
  const std::uint32_t half = std::uint32_t(shape.half_elems());
  if (soft_gs.size() != static_cast<Eigen::Index>(half) || K.size() != half)
    throw std::invalid_argument("gs_decode: input length != GS channel size");
  const std::uint32_t q = gs_capacity(shape, p);

  GsDecodeResult res;
  res.llr_totals = Eigen::ArrayXd::Zero(q);
  for (std::uint32_t i = 0; i < half; ++i) {
    const double sd = K.get(i) ? -soft_gs[i] : soft_gs[i];
    res.llr_totals[replica_payload_index(i, p, shape)] += contribution(sd);
  }
  res.bits = BitVec(q);
  for (std::uint32_t j = 0; j < q; ++j)
    if (res.llr_totals[j] < 0.0) res.bits.set(j, true);
  return res;
}

}  // namespace

GsDecodeResult gs_decode_soft(const Eigen::ArrayXd& soft_gs, const BitVec& K, const GsParams& p,
                              const LatentShape& shape) {
  return combine_replicas(soft_gs, K, p, shape, [](double sd) { return 2.0 * sd; });
}

GsDecodeResult gs_decode_exact_llr(const Eigen::ArrayXd& soft_gs, const BitVec& K,
                                   const GsParams& p, const LatentShape& shape, double llr_clamp) {
  return combine_replicas(soft_gs, K, p, shape, [llr_clamp](double sd) {
    sd = std::min(1.0, std::max(-1.0, sd));
    return std::min(llr_clamp, std::max(-llr_clamp, 2.0 * std::atanh(sd)));
  });
}

GsDecodeResult gs_decode_hard(const Eigen::ArrayXd& soft_gs, const BitVec& K, const GsParams& p,
                              const LatentShape& shape) {
  return combine_replicas(soft_gs, K, p, shape,
                          [](double sd) { return sd > 0.0 ? 1.0 : (sd < 0.0 ? -1.0 : 0.0); });
}

GsDecodeResult gs_decode(GsDecoder which, const Eigen::ArrayXd& soft_gs, const BitVec& K,
                         const GsParams& p, const LatentShape& shape) {
  switch (which) {
    case GsDecoder::soft:
      return gs_decode_soft(soft_gs, K, p, shape);
    case GsDecoder::exact_llr:
      return gs_decode_exact_llr(soft_gs, K, p, shape);
    case GsDecoder::hard:
      return gs_decode_hard(soft_gs, K, p, shape);
  }
  throw std::logic_error("gs_decode: unknown decoder");
}

}  // namespace latentmark
