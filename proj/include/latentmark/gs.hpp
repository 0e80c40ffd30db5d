#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "latentmark/bitvec.hpp"
#include "latentmark/ecdsa.hpp"
#include "latentmark/latent.hpp"

namespace latentmark {

/// Replication factors of the GS channel. Each payload bit is embedded
/// f_ch * f_hw^2 times.
struct GsParams {
  std::uint32_t f_ch = 2;
  std::uint32_t f_hw = 4;
  std::uint32_t v = 1;

  void validate_for(const LatentShape& shape) const;
  std::uint32_t replication() const { return f_ch * f_hw * f_hw; }
};

/// Payload capacity q = v*ch*h*w / (2*f_ch*f_hw^2).
std::uint32_t gs_capacity(const LatentShape& shape, const GsParams& p);

enum class PayloadMode { operator_tiled, third_party };

/// Operator mode tiles the 32-bit user info across the q payload bits;
/// third-party mode appends a 224-bit ECDSA signature (q must be 256).
BitVec pack_payload(std::uint32_t user_info, std::uint32_t q, PayloadMode mode,
                    const EcdsaKeyPair* signer = nullptr);

/// Third-party payload from a previously stored signature.
BitVec payload_from_parts(std::uint32_t user_info, const EcdsaSignature& sig);

/// Message bytes covered by the payload signature (4-byte big-endian info).
std::vector<std::uint8_t> signed_message(std::uint32_t user_info);

struct UnpackResult {
  std::uint32_t user_info = 0;
  std::optional<bool> signature_valid;  // present only in third-party mode
};

UnpackResult unpack_payload(const BitVec& bits, PayloadMode mode, const EcPoint* vk = nullptr);

/// Replicates the payload across the GS half: the payload is laid out as a
/// [(ch/2)/f_ch, h/f_hw, w/f_hw] block and tiled f_ch times along channels
/// and f_hw times along each spatial axis.
BitVec diffuse(const BitVec& payload, const GsParams& p, const LatentShape& shape);

/// Payload index that GS-half element i replicates.
std::uint32_t replica_payload_index(std::uint32_t i, const GsParams& p, const LatentShape& shape);

/// K = ChaCha20 keystream keyed by SHA-256(seed || sk_c).
BitVec derive_stream_key(const BitVec& seed, const BitVec& sk_c, std::size_t n_bits);

/// Symbols (-1)^(sd xor K) in {-1,+1}.
Eigen::ArrayXf gs_randomize(const BitVec& sd, const BitVec& K);

enum class GsDecoder { soft, exact_llr, hard };

struct GsDecodeResult {
  BitVec bits;
  /// Per payload bit: accumulated LLR (soft/exact) or vote margin (hard).
  /// Sign ties resolve to bit 0.
  Eigen::ArrayXd llr_totals;
};

/// First-order LLR combining: LLR_j = sum over replicas of 2 * s'd.
GsDecodeResult gs_decode_soft(const Eigen::ArrayXd& soft_gs, const BitVec& K, const GsParams& p,
                              const LatentShape& shape);
/// Exact combining: LLR_j = sum of 2*artanh(s'd), clamped per replica.
GsDecodeResult gs_decode_exact_llr(const Eigen::ArrayXd& soft_gs, const BitVec& K,
                                   const GsParams& p, const LatentShape& shape,
                                   double llr_clamp = 15.0);
/// Majority vote over hard signs (the Gaussian Shading baseline).
GsDecodeResult gs_decode_hard(const Eigen::ArrayXd& soft_gs, const BitVec& K, const GsParams& p,
                              const LatentShape& shape);

GsDecodeResult gs_decode(GsDecoder which, const Eigen::ArrayXd& soft_gs, const BitVec& K,
                         const GsParams& p, const LatentShape& shape);

}  // namespace latentmark
