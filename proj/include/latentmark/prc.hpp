#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "latentmark/bitvec.hpp"
#include "latentmark/keys.hpp"

namespace latentmark {

struct DecoderConfig {
  int bp_iters = 100;
  int osd_order = 0;          // 0 or 1; order 1 reprocesses single flips of the basis
  double llr_clamp = 15.0;
  double fail_threshold = 0.35;  // accept when weighted discrepancy <= this * sum|LLR|
};

/// llr_i = 2*artanh(soft_i), clamped to [-clamp, clamp]. Positive LLR means
/// symbol +1, i.e. bit 0.
Eigen::ArrayXd soft_to_llr(const Eigen::ArrayXd& soft, double clamp);

/// Codeword bits G*seed xor Bernoulli(eta) noise.
BitVec prc_encode_bits(const WatermarkKeySet& ks, const BitVec& seed, std::uint64_t rng_seed,
                       double eta);

/// Symbols (-1)^bit in {-1,+1}; eta taken from the key set's params unless
/// overridden.
Eigen::ArrayXf prc_encode(const WatermarkKeySet& ks, const BitVec& seed, std::uint64_t rng_seed);
Eigen::ArrayXf prc_encode(const WatermarkKeySet& ks, const BitVec& seed, std::uint64_t rng_seed,
                          double eta);

struct PrcDecodeResult {
  bool ok = false;       // accepted by the reliability-weighted distance test
  BitVec seed;           // best candidate, valid even when !ok
  bool bp_converged = false;
  int bp_iterations = 0;
  double discrepancy = 0.0;  // weighted mismatch / sum|LLR| of the returned candidate
};

/// Sum-product BP on the parity-check Tanner graph followed by ordered
/// statistics re-encoding over G. Decode failure is a result, not an error.
PrcDecodeResult prc_decode(const WatermarkKeySet& ks, const Eigen::ArrayXd& soft,
                           const DecoderConfig& cfg = {});

}  // namespace latentmark
