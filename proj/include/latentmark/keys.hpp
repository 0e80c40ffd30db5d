#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latentmark/bitvec.hpp"
#include "latentmark/ecdsa.hpp"

namespace latentmark {

/// LDPC code parameters. n is the codeword length (half the latent
/// element count), g the seed length, t the row sparsity of the parity
/// check matrix, r the number of parity checks, eta the Bernoulli noise
/// rate of the encoder.
struct PrcParams {
  std::uint32_t n = 8192;
  std::uint32_t g = 32;
  std::uint32_t t = 3;
  std::uint32_t r = 7168;
  double eta = 0.05;

  /// Throws std::invalid_argument when any invariant fails.
  void validate() const;

  /// Defaults for a given codeword length: t = 3, eta = 0.05, and
  /// r = n - n/8. Denser check matrices decode better, but beyond
  /// roughly 0.9*n the random sparse system degenerates: most
  /// coordinates become forced to zero in every codeword, which both
  /// breaks decoding and makes encoder output distinguishable from
  /// random bits.
  static PrcParams defaults_for(std::uint32_t n, std::uint32_t g = 32);
};

/// r rows, each a sorted list of exactly t column indices.
struct SparseParityMatrix {
  std::uint32_t n_cols = 0;
  std::vector<std::vector<std::uint32_t>> rows;

  /// Syndrome bit i = parity of x restricted to row i's support.
  BitVec syndrome(const BitVec& x) const;
};

/// n x g generator over F2, stored as g columns of n bits. Columns span a
/// g-dimensional subspace of the parity-check null space.
struct GeneratorMatrix {
  std::uint32_t n = 0;
  std::uint32_t g = 0;
  std::vector<BitVec> cols;

  /// Codeword G * m for a g-bit message.
  BitVec encode(const BitVec& m) const;
};

struct WatermarkKeySet {
  PrcParams params;
  SparseParityMatrix P;
  GeneratorMatrix G;
  BitVec sk_c;
  std::optional<EcdsaKeyPair> sig_keys;

  bool operator==(const WatermarkKeySet& o) const;
};

/// Generates the LDPC pair and the GS private key. All randomness comes
/// from rng_seed; the same seed reproduces the same key set bit for bit.
/// Throws on invalid params ("null space too small" when r > n - g) or a
/// degenerate parity structure.
WatermarkKeySet keygen(const PrcParams& params, std::uint32_t n_sk, std::uint64_t rng_seed);

/// Fresh ECDSA signing/verification pair; pass a seeded rng for
/// reproducible keys in tests.
EcdsaKeyPair keygen_signature(std::uint64_t rng_seed);

void save_keys(const WatermarkKeySet& ks, const std::string& path);
WatermarkKeySet load_keys(const std::string& path);

struct UserRecord {
  std::uint32_t user_info = 0;
  std::optional<EcdsaSignature> signature;

  bool operator==(const UserRecord&) const = default;
};

/// user_id -> (user_info, optional stored signature). Text format:
/// one record per line, "user_id,hex_user_info[,hex_signature]".
class UserDatabase {
 public:
  void assign(std::uint32_t user_id, std::uint32_t user_info,
              std::optional<EcdsaSignature> signature = {});
  const UserRecord& lookup(std::uint32_t user_id) const;
  bool contains(std::uint32_t user_id) const { return records_.count(user_id) != 0; }
  std::size_t size() const { return records_.size(); }
  const std::map<std::uint32_t, UserRecord>& records() const { return records_; }

 private:
  std::map<std::uint32_t, UserRecord> records_;
};

void save_db(const UserDatabase& db, const std::string& path);
UserDatabase load_db(const std::string& path);

}  // namespace latentmark
