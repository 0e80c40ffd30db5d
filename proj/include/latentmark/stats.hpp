#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "latentmark/bitvec.hpp"
#include "latentmark/gs.hpp"
#include "latentmark/keys.hpp"
#include "latentmark/sampler.hpp"

namespace latentmark {

/// Number of matching bits between two equal-length watermark sequences.
std::uint32_t acc(const BitVec& s, const BitVec& s_prime);

/// FPR(tau) = P(Acc > tau) for Acc ~ Binomial(q, 1/2); log-gamma summation,
/// stable up to q = 4096. Agrees with the regularized incomplete beta form
/// B_{1/2}(tau+1, q-tau).
double fpr_detection(std::uint32_t q, std::uint32_t tau);

/// Exact traceability FPR 1 - (1 - FPR(tau))^N.
double fpr_traceability(std::uint32_t q, std::uint32_t tau, std::uint64_t n_users);
/// The N*FPR union-bound approximation, for reporting.
double fpr_traceability_approx(std::uint32_t q, std::uint32_t tau, std::uint64_t n_users);

/// Smallest tau whose (detection or, with n_users, traceability) FPR is at
/// most target_fpr. target_fpr must lie in (0,1).
std::uint32_t calibrate_tau(std::uint32_t q, double target_fpr,
                            std::optional<std::uint64_t> n_users = {});

/// Detection decision: Acc >= tau, the test stated in the source scheme.
/// Note the asymmetry with trace below, whose pass condition is strictly
/// greater per its contract.
inline bool detection_passes(std::uint32_t acc_count, std::uint32_t tau) {
  return acc_count >= tau;
}

struct TraceResult {
  std::optional<std::uint32_t> matched_user;  // set only when passed
  std::uint32_t best_acc = 0;
  bool passed = false;  // best_acc > tau
};

/// Per-user expected watermark sequences, precomputed once per database.
struct WatermarkTable {
  std::vector<std::pair<std::uint32_t, BitVec>> entries;  // ascending user_id

  static WatermarkTable build(const UserDatabase& db, std::uint32_t q, PayloadMode mode);
};

/// Acc against every user; passes iff the maximum exceeds tau strictly,
/// ties broken toward the lowest user_id.
TraceResult trace(const WatermarkTable& table, const BitVec& extracted, std::uint32_t tau);
TraceResult trace(const UserDatabase& db, const BitVec& extracted, std::uint32_t tau,
                  PayloadMode mode);

struct NormalityReport {
  double ks_stat = 0.0;
  double ks_p = 0.0;
  double jb_stat = 0.0;
  double jb_p = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

/// One-sample K-S against N(0,1) with the asymptotic Kolmogorov p-value,
/// plus Jarque-Bera from sample skewness/kurtosis. Needs >= 100 samples.
NormalityReport audit_normality(const Eigen::ArrayXd& samples);

/// Matched-channel calibration check of the posterior formula: simulates
/// (symbol, z, z' = z + sigma_sim * noise), bins z' into 50 equal-count bins
/// and returns the largest |E[symbol | bin] - erf(mean z' / denom)|.
double audit_posterior(const AwgnModel& model, double sigma_sim, std::int64_t n_samples,
                       std::uint64_t rng_seed);

}  // namespace latentmark
