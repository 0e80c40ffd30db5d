#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latentmark/gs.hpp"
#include "latentmark/keys.hpp"
#include "latentmark/latent.hpp"
#include "latentmark/prc.hpp"
#include "latentmark/sampler.hpp"

namespace latentmark {

/// Latent-space noise channel standing in for generate -> distort -> invert.
struct ChannelSpec {
  enum class Kind { awgn, signflip, resample, scale, compose };

  Kind kind = Kind::awgn;
  double sigma = 0.0;   // awgn
  double p = 0.0;       // signflip / resample
  double factor = 1.0;  // scale
  std::vector<ChannelSpec> children;

  static ChannelSpec awgn(double sigma);
  static ChannelSpec signflip(double p);
  static ChannelSpec resample(double p);
  static ChannelSpec scale(double factor);
  static ChannelSpec compose(std::vector<ChannelSpec> children);

  void validate() const;
  std::string label() const;
};

/// Deterministic given rng_seed; per-element draws are counter based.
LatentTensor apply_channel(const LatentTensor& z, const ChannelSpec& spec, std::uint64_t rng_seed);

struct TrialRecord {
  ChannelSpec channel;
  bool seed_decoded = false;   // PRC decode accepted and matched the embedded seed
  double bit_accuracy = 0.0;   // matching payload bits / q
  bool detected_at_tau = false;
  std::optional<bool> signature_valid;
};

struct TrialConfig {
  LatentShape shape;
  GsParams gs;
  PayloadMode mode = PayloadMode::operator_tiled;
  GsDecoder decoder = GsDecoder::soft;
  DecoderConfig prc_decoder;
  AwgnModel posterior_model;
  std::uint32_t tau = 0;
  /// Decode the GS channel with the embedding-side stream key instead of the
  /// one derived from the decoded seed; isolates GS decoder comparisons from
  /// header failures.
  bool use_true_stream_key = false;
  std::optional<std::uint32_t> fixed_user_info;
};

/// Fresh seed -> embed -> channel -> posterior -> decode, once per trial.
/// Trial k depends only on (rng_seed, k), so records are reproducible and
/// order independent.
std::vector<TrialRecord> run_trials(const WatermarkKeySet& ks, const TrialConfig& cfg,
                                    const ChannelSpec& spec, int n_trials,
                                    std::uint64_t rng_seed);

/// CSV with one row per group: channel label, n, seed-decode rate, mean/std
/// bit accuracy, TPR at the configured tau, trace rate at tau_trace.
/// Empty groups are skipped. Deterministic formatting.
std::string sweep_report(const std::vector<std::vector<TrialRecord>>& groups, std::uint32_t q,
                         std::uint32_t tau_trace);

}  // namespace latentmark
