#include "latentmark/channel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "latentmark/rng.hpp"

namespace latentmark {

ChannelSpec ChannelSpec::awgn(double sigma) {
  ChannelSpec s;
  s.kind = Kind::awgn;
  s.sigma = sigma;
  return s;
}

ChannelSpec ChannelSpec::signflip(double p) {
  ChannelSpec s;
  s.kind = Kind::signflip;
  s.p = p;
  return s;
}

ChannelSpec ChannelSpec::resample(double p) {
  ChannelSpec s;
  s.kind = Kind::resample;
  s.p = p;
  return s;
}

ChannelSpec ChannelSpec::scale(double factor) {
  ChannelSpec s;
  s.kind = Kind::scale;
  s.factor = factor;
  return s;
}

ChannelSpec ChannelSpec::compose(std::vector<ChannelSpec> children) {
  ChannelSpec s;
  s.kind = Kind::compose;
  s.children = std::move(children);
  return s;
}

void ChannelSpec::validate() const {
  switch (kind) {
    case Kind::awgn:
      if (!(sigma >= 0.0)) throw std::invalid_argument("channel awgn: sigma must be >= 0");
      return;
    case Kind::signflip:
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("channel signflip: p must be in [0,1]");
      return;
    case Kind::resample:
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("channel resample: p must be in [0,1]");
      return;
    case Kind::scale:
      if (!(factor > 0.0)) throw std::invalid_argument("channel scale: factor must be > 0");
      return;
    case Kind::compose:
      if (children.empty()) throw std::invalid_argument("channel compose: no children");
      for (const auto& c : children) c.validate();
      return;
  }
  throw std::logic_error("channel: unknown kind");
}

std::string ChannelSpec::label() const {
  char buf[64];
  switch (kind) {
    case Kind::awgn:
      std::snprintf(buf, sizeof(buf), "awgn(sigma=%g)", sigma);
      return buf;
    case Kind::signflip:
      std::snprintf(buf, sizeof(buf), "signflip(p=%g)", p);
      return buf;
    case Kind::resample:
      std::snprintf(buf, sizeof(buf), "resample(p=%g)", p);
      return buf;
    case Kind::scale:
      std::snprintf(buf, sizeof(buf), "scale(factor=%g)", factor);
      return buf;
    case Kind::compose: {
      std::string s = "compose[";
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) s += ";";
        s += children[i].label();
      }
      s += "]";
      return s;
    }
  }
  return "?";
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

LatentTensor apply_channel(const LatentTensor& z, const ChannelSpec& spec,
                           std::uint64_t rng_seed) {
  spec.validate();
  LatentTensor out = z;
  switch (spec.kind) {
    case ChannelSpec::Kind::awgn: {
      if (spec.sigma == 0.0) return out;
      const StreamRng rng(rng_seed, 0);
      for (Eigen::Index i = 0; i < out.values.size(); ++i)
        out.values[i] += static_cast<float>(spec.sigma * rng.normal(std::uint64_t(i)));
      return out;
    }
    case ChannelSpec::Kind::signflip: {
      const StreamRng rng(rng_seed, 0);
      for (Eigen::Index i = 0; i < out.values.size(); ++i)
        if (rng.bernoulli(std::uint64_t(i), spec.p)) out.values[i] = -out.values[i];
      return out;
    }
    case ChannelSpec::Kind::resample: {
      const StreamRng decide(rng_seed, 0);
      const StreamRng draw(rng_seed, 1);
      for (Eigen::Index i = 0; i < out.values.size(); ++i)
        if (decide.bernoulli(std::uint64_t(i), spec.p))
          out.values[i] = static_cast<float>(draw.normal(std::uint64_t(i)));
      return out;
    }
    case ChannelSpec::Kind::scale:
      out.values *= static_cast<float>(spec.factor);
      return out;
    case ChannelSpec::Kind::compose: {
      for (std::size_t k = 0; k < spec.children.size(); ++k)
        out = apply_channel(out, spec.children[k], mix_seed(rng_seed, k));
      return out;
    }
  }
  throw std::logic_error("channel: unknown kind");
}

std::vector<TrialRecord> run_trials(const WatermarkKeySet& ks, const TrialConfig& cfg,
                                    const ChannelSpec& spec, int n_trials,
                                    std::uint64_t rng_seed) {
  if (n_trials < 1) throw std::invalid_argument("run_trials: n_trials must be >= 1");
  spec.validate();
  cfg.gs.validate_for(cfg.shape);
  if (ks.params.n != cfg.shape.half_elems())
    throw std::invalid_argument("run_trials: key codeword length != half the latent elements");
  const std::uint32_t q = gs_capacity(cfg.shape, cfg.gs);
  const std::uint32_t half = std::uint32_t(cfg.shape.half_elems());
  const EcdsaKeyPair* signer = nullptr;
  if (cfg.mode == PayloadMode::third_party) {
    if (!ks.sig_keys)
      throw std::invalid_argument("run_trials: third-party mode needs signature keys");
    signer = &*ks.sig_keys;
  }

  std::vector<TrialRecord> records;
  records.reserve(std::size_t(n_trials));
  for (int trial = 0; trial < n_trials; ++trial) {
    const std::uint64_t base = std::uint64_t(trial) * 8;

    const std::uint32_t info = cfg.fixed_user_info
                                   ? *cfg.fixed_user_info
                                   : std::uint32_t(StreamRng(rng_seed, base + 1).word(0));
    const BitVec payload = pack_payload(info, q, cfg.mode, signer);

    BitVec seed_bits(ks.params.g);
    {
      const StreamRng seed_rng(rng_seed, base + 0);
      for (std::uint32_t j = 0; j < ks.params.g; ++j)
        if (seed_rng.word(j) & 1) seed_bits.set(j, true);
    }

    const Eigen::ArrayXf sym_prc = prc_encode(ks, seed_bits, mix_seed(rng_seed, base + 2));
    const BitVec K = derive_stream_key(seed_bits, ks.sk_c, half);
    const BitVec sd = diffuse(payload, cfg.gs, cfg.shape);
    const Eigen::ArrayXf sym_gs = gs_randomize(sd, K);

    Eigen::ArrayXf symbols(sym_prc.size() + sym_gs.size());
    symbols << sym_prc, sym_gs;
    const LatentTensor z = dps_sample(symbols, cfg.shape, mix_seed(rng_seed, base + 3));
    const LatentTensor z_noisy = apply_channel(z, spec, mix_seed(rng_seed, base + 4));

    const Eigen::ArrayXd soft = posterior_estimate(z_noisy, cfg.posterior_model);
    const Eigen::ArrayXd soft_prc = soft.head(half);
    const Eigen::ArrayXd soft_gs = soft.tail(half);

    const PrcDecodeResult dec = prc_decode(ks, soft_prc, cfg.prc_decoder);
    const BitVec K_prime = cfg.use_true_stream_key
                               ? K
                               : derive_stream_key(dec.seed, ks.sk_c, half);
    const GsDecodeResult gsr = gs_decode(cfg.decoder, soft_gs, K_prime, cfg.gs, cfg.shape);

    TrialRecord rec;
    rec.channel = spec;
    rec.seed_decoded = dec.ok && dec.seed == seed_bits;
    const std::uint32_t matches = q - std::uint32_t(gsr.bits.hamming(payload));
    rec.bit_accuracy = double(matches) / double(q);
    rec.detected_at_tau = matches >= cfg.tau;
    if (cfg.mode == PayloadMode::third_party)
      rec.signature_valid = unpack_payload(gsr.bits, cfg.mode, &ks.sig_keys->vk).signature_valid;
    records.push_back(std::move(rec));
  }
  return records;
}

std::string sweep_report(const std::vector<std::vector<TrialRecord>>& groups, std::uint32_t q,
                         std::uint32_t tau_trace) {
  std::string csv =
      "channel,n,seed_decode_rate,bit_acc_mean,bit_acc_std,tpr_at_tau,trace_rate\n";
  char line[256];
  for (const auto& group : groups) {
    if (group.empty()) continue;
    const double n = double(group.size());
    double seed_rate = 0.0, mean = 0.0, tpr = 0.0, trace_rate = 0.0;
    for (const auto& r : group) {
      seed_rate += r.seed_decoded ? 1.0 : 0.0;
      mean += r.bit_accuracy;
      tpr += r.detected_at_tau ? 1.0 : 0.0;
      const auto acc_count = std::llround(r.bit_accuracy * q);
      trace_rate += acc_count > tau_trace ? 1.0 : 0.0;
    }
    seed_rate /= n;
    mean /= n;
    tpr /= n;
    trace_rate /= n;
    double var = 0.0;
    for (const auto& r : group) var += (r.bit_accuracy - mean) * (r.bit_accuracy - mean);
    const double stddev = std::sqrt(var / n);
    std::snprintf(line, sizeof(line), "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  group.front().channel.label().c_str(), group.size(), seed_rate, mean, stddev,
                  tpr, trace_rate);
    csv += line;
  }
  return csv;
}

}  // namespace latentmark
