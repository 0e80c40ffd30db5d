// Command-line front end: key generation, user management, embedding,
// extraction, detection, tracing, channel simulation, and latent audits.
//
// Exit codes: 0 success, 1 usage/config error, 2 I/O error,
// 3 verification negative (no watermark found).

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "latentmark/channel.hpp"
#include "latentmark/gs.hpp"
#include "latentmark/keys.hpp"
#include "latentmark/latent.hpp"
#include "latentmark/prc.hpp"
#include "latentmark/rng.hpp"
#include "latentmark/sampler.hpp"
#include "latentmark/sha256.hpp"
#include "latentmark/stats.hpp"

using namespace latentmark;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNegative = 3;

struct RunConfig {
  std::string keys_path = "keys.bin";
  std::string db_path = "users.csv";
  std::string shape_str = "4x64x64";
  std::uint32_t f_ch = 2;
  std::uint32_t f_hw = 4;
  std::string mode_str = "operator";
  std::string decoder_str = "soft";
  std::uint32_t g = 32;
  std::uint32_t t = 3;
  std::uint32_t r = 0;  // 0: use n - n/8
  double eta = 0.05;
  std::uint32_t n_sk = 256;
  double sigma = std::sqrt(1.5);
  int bp_iters = 100;
  int osd_order = 0;
  double llr_clamp = 15.0;
  double fail_threshold = 0.35;
  double tau_fpr = 1e-6;
  std::optional<std::uint64_t> seed;

  LatentShape shape;
  PayloadMode mode = PayloadMode::operator_tiled;
  GsDecoder decoder = GsDecoder::soft;
  PrcParams prc_params;
  GsParams gs_params;
  std::uint32_t q = 0;

  void resolve() {
    unsigned ch = 0, h = 0, w = 0;
    if (std::sscanf(shape_str.c_str(), "%ux%ux%u", &ch, &h, &w) != 3 || !ch || !h || !w)
      throw std::invalid_argument("config: shape must look like 4x64x64");
    shape = LatentShape{ch, h, w};
    if (shape.elems() % 2 != 0)
      throw std::invalid_argument("config: latent element count must be even");

    if (mode_str == "operator")
      mode = PayloadMode::operator_tiled;
    else if (mode_str == "thirdparty")
      mode = PayloadMode::third_party;
    else
      throw std::invalid_argument("config: mode must be operator or thirdparty");

    if (decoder_str == "soft")
      decoder = GsDecoder::soft;
    else if (decoder_str == "exact")
      decoder = GsDecoder::exact_llr;
    else if (decoder_str == "hard")
      decoder = GsDecoder::hard;
    else
      throw std::invalid_argument("config: decoder must be soft, exact or hard");

    const auto n = std::uint32_t(shape.half_elems());
    prc_params = PrcParams::defaults_for(n, g);
    prc_params.t = t;
    prc_params.eta = eta;
    if (r != 0) prc_params.r = r;
    prc_params.validate();

    gs_params = GsParams{f_ch, f_hw, 1};
    q = gs_capacity(shape, gs_params);
    if (mode == PayloadMode::third_party && q != 256)
      throw std::invalid_argument(
          "config: thirdparty mode needs a 256-bit capacity (32 info + 224 signature); got q=" +
          std::to_string(q));
    if (!(tau_fpr > 0.0 && tau_fpr < 1.0))
      throw std::invalid_argument("config: tau-fpr must be in (0,1)");
  }

  DecoderConfig decoder_config() const {
    DecoderConfig d;
    d.bp_iters = bp_iters;
    d.osd_order = osd_order;
    d.llr_clamp = llr_clamp;
    d.fail_threshold = fail_threshold;
    return d;
  }

  std::uint64_t master_seed() {
    if (!seed) {
      std::random_device rd;
      seed = (std::uint64_t(rd()) << 32) | rd();
      std::printf("seed: %" PRIu64 " (generated; pass --seed to reproduce)\n", *seed);
    }
    return *seed;
  }
};

std::string fingerprint(const BitVec& bits) {
  const Digest256 d = Sha256::digest(bits.to_bytes());
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%02x%02x%02x%02x", d[0], d[1], d[2], d[3]);
  return buf;
}

std::string hex_bits(const BitVec& bits) {
  const auto bytes = bits.to_bytes();
  std::string s;
  char b[3];
  for (auto v : bytes) {
    std::snprintf(b, sizeof(b), "%02x", v);
    s += b;
  }
  return s;
}

WatermarkKeySet load_keys_checked(const RunConfig& cfg) {
  WatermarkKeySet ks = load_keys(cfg.keys_path);
  if (ks.params.n != cfg.shape.half_elems())
    throw std::invalid_argument("config: key codeword length " + std::to_string(ks.params.n) +
                                " does not match shape (" +
                                std::to_string(cfg.shape.half_elems()) + ")");
  if (cfg.mode == PayloadMode::third_party && !ks.sig_keys)
    throw std::invalid_argument("config: thirdparty mode but the key file has no signature keys");
  return ks;
}

BitVec user_payload(const RunConfig& cfg, const WatermarkKeySet& ks, const UserRecord& rec) {
  if (cfg.mode == PayloadMode::operator_tiled)
    return pack_payload(rec.user_info, cfg.q, PayloadMode::operator_tiled);
  if (rec.signature) return payload_from_parts(rec.user_info, *rec.signature);
  return pack_payload(rec.user_info, cfg.q, PayloadMode::third_party, &*ks.sig_keys);
}

BitVec random_seed_bits(std::uint32_t g, std::uint64_t master, std::uint64_t stream) {
  const StreamRng rng(master, stream);
  BitVec v(g);
  for (std::uint32_t j = 0; j < g; ++j)
    if (rng.word(j) & 1) v.set(j, true);
  return v;
}

// ---------------------------------------------------------------------------

int cmd_keygen(RunConfig& cfg) {
  WatermarkKeySet ks = keygen(cfg.prc_params, cfg.n_sk, cfg.master_seed());
  if (cfg.mode == PayloadMode::third_party) ks.sig_keys = keygen_signature(*cfg.seed + 1);
  save_keys(ks, cfg.keys_path);
  std::printf("wrote %s: n=%u g=%u t=%u r=%u eta=%g%s\n", cfg.keys_path.c_str(), ks.params.n,
              ks.params.g, ks.params.t, ks.params.r, ks.params.eta,
              ks.sig_keys ? " (with signature keys)" : "");
  return kExitOk;
}

int cmd_useradd(RunConfig& cfg, std::uint32_t user_id, const std::string& info_hex) {
  const std::uint32_t info = std::uint32_t(std::stoul(info_hex, nullptr, 16));
  UserDatabase db;
  if (std::FILE* f = std::fopen(cfg.db_path.c_str(), "r")) {
    std::fclose(f);
    db = load_db(cfg.db_path);
  }
  std::optional<EcdsaSignature> sig;
  if (cfg.mode == PayloadMode::third_party) {
    const WatermarkKeySet ks = load_keys_checked(cfg);
    sig = ecdsa_sign(ks.sig_keys->sk, signed_message(info));
  }
  db.assign(user_id, info, sig);
  save_db(db, cfg.db_path);
  std::printf("user %u -> info %08x%s (%zu users)\n", user_id, info,
              sig ? " + signature" : "", db.size());
  return kExitOk;
}

int cmd_embed(RunConfig& cfg, std::uint32_t user_id, const std::string& out_path) {
  const WatermarkKeySet ks = load_keys_checked(cfg);
  const UserDatabase db = load_db(cfg.db_path);
  const BitVec payload = user_payload(cfg, ks, db.lookup(user_id));

  const std::uint64_t master = cfg.master_seed();
  const BitVec seed_bits = random_seed_bits(ks.params.g, master, 0);
  const Eigen::ArrayXf sym_prc = prc_encode(ks, seed_bits, master ^ 0x5eedb175);
  const BitVec K = derive_stream_key(seed_bits, ks.sk_c, cfg.shape.half_elems());
  const Eigen::ArrayXf sym_gs = gs_randomize(diffuse(payload, cfg.gs_params, cfg.shape), K);

  Eigen::ArrayXf symbols(sym_prc.size() + sym_gs.size());
  symbols << sym_prc, sym_gs;
  const LatentTensor z = dps_sample(symbols, cfg.shape, master ^ 0xd95a3b1e);
  save_latent(z, out_path);
  std::printf("embedded user %u into %s (seed fingerprint %s)\n", user_id, out_path.c_str(),
              fingerprint(seed_bits).c_str());
  return kExitOk;
}

struct Extraction {
  PrcDecodeResult header;
  GsDecodeResult gs;
  BitVec payload_bits;
  UnpackResult unpacked;
};

Extraction run_extraction(const RunConfig& cfg, const WatermarkKeySet& ks,
                          const LatentTensor& z) {
  const auto half = static_cast<Eigen::Index>(cfg.shape.half_elems());
  const Eigen::ArrayXd soft = posterior_estimate(z, AwgnModel{cfg.sigma});
  Extraction ex;
  ex.header = prc_decode(ks, soft.head(half), cfg.decoder_config());
  const BitVec K = derive_stream_key(ex.header.seed, ks.sk_c, cfg.shape.half_elems());
  ex.gs = gs_decode(ex.header.ok ? cfg.decoder : GsDecoder::hard, soft.tail(half), K,
                    cfg.gs_params, cfg.shape);
  ex.payload_bits = ex.gs.bits;
  ex.unpacked = unpack_payload(ex.payload_bits, cfg.mode,
                               ks.sig_keys ? &ks.sig_keys->vk : nullptr);
  return ex;
}

void print_extraction(const RunConfig& cfg, const Extraction& ex) {
  if (ex.header.ok) {
    std::printf("header: decoded (seed fingerprint %s, bp iters %d, discrepancy %.3f)\n",
                fingerprint(ex.header.seed).c_str(), ex.header.bp_iterations,
                ex.header.discrepancy);
    std::printf("payload: %s\n", hex_bits(ex.payload_bits).c_str());
    std::printf("user_info: %08x\n", ex.unpacked.user_info);
  } else {
    std::printf("header: FAILED (discrepancy %.3f); hard-decision diagnostics follow\n",
                ex.header.discrepancy);
    std::printf("payload (diagnostic): %s\n", hex_bits(ex.payload_bits).c_str());
  }
  if (cfg.mode == PayloadMode::third_party && ex.unpacked.signature_valid)
    std::printf("signature: %s\n", *ex.unpacked.signature_valid ? "valid" : "INVALID");
}

int cmd_extract(RunConfig& cfg, const std::string& in_path,
                std::optional<std::uint32_t> claimed_user) {
  const WatermarkKeySet ks = load_keys_checked(cfg);
  const LatentTensor z = load_latent(in_path);
  if (!(z.shape == cfg.shape))
    throw std::invalid_argument("config: latent shape does not match the configured shape");

  const Extraction ex = run_extraction(cfg, ks, z);
  print_extraction(cfg, ex);

  bool positive = ex.header.ok;
  if (claimed_user) {
    const UserDatabase db = load_db(cfg.db_path);
    const BitVec expected = user_payload(cfg, ks, db.lookup(*claimed_user));
    const std::uint32_t matches = acc(expected, ex.payload_bits);
    const std::uint32_t tau = calibrate_tau(cfg.q, cfg.tau_fpr);
    positive = detection_passes(matches, tau);
    std::printf("claimed user %u: bit accuracy %.4f (acc %u/%u, tau %u at FPR %.1e) -> %s\n",
                *claimed_user, double(matches) / cfg.q, matches, cfg.q, tau, cfg.tau_fpr,
                positive ? "match" : "NO MATCH");
  }
  return positive ? kExitOk : kExitNegative;
}

int cmd_detect(RunConfig& cfg, const std::string& in_path, std::uint32_t user_id) {
  const WatermarkKeySet ks = load_keys_checked(cfg);
  const LatentTensor z = load_latent(in_path);
  if (!(z.shape == cfg.shape))
    throw std::invalid_argument("config: latent shape does not match the configured shape");
  const UserDatabase db = load_db(cfg.db_path);
  const BitVec expected = user_payload(cfg, ks, db.lookup(user_id));

  const Extraction ex = run_extraction(cfg, ks, z);
  const std::uint32_t matches = acc(expected, ex.payload_bits);
  const std::uint32_t tau = calibrate_tau(cfg.q, cfg.tau_fpr);
  const bool detected = detection_passes(matches, tau);
  std::printf("acc %u/%u, tau %u (FPR(tau) = %.3e) -> %s\n", matches, cfg.q, tau,
              fpr_detection(cfg.q, tau), detected ? "watermark detected" : "no watermark");
  return detected ? kExitOk : kExitNegative;
}

int cmd_trace(RunConfig& cfg, const std::string& in_path) {
  const WatermarkKeySet ks = load_keys_checked(cfg);
  const LatentTensor z = load_latent(in_path);
  if (!(z.shape == cfg.shape))
    throw std::invalid_argument("config: latent shape does not match the configured shape");
  const UserDatabase db = load_db(cfg.db_path);

  const Extraction ex = run_extraction(cfg, ks, z);
  const std::uint32_t tau = calibrate_tau(cfg.q, cfg.tau_fpr, db.size());
  const TraceResult res = trace(db, ex.payload_bits, tau, cfg.mode);
  if (res.passed) {
    std::printf("traced to user %u (acc %u/%u > tau %u; N=%zu, FPR target %.1e)\n",
                *res.matched_user, res.best_acc, cfg.q, tau, db.size(), cfg.tau_fpr);
    return kExitOk;
  }
  std::printf("no user traced (best acc %u/%u <= tau %u; N=%zu)\n", res.best_acc, cfg.q, tau,
              db.size());
  return kExitNegative;
}

int cmd_simulate(RunConfig& cfg, const std::vector<std::string>& kinds,
                 const std::vector<double>& sigmas, const std::vector<double>& ps,
                 const std::vector<double>& factors, int trials, const std::string& out_path,
                 bool isolate_gs, std::uint64_t trace_users) {
  const WatermarkKeySet ks = load_keys_checked(cfg);
  if (kinds.empty()) throw std::invalid_argument("simulate: at least one --channel required");

  std::size_t si = 0, pi = 0, fi = 0;
  std::vector<ChannelSpec> parts;
  for (const auto& kind : kinds) {
    if (kind == "awgn") {
      if (si >= sigmas.size()) throw std::invalid_argument("simulate: awgn needs --sigma");
      parts.push_back(ChannelSpec::awgn(sigmas[si++]));
    } else if (kind == "signflip") {
      if (pi >= ps.size()) throw std::invalid_argument("simulate: signflip needs --p");
      parts.push_back(ChannelSpec::signflip(ps[pi++]));
    } else if (kind == "resample") {
      if (pi >= ps.size()) throw std::invalid_argument("simulate: resample needs --p");
      parts.push_back(ChannelSpec::resample(ps[pi++]));
    } else if (kind == "scale") {
      if (fi >= factors.size()) throw std::invalid_argument("simulate: scale needs --factor");
      parts.push_back(ChannelSpec::scale(factors[fi++]));
    } else {
      throw std::invalid_argument("simulate: unknown channel kind " + kind);
    }
  }

  // One awgn channel with several --sigma values sweeps the parameter;
  // several --channel flags compose into a single pipeline.
  std::vector<ChannelSpec> rows;
  if (kinds.size() == 1 && kinds[0] == "awgn" && si < sigmas.size()) {
    rows.push_back(parts[0]);
    while (si < sigmas.size()) rows.push_back(ChannelSpec::awgn(sigmas[si++]));
  } else if (parts.size() == 1) {
    rows.push_back(parts[0]);
  } else {
    rows.push_back(ChannelSpec::compose(parts));
  }

  TrialConfig tc;
  tc.shape = cfg.shape;
  tc.gs = cfg.gs_params;
  tc.mode = cfg.mode;
  tc.decoder = cfg.decoder;
  tc.prc_decoder = cfg.decoder_config();
  tc.posterior_model = AwgnModel{cfg.sigma};
  tc.tau = calibrate_tau(cfg.q, cfg.tau_fpr);
  tc.use_true_stream_key = isolate_gs;

  const std::uint64_t master = cfg.master_seed();
  std::vector<std::vector<TrialRecord>> groups;
  for (std::size_t row = 0; row < rows.size(); ++row)
    groups.push_back(run_trials(ks, tc, rows[row], trials, master + row));

  const std::uint32_t tau_trace = calibrate_tau(cfg.q, cfg.tau_fpr, trace_users);
  const std::string csv = sweep_report(groups, cfg.q, tau_trace);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    std::FILE* f = std::fopen(out_path.c_str(), "w");
    if (!f) throw std::runtime_error("simulate: cannot open for writing: " + out_path);
    std::fputs(csv.c_str(), f);
    std::fclose(f);
    std::printf("wrote %s (%zu rows)\n", out_path.c_str(), rows.size());
  }
  return kExitOk;
}

int cmd_audit(RunConfig& cfg, int n_latents, const std::string& samples_path,
              std::uint32_t fixed_info, bool zero_stream_key) {
  Eigen::ArrayXd pooled;
  if (!samples_path.empty()) {
    const LatentTensor t = load_latent(samples_path);
    pooled = t.values.cast<double>();
    std::printf("auditing %lld elements from %s\n", (long long)pooled.size(),
                samples_path.c_str());
  } else {
    const WatermarkKeySet ks = load_keys_checked(cfg);
    const std::uint64_t master = cfg.master_seed();
    const BitVec payload =
        cfg.mode == PayloadMode::third_party
            ? pack_payload(fixed_info, cfg.q, cfg.mode, &*ks.sig_keys)
            : pack_payload(fixed_info, cfg.q, cfg.mode);
    const BitVec sd = diffuse(payload, cfg.gs_params, cfg.shape);
    const auto elems = static_cast<Eigen::Index>(cfg.shape.elems());
    pooled.resize(elems * n_latents);
    for (int i = 0; i < n_latents; ++i) {
      const BitVec seed_bits = random_seed_bits(ks.params.g, master, std::uint64_t(i) * 2);
      const Eigen::ArrayXf sym_prc =
          prc_encode(ks, seed_bits, master ^ (std::uint64_t(i) * 2 + 1));
      BitVec K = derive_stream_key(seed_bits, ks.sk_c, cfg.shape.half_elems());
      if (zero_stream_key) K = BitVec(cfg.shape.half_elems());
      const Eigen::ArrayXf sym_gs = gs_randomize(sd, K);
      Eigen::ArrayXf symbols(sym_prc.size() + sym_gs.size());
      symbols << sym_prc, sym_gs;
      const LatentTensor z = dps_sample(symbols, cfg.shape, master + 0x100000 + i);
      pooled.segment(i * elems, elems) = z.values.cast<double>();
    }
    std::printf("auditing %lld watermarked elements (%d latents, fixed info %08x%s)\n",
                (long long)pooled.size(), n_latents, fixed_info,
                zero_stream_key ? ", stream key zeroed" : "");
  }

  const NormalityReport rep = audit_normality(pooled);
  std::printf("mean      % .6f\n", rep.mean);
  std::printf("variance  % .6f\n", rep.variance);
  std::printf("K-S       stat %.6g  p %.4g  -> %s\n", rep.ks_stat, rep.ks_p,
              rep.ks_p > 0.01 ? "pass" : "FAIL");
  std::printf("Jarque-Bera stat %.6g  p %.4g  -> %s\n", rep.jb_stat, rep.jb_p,
              rep.jb_p > 0.01 ? "pass" : "FAIL");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space watermark codec and channel-simulation harness"};
  app.set_config("--config", "", "key=value config file; flags take precedence");

  RunConfig cfg;
  app.add_option("--keys", cfg.keys_path, "watermark key file")->capture_default_str();
  app.add_option("--db", cfg.db_path, "user database file")->capture_default_str();
  app.add_option("--shape", cfg.shape_str, "latent shape CHxHxW")->capture_default_str();
  app.add_option("--f-ch", cfg.f_ch, "channel replication factor")->capture_default_str();
  app.add_option("--f-hw", cfg.f_hw, "spatial replication factor")->capture_default_str();
  app.add_option("--mode", cfg.mode_str, "operator|thirdparty")->capture_default_str();
  app.add_option("--decoder", cfg.decoder_str, "soft|exact|hard")->capture_default_str();
  app.add_option("--g", cfg.g, "seed length in bits")->capture_default_str();
  app.add_option("--t", cfg.t, "parity row sparsity")->capture_default_str();
  app.add_option("--r", cfg.r, "parity checks (0: n - n/8)")->capture_default_str();
  app.add_option("--eta", cfg.eta, "encoder noise rate")->capture_default_str();
  app.add_option("--n-sk", cfg.n_sk, "GS private key bits")->capture_default_str();
  app.add_option("--sigma", cfg.sigma, "posterior model sigma")->capture_default_str();
  app.add_option("--bp-iters", cfg.bp_iters, "BP iteration cap")->capture_default_str();
  app.add_option("--osd-order", cfg.osd_order, "OSD reprocessing order (0|1)")
      ->capture_default_str();
  app.add_option("--llr-clamp", cfg.llr_clamp, "LLR clamp")->capture_default_str();
  app.add_option("--fail-threshold", cfg.fail_threshold, "decode-failure threshold")
      ->capture_default_str();
  app.add_option("--tau-fpr", cfg.tau_fpr, "target FPR for threshold calibration")
      ->capture_default_str();
  std::uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "master RNG seed");

  app.require_subcommand(1);

  auto* keygen_cmd = app.add_subcommand("keygen", "generate and save the watermark key set");

  auto* useradd_cmd = app.add_subcommand("useradd", "assign a watermark to a user");
  std::uint32_t useradd_id = 0;
  std::string useradd_info;
  useradd_cmd->add_option("--user", useradd_id, "user id")->required();
  useradd_cmd->add_option("--info", useradd_info, "32-bit user info as hex")->required();

  auto* embed_cmd = app.add_subcommand("embed", "embed a user watermark into a fresh latent");
  std::uint32_t embed_user = 0;
  std::string embed_out = "latent.bin";
  embed_cmd->add_option("--user", embed_user, "user id")->required();
  embed_cmd->add_option("--out", embed_out, "output latent file")->capture_default_str();

  auto* extract_cmd = app.add_subcommand("extract", "extract the watermark from a latent");
  std::string extract_in;
  std::uint32_t extract_user = 0;
  extract_cmd->add_option("--in", extract_in, "latent file")->required();
  auto* extract_user_opt = extract_cmd->add_option("--user", extract_user, "claimed user id");

  auto* detect_cmd = app.add_subcommand("detect", "test a latent against a user watermark");
  std::string detect_in;
  std::uint32_t detect_user = 0;
  detect_cmd->add_option("--in", detect_in, "latent file")->required();
  detect_cmd->add_option("--user", detect_user, "user id")->required();

  auto* trace_cmd = app.add_subcommand("trace", "trace a latent against the user database");
  std::string trace_in;
  trace_cmd->add_option("--in", trace_in, "latent file")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "run embed->channel->extract trials");
  std::vector<std::string> sim_channels;
  std::vector<double> sim_sigmas, sim_ps, sim_factors;
  int sim_trials = 100;
  std::string sim_out;
  bool sim_isolate = false;
  std::uint64_t sim_trace_users = 1000000;
  sim_cmd->add_option("--channel", sim_channels, "awgn|signflip|resample|scale (repeatable)")
      ->required();
  sim_cmd->add_option("--sigma", sim_sigmas, "awgn sigma (repeat for a sweep)");
  sim_cmd->add_option("--p", sim_ps, "signflip/resample probability");
  sim_cmd->add_option("--factor", sim_factors, "scale factor");
  sim_cmd->add_option("--trials", sim_trials, "trials per point")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "CSV output path (default: stdout)");
  sim_cmd->add_flag("--isolate-gs", sim_isolate,
                    "decode GS with the true stream key (decoder ablations)");
  sim_cmd->add_option("--trace-users", sim_trace_users,
                      "database size assumed for the trace-rate column")
      ->capture_default_str();

  auto* audit_cmd = app.add_subcommand("audit", "latent distribution normality audit");
  int audit_n = 100;
  std::string audit_samples;
  std::string audit_info_hex = "a5a5a5a5";
  bool audit_zero_key = false;
  audit_cmd->add_option("--n-latents", audit_n, "latents to generate")->capture_default_str();
  audit_cmd->add_option("--samples", audit_samples, "audit an existing latent file instead");
  audit_cmd->add_option("--info", audit_info_hex, "fixed payload info (hex)")
      ->capture_default_str();
  audit_cmd->add_flag("--zero-stream-key", audit_zero_key,
                      "degenerate mode: disable stream-key randomization (testing only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*seed_opt) cfg.seed = seed_flag;
    cfg.resolve();
    if (*keygen_cmd) return cmd_keygen(cfg);
    if (*useradd_cmd) return cmd_useradd(cfg, useradd_id, useradd_info);
    if (*embed_cmd) return cmd_embed(cfg, embed_user, embed_out);
    if (*extract_cmd)
      return cmd_extract(cfg, extract_in,
                         *extract_user_opt ? std::optional<std::uint32_t>(extract_user)
                                           : std::nullopt);
    if (*detect_cmd) return cmd_detect(cfg, detect_in, detect_user);
    if (*trace_cmd) return cmd_trace(cfg, trace_in);
    if (*sim_cmd)
      return cmd_simulate(cfg, sim_channels, sim_sigmas, sim_ps, sim_factors, sim_trials,
                          sim_out, sim_isolate, sim_trace_users);
    if (*audit_cmd)
      return cmd_audit(cfg, audit_n, audit_samples,
                       std::uint32_t(std::stoul(audit_info_hex, nullptr, 16)), audit_zero_key);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}
