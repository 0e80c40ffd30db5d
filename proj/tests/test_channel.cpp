#include <doctest.h>

#include <cmath>

#include "latentmark/channel.hpp"
#include "latentmark/rng.hpp"
#include "latentmark/stats.hpp"
#include "test_util.hpp"

using namespace latentmark;

namespace {

// Latent shape matching the small key set (n = 2048).
const LatentShape kShape{4, 32, 32};
const GsParams kGs{2, 4, 1};  // q = 2048/32 = 64

LatentTensor random_latent(const LatentShape& shape, std::uint64_t seed) {
  LatentTensor t = make_latent(shape);
  const StreamRng rng(seed, 0);
  for (Eigen::Index i = 0; i < t.values.size(); ++i)
    t.values[i] = float(rng.normal(std::uint64_t(i)));
  return t;
}

TrialConfig small_trial_config() {
  TrialConfig cfg;
  cfg.shape = kShape;
  cfg.gs = kGs;
  cfg.mode = PayloadMode::operator_tiled;
  cfg.prc_decoder.bp_iters = 50;
  cfg.tau = calibrate_tau(gs_capacity(kShape, kGs), 1e-6);
  return cfg;
}

}  // namespace

TEST_CASE("channel parameter validation") {
  CHECK_THROWS_AS(apply_channel(random_latent(kShape, 1), ChannelSpec::awgn(-1.0), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_channel(random_latent(kShape, 1), ChannelSpec::signflip(1.5), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_channel(random_latent(kShape, 1), ChannelSpec::scale(0.0), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_channel(random_latent(kShape, 1), ChannelSpec::compose({}), 2),
                  std::invalid_argument);
}

TEST_CASE("awgn with sigma 0 is the identity") {
  const LatentTensor z = random_latent(kShape, 3);
  const LatentTensor out = apply_channel(z, ChannelSpec::awgn(0.0), 99);
  CHECK((out.values == z.values).all());
}

TEST_CASE("signflip with p=1 negates") {
  const LatentTensor z = random_latent(kShape, 4);
  const LatentTensor out = apply_channel(z, ChannelSpec::signflip(1.0), 99);
  CHECK((out.values == -z.values).all());
}

TEST_CASE("scale multiplies") {
  const LatentTensor z = random_latent(kShape, 5);
  const LatentTensor out = apply_channel(z, ChannelSpec::scale(2.0), 99);
  CHECK((out.values == 2.0f * z.values).all());
}

TEST_CASE("resample with p=1 is fresh normal noise") {
  const LatentShape big{4, 64, 64};  // 16384 elements
  const LatentTensor z = random_latent(big, 6);
  const LatentTensor out = apply_channel(z, ChannelSpec::resample(1.0), 1234);

  const NormalityReport rep = audit_normality(out.values.cast<double>());
  CHECK(rep.ks_p > 0.01);

  // uncorrelated with the input
  const Eigen::ArrayXd a = z.values.cast<double>(), b = out.values.cast<double>();
  const double ca = a.mean(), cb = b.mean();
  const double cov = ((a - ca) * (b - cb)).mean();
  const double r = cov / std::sqrt((a - ca).square().mean() * (b - cb).square().mean());
  CHECK(std::abs(r) < 0.02);
}

TEST_CASE("channels are deterministic in the seed") {
  const LatentTensor z = random_latent(kShape, 7);
  const ChannelSpec spec = ChannelSpec::compose(
      {ChannelSpec::awgn(0.7), ChannelSpec::signflip(0.1), ChannelSpec::scale(1.3)});
  const LatentTensor a = apply_channel(z, spec, 42);
  const LatentTensor b = apply_channel(z, spec, 42);
  const LatentTensor c = apply_channel(z, spec, 43);
  CHECK((a.values == b.values).all());
  CHECK_FALSE((a.values == c.values).all());
}

TEST_CASE("composed awgn behaves like the combined sigma") {
  // bit-accuracy curves of awgn(s1)+awgn(s2) and awgn(sqrt(s1^2+s2^2))
  // agree within 0.02 over 1000 trials (GS half alone, true key)
  const LatentShape full{4, 16, 16};
  const LatentShape half_shape{2, 16, 16};
  const GsParams p{2, 4, 1};
  const std::uint32_t q = gs_capacity(full, p);
  const std::uint32_t half = std::uint32_t(full.half_elems());

  const double s1 = 1.2, s2 = 1.2;
  const ChannelSpec composed =
      ChannelSpec::compose({ChannelSpec::awgn(s1), ChannelSpec::awgn(s2)});
  const ChannelSpec direct = ChannelSpec::awgn(std::sqrt(s1 * s1 + s2 * s2));

  double acc_sum[2] = {0.0, 0.0};
  const int trials = 1000;
  const StreamRng bits(5150, 0);
  for (int which = 0; which < 2; ++which) {
    for (int trial = 0; trial < trials; ++trial) {
      BitVec payload(q), K(half);
      for (std::uint32_t j = 0; j < q; ++j)
        if (bits.word((std::uint64_t(trial) << 20) | j) & 1) payload.set(j, true);
      for (std::uint32_t i = 0; i < half; ++i)
        if (bits.word((std::uint64_t(trial) << 20) | (0x80000 | i)) & 1) K.set(i, true);
      const Eigen::ArrayXf sym = gs_randomize(diffuse(payload, p, full), K);
      const LatentTensor z = dps_sample(sym, half_shape, 8800 + trial);
      const LatentTensor zn =
          apply_channel(z, which == 0 ? composed : direct, 17000 + trial);
      const Eigen::ArrayXd soft = posterior_estimate(zn, AwgnModel{});
      const GsDecodeResult res = gs_decode_soft(soft, K, p, full);
      acc_sum[which] += 1.0 - double(res.bits.hamming(payload)) / q;
    }
  }
  CHECK(acc_sum[0] / trials == doctest::Approx(acc_sum[1] / trials).epsilon(0.025));
}

TEST_CASE("latent scaling leaves noiseless decodes unchanged") {
  const WatermarkKeySet& ks = testutil::small_keyset();
  TrialConfig cfg = small_trial_config();
  for (double factor : {0.5, 1.0, 2.0}) {
    const auto records = run_trials(ks, cfg, ChannelSpec::scale(factor), 20, 31337);
    for (const auto& r : records) {
      CHECK(r.seed_decoded);
      CHECK(r.bit_accuracy == 1.0);
    }
  }
}

TEST_CASE("run_trials on a clean channel decodes everything") {
  const WatermarkKeySet& ks = testutil::small_keyset();
  const TrialConfig cfg = small_trial_config();
  const auto records = run_trials(ks, cfg, ChannelSpec::awgn(0.0), 50, 999);
  REQUIRE(records.size() == 50);
  for (const auto& r : records) {
    CHECK(r.seed_decoded);
    CHECK(r.bit_accuracy == 1.0);
    CHECK(r.detected_at_tau);
    CHECK_FALSE(r.signature_valid.has_value());  // operator mode
  }
}

TEST_CASE("run_trials is reproducible") {
  const WatermarkKeySet& ks = testutil::small_keyset();
  const TrialConfig cfg = small_trial_config();
  const auto a = run_trials(ks, cfg, ChannelSpec::awgn(0.9), 10, 222);
  const auto b = run_trials(ks, cfg, ChannelSpec::awgn(0.9), 10, 222);
  for (int i = 0; i < 10; ++i) {
    CHECK(a[i].seed_decoded == b[i].seed_decoded);
    CHECK(a[i].bit_accuracy == b[i].bit_accuracy);
  }
}

TEST_CASE("full resampling reduces accuracy to chance") {
  const WatermarkKeySet& ks = testutil::small_keyset();
  const TrialConfig cfg = small_trial_config();
  const auto records = run_trials(ks, cfg, ChannelSpec::resample(1.0), 100, 777);
  double mean = 0.0;
  int decoded = 0;
  for (const auto& r : records) {
    mean += r.bit_accuracy;
    decoded += r.seed_decoded;
  }
  mean /= records.size();
  CHECK(mean == doctest::Approx(0.5).epsilon(0.06));
  CHECK(decoded == 0);
}

TEST_CASE("mean accuracy degrades monotonically over an awgn sweep") {
  const WatermarkKeySet& ks = testutil::small_keyset();
  const TrialConfig cfg = small_trial_config();
  double prev = 2.0;
  for (double sigma : {0.5, 1.0, 1.5, 2.0}) {
    const auto records = run_trials(ks, cfg, ChannelSpec::awgn(sigma), 100, 4444);
    double mean = 0.0;
    for (const auto& r : records) mean += r.bit_accuracy;
    mean /= records.size();
    CHECK(mean <= prev + 0.03);
    prev = mean;
  }
}

TEST_CASE("sweep_report formatting") {
  const WatermarkKeySet& ks = testutil::small_keyset();
  const TrialConfig cfg = small_trial_config();
  const std::uint32_t q = gs_capacity(kShape, kGs);
  const std::uint32_t tau_trace = calibrate_tau(q, 1e-6, 1000);

  const auto records = run_trials(ks, cfg, ChannelSpec::awgn(0.0), 10, 5);
  const std::string csv = sweep_report({records}, q, tau_trace);
  CHECK(csv.find("channel,n,seed_decode_rate,bit_acc_mean,bit_acc_std,tpr_at_tau,trace_rate") ==
        0);
  CHECK(csv.find("awgn(sigma=0)") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row

  SUBCASE("byte-identical rerun") {
    const auto again = run_trials(ks, cfg, ChannelSpec::awgn(0.0), 10, 5);
    CHECK(sweep_report({again}, q, tau_trace) == csv);
  }
  SUBCASE("empty groups are skipped") {
    const std::string only_header = sweep_report({{}}, q, tau_trace);
    CHECK(std::count(only_header.begin(), only_header.end(), '\n') == 1);
  }
}
