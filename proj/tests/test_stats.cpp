#include <doctest.h>

#include <cmath>

#include "latentmark/rng.hpp"
#include "latentmark/stats.hpp"

using namespace latentmark;

namespace {

BitVec bits_from_u64(std::uint64_t v, std::uint32_t n) {
  BitVec b(n);
  for (std::uint32_t i = 0; i < n; ++i)
    if ((v >> i) & 1) b.set(i, true);
  return b;
}

BitVec random_bits(std::uint32_t n, std::uint64_t seed, std::uint64_t stream = 0) {
  const StreamRng rng(seed, stream);
  BitVec v(n);
  for (std::uint32_t i = 0; i < n; ++i)
    if (rng.word(i) & 1) v.set(i, true);
  return v;
}

// Regularized incomplete beta at x = 1/2 via Lentz's continued fraction;
// the independent reference for the binomial tail.
double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h;
}

double betainc_half(double a, double b) {
  const double x = 0.5;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
               b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

TEST_CASE("acc counts matching bits") {
  CHECK(acc(bits_from_u64(0xFF, 8), bits_from_u64(0xFF, 8)) == 8);
  CHECK(acc(bits_from_u64(0xFF, 8), bits_from_u64(0x00, 8)) == 0);
  CHECK(acc(bits_from_u64(0xFF, 8), bits_from_u64(0xF0, 8)) == 4);
  CHECK_THROWS_AS(acc(BitVec(8), BitVec(9)), std::invalid_argument);
}

TEST_CASE("fpr_detection small cases") {
  CHECK(fpr_detection(8, 8) == 0.0);
  CHECK(fpr_detection(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fpr_detection(2, 0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK_THROWS_AS(fpr_detection(8, 9), std::invalid_argument);
}

TEST_CASE("fpr_detection equals exhaustive enumeration for q <= 20") {
  for (std::uint32_t q = 1; q <= 20; ++q) {
    const std::uint64_t s = random_bits(q, q).words().empty() ? 0 : random_bits(q, q).words()[0];
    std::vector<std::uint64_t> above(q + 1, 0);  // counts of acc > tau
    std::vector<std::uint64_t> hist(q + 1, 0);
    for (std::uint64_t x = 0; x < (std::uint64_t(1) << q); ++x)
      ++hist[q - std::uint32_t(std::popcount(x ^ (s & ((q == 64 ? ~0ull : (1ull << q) - 1)))))];
    for (std::uint32_t tau = 0; tau <= q; ++tau) {
      std::uint64_t count = 0;
      for (std::uint32_t k = tau + 1; k <= q; ++k) count += hist[k];
      const double enumerated = double(count) / double(std::uint64_t(1) << q);
      CHECK(fpr_detection(q, tau) == doctest::Approx(enumerated).epsilon(1e-12));
    }
  }
}

TEST_CASE("fpr_detection matches the incomplete beta form at q=256") {
  for (std::uint32_t tau : {128u, 160u, 192u, 224u}) {
    const double beta = betainc_half(double(tau) + 1.0, double(256 - tau));
    const double mine = fpr_detection(256, tau);
    CHECK(mine == doctest::Approx(beta).epsilon(1e-10));
  }
}

TEST_CASE("fpr_traceability") {
  CHECK(fpr_traceability(256, 140, 1) == doctest::Approx(fpr_detection(256, 140)).epsilon(1e-14));
  CHECK(fpr_traceability(8, 8, 1000) == 0.0);
  CHECK(fpr_traceability(2, 1, 2) == doctest::Approx(0.4375).epsilon(1e-14));
  CHECK(fpr_traceability_approx(2, 1, 2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(fpr_traceability(8, 4, 0), std::invalid_argument);
}

TEST_CASE("calibrate_tau") {
  CHECK(calibrate_tau(256, 0.5) == 128);  // binomial median
  CHECK(calibrate_tau(256, 1e-2) == 147);
  CHECK(calibrate_tau(256, 1e-6) == 166);
  CHECK(calibrate_tau(256, 1e-6, 1000) == 175);
  CHECK(calibrate_tau(256, 1e-6, 100000) == 181);

  SUBCASE("smallest tau satisfying the bound") {
    for (double target : {1e-1, 1e-3, 1e-6}) {
      const std::uint32_t tau = calibrate_tau(256, target);
      CHECK(fpr_detection(256, tau) <= target);
      CHECK(fpr_detection(256, tau - 1) > target);
    }
  }
  SUBCASE("monotone in the target and in N") {
    CHECK(calibrate_tau(256, 1e-6) >= calibrate_tau(256, 1e-1));
    CHECK(calibrate_tau(256, 1e-6, 1000000) > calibrate_tau(256, 1e-6));
  }
  SUBCASE("invalid targets") {
    CHECK_THROWS_AS(calibrate_tau(256, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_tau(256, -1e-3), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_tau(256, 1.0), std::invalid_argument);
  }
}

TEST_CASE("detection uses at-least-tau, trace uses strictly-greater") {
  CHECK(detection_passes(147, 147));
  CHECK_FALSE(detection_passes(146, 147));

  UserDatabase db;
  db.assign(1, 0x12345678);
  const BitVec wm = pack_payload(0x12345678, 64, PayloadMode::operator_tiled);
  const TraceResult at_tau = trace(db, wm, 64, PayloadMode::operator_tiled);
  CHECK_FALSE(at_tau.passed);  // best_acc == tau does not pass
  CHECK_FALSE(at_tau.matched_user.has_value());
}

TEST_CASE("trace finds the right user") {
  UserDatabase db;
  for (std::uint32_t id = 1; id <= 20; ++id) db.assign(id, id * 0x9E3779B9u);
  const std::uint32_t q = 256;
  const BitVec wm7 = pack_payload(db.lookup(7).user_info, q, PayloadMode::operator_tiled);
  const TraceResult res = trace(db, wm7, calibrate_tau(q, 1e-6, 20), PayloadMode::operator_tiled);
  CHECK(res.passed);
  CHECK(res.best_acc == q);
  REQUIRE(res.matched_user.has_value());
  CHECK(*res.matched_user == 7);

  SUBCASE("ties resolve to the lowest user id") {
    UserDatabase db2;
    db2.assign(9, 0xABCD0123);
    db2.assign(4, 0xABCD0123);  // same watermark, lower id
    const BitVec wm = pack_payload(0xABCD0123, q, PayloadMode::operator_tiled);
    const TraceResult r2 = trace(db2, wm, 128, PayloadMode::operator_tiled);
    REQUIRE(r2.matched_user.has_value());
    CHECK(*r2.matched_user == 4);
  }
  SUBCASE("empty database is an error") {
    UserDatabase empty;
    CHECK_THROWS_AS(trace(empty, wm7, 128, PayloadMode::operator_tiled), std::invalid_argument);
  }
}

TEST_CASE("random extractions never trace at the calibrated threshold") {
  UserDatabase db;
  const StreamRng infos(31, 0);
  for (std::uint32_t id = 0; id < 1000; ++id)
    db.assign(id, std::uint32_t(infos.word(id)));
  const std::uint32_t q = 256;
  const std::uint32_t tau = calibrate_tau(q, 1e-6, db.size());
  const WatermarkTable table = WatermarkTable::build(db, q, PayloadMode::operator_tiled);

  int passes = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const TraceResult r = trace(table, random_bits(q, 7000 + trial), tau);
    passes += r.passed;
    if (!r.passed) CHECK_FALSE(r.matched_user.has_value());
  }
  CHECK(passes == 0);
}

TEST_CASE("audit_normality on reference draws") {
  SUBCASE("normal samples pass at the 1% level in 98+ of 100 runs") {
    int pass = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const StreamRng rng(std::uint64_t(rep), 5);
      Eigen::ArrayXd x(100000);
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal(std::uint64_t(i));
      const NormalityReport r = audit_normality(x);
      pass += (r.ks_p > 0.01) && (r.jb_p > 0.01);
    }
    CHECK(pass >= 98);
  }
  SUBCASE("a constant vector fails") {
    const NormalityReport r = audit_normality(Eigen::ArrayXd::Constant(1000, 0.37));
    CHECK(r.ks_p < 1e-6);
  }
  SUBCASE("uniform samples fail Jarque-Bera (platykurtic)") {
    const StreamRng rng(5, 6);
    Eigen::ArrayXd x(20000);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x[i] = 2.0 * rng.uniform_open01(std::uint64_t(i)) - 1.0;
    const NormalityReport r = audit_normality(x);
    CHECK(r.jb_p < 0.01);
  }
  SUBCASE("too few samples") {
    CHECK_THROWS_AS(audit_normality(Eigen::ArrayXd::Zero(50)), std::invalid_argument);
  }
}

TEST_CASE("audit_posterior calibration") {
  const AwgnModel model;  // sqrt(3/2)
  SUBCASE("matched channel, large sample") {
    CHECK(audit_posterior(model, model.sigma, 1000000, 11) < 0.02);
  }
  SUBCASE("matched channel, small samples sit at the binomial noise floor") {
    // 50 bins of m samples each: per-bin std of a +-1 mean is <= 1/sqrt(m),
    // so 4 sigma bounds the max gap with ~99.7% headroom.
    CHECK(audit_posterior(model, model.sigma, 50000, 12) < 0.15);  // m = 1000
    CHECK(audit_posterior(model, model.sigma, 1000, 12) < 0.90);   // m = 20
  }
  SUBCASE("mismatched sigma still reports a gap") {
    const double gap = audit_posterior(model, 2.5 * model.sigma, 100000, 13);
    CHECK(gap >= 0.0);
    CHECK(gap <= 2.0);
  }
}
