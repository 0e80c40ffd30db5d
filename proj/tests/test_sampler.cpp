#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "latentmark/rng.hpp"
#include "latentmark/sampler.hpp"
#include "latentmark/stats.hpp"

using namespace latentmark;

namespace {

// Independent oracle: bisection on the normal CDF.
double quantile_by_bisection(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Independent oracle: Maclaurin series for small x, the classic
// erfc continued fraction for the tail (the series loses precision past ~3).
double erf_oracle(double x) {
  if (x < 0) return -erf_oracle(-x);
  if (x <= 2.5) {
    const double two_over_sqrt_pi = 1.1283791670955126;
    double term = x, sum = x;
    for (int k = 1; k < 80; ++k) {
      term *= -x * x / k;
      sum += term / (2 * k + 1);
      if (std::abs(term) < 1e-18) break;
    }
    return two_over_sqrt_pi * sum;
  }
  // A&S 7.1.14: sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + (2/2)/(x + ...)))
  double cf = 0.0;
  for (int k = 80; k >= 1; --k) cf = (k * 0.5) / (x + cf);
  const double erfc = std::exp(-x * x) / 1.7724538509055160 / (x + cf);
  return 1.0 - erfc;
}

}  // namespace

TEST_CASE("quantile known values") {
  CHECK(quantile(0.5) == 0.0);
  CHECK(quantile(0.975) == doctest::Approx(1.95996398454).epsilon(1e-9));
  CHECK(quantile(0.25) == doctest::Approx(-0.67448975019608).epsilon(1e-10));
  CHECK(quantile(0.75) == doctest::Approx(0.67448975019608).epsilon(1e-10));
  CHECK_THROWS_AS(quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(quantile(-0.3), std::domain_error);
}

TEST_CASE("quantile matches the bisection oracle") {
  for (double p : {1e-12, 1e-6, 0.01, 0.1, 0.3, 0.5001, 0.7, 0.9, 0.99, 1 - 1e-6}) {
    CHECK(quantile(p) == doctest::Approx(quantile_by_bisection(p)).epsilon(1e-9));
  }
}

TEST_CASE("quantile/cdf inverse pair over a grid") {
  // |cdf(quantile(p)) - p| <= 1e-9 over 10^4 points
  double worst = 0.0;
  const int n = 10000;
  for (int i = 1; i < n; ++i) {
    const double p = double(i) / n;
    worst = std::max(worst, std::abs(normal_cdf(quantile(p)) - p));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("erf_eval") {
  CHECK(erf_eval(0.0) == 0.0);
  for (double x : {0.1, 0.5, 1.0, 2.0, 3.5, 5.0, 6.0}) {
    CHECK(erf_eval(x) == doctest::Approx(erf_oracle(x)).epsilon(1e-12));
    CHECK(erf_eval(-x) == -erf_eval(x));
  }
  CHECK(erf_eval(1.0) == doctest::Approx(0.8427007929497149).epsilon(1e-12));
}

TEST_CASE("dps_sample interval construction") {
  // quantile((u+i)/2) with u = 0.5: the spec's worked example
  CHECK(quantile(0.25) == doctest::Approx(-0.67449).epsilon(1e-4));
  CHECK(quantile(0.75) == doctest::Approx(+0.67449).epsilon(1e-4));

  const LatentShape shape{2, 8, 8};
  Eigen::ArrayXf symbols(shape.elems());
  const StreamRng rng(11, 99);
  for (Eigen::Index i = 0; i < symbols.size(); ++i)
    symbols[i] = rng.bernoulli(std::uint64_t(i), 0.5) ? 1.0f : -1.0f;

  const LatentTensor z = dps_sample(symbols, shape, 123);
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    CHECK(z.values[i] != 0.0f);
    CHECK((z.values[i] > 0.0f) == (symbols[i] > 0.0f));
  }
  // deterministic
  const LatentTensor z2 = dps_sample(symbols, shape, 123);
  CHECK((z.values == z2.values).all());
  const LatentTensor z3 = dps_sample(symbols, shape, 124);
  CHECK_FALSE((z.values == z3.values).all());
}

TEST_CASE("dps_sample preserves the standard normal distribution") {
  const LatentShape shape{4, 80, 80};  // 25600 elements per draw
  const StreamRng sym_rng(21, 0);
  Eigen::ArrayXd pooled(4 * shape.elems());
  Eigen::Index at = 0;
  for (int rep = 0; rep < 4; ++rep) {
    Eigen::ArrayXf symbols(shape.elems());
    for (Eigen::Index i = 0; i < symbols.size(); ++i)
      symbols[i] = sym_rng.bernoulli(std::uint64_t(rep) << 32 | std::uint64_t(i), 0.5) ? 1.0f
                                                                                       : -1.0f;
    const LatentTensor z = dps_sample(symbols, shape, 500 + rep);
    pooled.segment(at, z.values.size()) = z.values.cast<double>();
    at += z.values.size();
  }
  const NormalityReport rep = audit_normality(pooled);
  CHECK(rep.ks_p > 0.01);
  CHECK(std::abs(rep.mean) < 0.01);
  CHECK(std::abs(rep.variance - 1.0) < 0.02);
}

TEST_CASE("dps_sample histogram matches the normal density") {
  // small-bin mixture identity: 4-sigma multinomial bounds per bin
  const LatentShape shape{4, 64, 64};
  const std::size_t n = shape.elems();
  Eigen::ArrayXf symbols(n);
  const StreamRng rng(31, 0);
  for (Eigen::Index i = 0; i < symbols.size(); ++i)
    symbols[i] = rng.bernoulli(std::uint64_t(i), 0.5) ? 1.0f : -1.0f;
  const LatentTensor z = dps_sample(symbols, shape, 777);

  const int nbins = 20;
  const double lo = -3.0, hi = 3.0;
  std::vector<int> counts(nbins, 0);
  for (Eigen::Index i = 0; i < z.values.size(); ++i) {
    const double v = z.values[i];
    if (v >= lo && v < hi) ++counts[int((v - lo) / (hi - lo) * nbins)];
  }
  for (int b = 0; b < nbins; ++b) {
    const double l = lo + (hi - lo) * b / nbins, r = lo + (hi - lo) * (b + 1) / nbins;
    const double p = normal_cdf(r) - normal_cdf(l);
    const double sd = std::sqrt(double(n) * p * (1 - p));
    CHECK(std::abs(counts[b] - double(n) * p) <= 4.0 * sd);
  }
}

TEST_CASE("posterior_estimate") {
  const AwgnModel model;  // sigma = sqrt(3/2)
  LatentTensor z = make_latent({1, 2, 2});
  z.values << 0.0f, 2.7386128f, 10.0f, -2.7386128f;
  const Eigen::ArrayXd m = posterior_estimate(z, model);
  CHECK(m[0] == 0.0);
  CHECK(m[1] == doctest::Approx(0.8427007929).epsilon(1e-6));  // erf(1)
  CHECK(m[2] > 0.999999);
  CHECK(m[3] == doctest::Approx(-0.8427007929).epsilon(1e-6));
}

TEST_CASE("posterior sign equals symbol without noise") {
  const LatentShape shape{2, 16, 16};
  Eigen::ArrayXf symbols(shape.elems());
  const StreamRng rng(3, 0);
  for (Eigen::Index i = 0; i < symbols.size(); ++i)
    symbols[i] = rng.bernoulli(std::uint64_t(i), 0.5) ? 1.0f : -1.0f;
  const LatentTensor z = dps_sample(symbols, shape, 9);
  const Eigen::ArrayXd m = posterior_estimate(z, AwgnModel{});
  for (Eigen::Index i = 0; i < symbols.size(); ++i)
    CHECK((m[i] > 0.0) == (symbols[i] > 0.0f));
}

TEST_CASE("split and merge channels") {
  const LatentShape shape{4, 64, 64};
  LatentTensor t = make_latent(shape);
  const StreamRng rng(17, 0);
  for (Eigen::Index i = 0; i < t.values.size(); ++i)
    t.values[i] = float(rng.normal(std::uint64_t(i)));

  const auto [prc, gs] = split_channels(t);
  CHECK(prc.shape.ch == 2);
  CHECK(gs.shape.ch == 2);
  CHECK(prc.values.size() == 2 * 64 * 64);
  const LatentTensor back = merge_channels(prc, gs);
  CHECK((back.values == t.values).all());

  LatentTensor odd = make_latent({3, 4, 4});
  CHECK_THROWS_AS(split_channels(odd), std::invalid_argument);
}

TEST_CASE("latent file round trip and error paths") {
  const LatentShape shape{2, 4, 4};
  LatentTensor t = make_latent(shape);
  for (Eigen::Index i = 0; i < t.values.size(); ++i) t.values[i] = float(i) * 0.25f - 3.0f;

  const std::string path = "test_latent_roundtrip.bin";
  save_latent(t, path);
  const LatentTensor u = load_latent(path);
  CHECK(u.shape == shape);
  CHECK((u.values == t.values).all());

  SUBCASE("truncated file") {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite("LTNT\x01\x02\x00", 1, 7, f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(load_latent(path), doctest::Contains("truncated"), std::runtime_error);
  }
  SUBCASE("bad magic") {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite("NOPE\x01aaaaaaaaaaaa", 1, 17, f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(load_latent(path), doctest::Contains("magic"), std::runtime_error);
  }
  std::remove(path.c_str());
}
