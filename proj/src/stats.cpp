#include "latentmark/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "latentmark/rng.hpp"

namespace latentmark {

std::uint32_t acc(const BitVec& s, const BitVec& s_prime) {
  if (s.size() != s_prime.size()) throw std::invalid_argument("acc: length mismatch");
  return std::uint32_t(s.size() - s.hamming(s_prime));
}

double fpr_detection(std::uint32_t q, std::uint32_t tau) {
  if (tau > q) throw std::invalid_argument("fpr_detection: tau must be in [0, q]");
  if (tau == q) return 0.0;
  const double lgq = std::lgamma(double(q) + 1.0);
  const double log2q = double(q) * std::log(2.0);
  // Kahan summation; terms span many magnitudes at large q.
  double sum = 0.0, comp = 0.0;
  for (std::uint32_t i = tau + 1; i <= q; ++i) {
    const double logterm =
        lgq - std::lgamma(double(i) + 1.0) - std::lgamma(double(q - i) + 1.0) - log2q;
    const double term = std::exp(logterm);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::min(sum, 1.0);
}

double fpr_traceability(std::uint32_t q, std::uint32_t tau, std::uint64_t n_users) {
  if (n_users < 1) throw std::invalid_argument("fpr_traceability: N must be >= 1");
  const double f = fpr_detection(q, tau);
  if (f == 0.0) return 0.0;
  return -std::expm1(double(n_users) * std::log1p(-f));
}

double fpr_traceability_approx(std::uint32_t q, std::uint32_t tau, std::uint64_t n_users) {
  return double(n_users) * fpr_detection(q, tau);
}

std::uint32_t calibrate_tau(std::uint32_t q, double target_fpr,
                            std::optional<std::uint64_t> n_users) {
  if (!(target_fpr > 0.0 && target_fpr < 1.0))
    throw std::invalid_argument("calibrate_tau: target FPR must be in (0,1)");
  for (std::uint32_t tau = 0; tau <= q; ++tau) {
    const double f = n_users ? fpr_traceability(q, tau, *n_users) : fpr_detection(q, tau);
    if (f <= target_fpr) return tau;
  }
  throw std::logic_error("calibrate_tau: unreachable (FPR(q) = 0)");
}

WatermarkTable WatermarkTable::build(const UserDatabase& db, std::uint32_t q, PayloadMode mode) {
  WatermarkTable t;
  t.entries.reserve(db.size());
  for (const auto& [id, rec] : db.records()) {
    if (mode == PayloadMode::third_party) {
      if (!rec.signature)
        throw std::invalid_argument("trace: third-party mode needs stored signatures (user " +
                                    std::to_string(id) + ")");
      t.entries.emplace_back(id, payload_from_parts(rec.user_info, *rec.signature));
    } else {
      t.entries.emplace_back(id, pack_payload(rec.user_info, q, PayloadMode::operator_tiled));
    }
  }
  return t;
}

TraceResult trace(const WatermarkTable& table, const BitVec& extracted, std::uint32_t tau) {
  if (table.entries.empty()) throw std::invalid_argument("trace: empty user database");
  TraceResult res;
  std::uint32_t best_id = table.entries.front().first;
  bool first = true;
  for (const auto& [id, wm] : table.entries) {
    const std::uint32_t a = acc(wm, extracted);
    // entries ascend by id, so strict improvement keeps the lowest id on ties
    if (first || a > res.best_acc) {
      res.best_acc = a;
      best_id = id;
      first = false;
    }
  }
  res.passed = res.best_acc > tau;
  if (res.passed) res.matched_user = best_id;
  return res;
}

TraceResult trace(const UserDatabase& db, const BitVec& extracted, std::uint32_t tau,
                  PayloadMode mode) {
  return trace(WatermarkTable::build(db, std::uint32_t(extracted.size()), mode), extracted, tau);
}

namespace {

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2k^2 lambda^2}.
double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 101; ++k) {
    const double term = std::exp(-2.0 * double(k) * double(k) * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

}  // namespace

NormalityReport audit_normality(const Eigen::ArrayXd& samples) {
  const std::int64_t n = samples.size();
  if (n < 100) throw std::invalid_argument("audit_normality: need at least 100 samples");

  NormalityReport rep;
  rep.mean = samples.mean();
  const Eigen::ArrayXd centered = samples - rep.mean;
  const double m2 = centered.square().mean();
  rep.variance = m2 * double(n) / double(n - 1);

  // K-S against the standard normal
  std::vector<double> sorted(samples.data(), samples.data() + n);
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double cdf = normal_cdf(sorted[std::size_t(i)]);
    d = std::max(d, double(i + 1) / double(n) - cdf);
    d = std::max(d, cdf - double(i) / double(n));
  }
  rep.ks_stat = d;
  rep.ks_p = kolmogorov_q(std::sqrt(double(n)) * d);

  // Jarque-Bera from population central moments
  if (m2 > 0.0) {
    const double m3 = centered.cube().mean();
    const double m4 = centered.square().square().mean();
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    rep.jb_stat = double(n) / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  } else {
    rep.jb_stat = std::numeric_limits<double>::infinity();
  }
  rep.jb_p = rep.jb_stat > 1400.0 ? 0.0 : std::exp(-0.5 * rep.jb_stat);  // chi^2(2) tail
  return rep;
}

double audit_posterior(const AwgnModel& model, double sigma_sim, std::int64_t n_samples,
                       std::uint64_t rng_seed) {
  if (n_samples < 100) throw std::invalid_argument("audit_posterior: need at least 100 samples");
  const StreamRng sym_rng(rng_seed, 0);
  const StreamRng u_rng(rng_seed, 1);
  const StreamRng noise_rng(rng_seed, 2);

  const auto count = std::size_t(n_samples);
  std::vector<double> zp(count);
  std::vector<float> sym(count);
  for (std::int64_t k = 0; k < n_samples; ++k) {
    const bool bit_one = sym_rng.bernoulli(std::uint64_t(k), 0.5);
    const double i = bit_one ? 0.0 : 1.0;  // symbol +1 occupies the upper interval
    const double z = quantile((u_rng.uniform_open01(std::uint64_t(k)) + i) * 0.5);
    zp[std::size_t(k)] = z + sigma_sim * noise_rng.normal(std::uint64_t(k));
    sym[std::size_t(k)] = bit_one ? -1.0f : 1.0f;
  }

  std::vector<std::uint32_t> order(zp.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&zp](std::uint32_t a, std::uint32_t b) { return zp[a] < zp[b]; });

  const double s2 = model.sigma * model.sigma;
  const double denom = std::sqrt(2.0 * s2 * (1.0 + s2));
  const int n_bins = 50;
  double max_gap = 0.0;
  for (int bin = 0; bin < n_bins; ++bin) {
    const std::size_t lo = std::size_t(bin) * zp.size() / n_bins;
    const std::size_t hi = std::size_t(bin + 1) * zp.size() / n_bins;
    if (hi <= lo) continue;
    double z_mean = 0.0, s_mean = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      z_mean += zp[order[k]];
      s_mean += sym[order[k]];
    }
    z_mean /= double(hi - lo);
    s_mean /= double(hi - lo);
    max_gap = std::max(max_gap, std::abs(s_mean - std::erf(z_mean / denom)));
  }
  return max_gap;
}

}  // namespace latentmark
