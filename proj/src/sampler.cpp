#include "latentmark/sampler.hpp"

#include <stdexcept>

#include "latentmark/rng.hpp"

namespace latentmark {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Upper-tail quantile: x >= 0 with P(Z > x) = m, for m in (0, 0.5].
/// Hastings' starting approximation refined by Newton steps against
/// 0.5*erfc(x/sqrt(2)); the upper-tail form avoids cancellation.
double upper_tail_quantile(double m) {
  const double t = std::sqrt(-2.0 * std::log(m));
  double x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
  for (int i = 0; i < 3; ++i) {
    const double tail = 0.5 * std::erfc(x * kInvSqrt2);
    x += (tail - m) / normal_pdf(x);
  }
  return x;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile: p must be in (0,1)");
  if (p == 0.5) return 0.0;
  // 1-p is exact for p in [0.5, 1) (Sterbenz), so both tails keep precision.
  return p < 0.5 ? -upper_tail_quantile(p) : upper_tail_quantile(1.0 - p);
}

LatentTensor dps_sample(const Eigen::ArrayXf& symbols, const LatentShape& shape,
                        std::uint64_t rng_seed, std::uint64_t stream) {
  if (symbols.size() != static_cast<Eigen::Index>(shape.elems()))
    throw std::invalid_argument("dps_sample: symbol count does not match latent shape");
  const StreamRng rng(rng_seed, stream);
  LatentTensor t = make_latent(shape);
  for (Eigen::Index k = 0; k < symbols.size(); ++k) {
    const double u = rng.uniform_open01(static_cast<std::uint64_t>(k));
    const double i = symbols[k] > 0.0f ? 1.0 : 0.0;
    t.values[k] = static_cast<float>(quantile((u + i) * 0.5));
  }
  return t;
}

Eigen::ArrayXd posterior_estimate(const LatentTensor& z, const AwgnModel& model) {
  const double s2 = model.sigma * model.sigma;
  const double denom = std::sqrt(2.0 * s2 * (1.0 + s2));
  return z.values.cast<double>().unaryExpr(
      [denom](double v) { return std::erf(v / denom); });
}

}  // namespace latentmark
