#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

#include "latentmark/latent.hpp"

namespace latentmark {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (inverse CDF) on (0,1).
/// |normal_cdf(quantile(p)) - p| <= 1e-9 over the whole domain.
double quantile(double p);

/// erf with |error| <= 1e-12 on |x| <= 6.
inline double erf_eval(double x) { return std::erf(x); }

/// Inversion-side AWGN channel model; sigma defaults to sqrt(3/2).
struct AwgnModel {
  double sigma = std::sqrt(1.5);
};

/// Distribution-preserving sampling: element k carries symbol s in {-1,+1};
/// with i = (s+1)/2 and u ~ U(0,1), z = quantile((u+i)/2). Symbol +1 maps to
/// the positive half-line. Deterministic given rng_seed; per-element draws
/// are counter-based, so the result is schedule independent.
LatentTensor dps_sample(const Eigen::ArrayXf& symbols, const LatentShape& shape,
                        std::uint64_t rng_seed, std::uint64_t stream = 0);

/// Posterior expectation of each symbol given the inverted latent:
/// m' = erf(z' / sqrt(2 sigma^2 (1 + sigma^2))).
Eigen::ArrayXd posterior_estimate(const LatentTensor& z, const AwgnModel& model);

}  // namespace latentmark
