#include "latentmark/prc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "latentmark/rng.hpp"

namespace latentmark {

Eigen::ArrayXd soft_to_llr(const Eigen::ArrayXd& soft, double clamp) {
  return soft.unaryExpr([clamp](double s) {
    s = std::min(1.0, std::max(-1.0, s));
    return std::min(clamp, std::max(-clamp, 2.0 * std::atanh(s)));
  });
}

BitVec prc_encode_bits(const WatermarkKeySet& ks, const BitVec& seed, std::uint64_t rng_seed,
                       double eta) {
  if (seed.size() != ks.params.g)
    throw std::invalid_argument("prc_encode: seed length != g");
  BitVec c = ks.G.encode(seed);
  if (eta > 0.0) {
    const StreamRng rng(rng_seed, 0);
    for (std::uint32_t i = 0; i < ks.params.n; ++i)
      if (rng.bernoulli(i, eta)) c.flip(i);
  }
  return c;
}

Eigen::ArrayXf prc_encode(const WatermarkKeySet& ks, const BitVec& seed, std::uint64_t rng_seed,
                          double eta) {
  const BitVec c = prc_encode_bits(ks, seed, rng_seed, eta);
  Eigen::ArrayXf symbols(ks.params.n);
  for (std::uint32_t i = 0; i < ks.params.n; ++i) symbols[i] = c.get(i) ? -1.0f : 1.0f;
  return symbols;
}

Eigen::ArrayXf prc_encode(const WatermarkKeySet& ks, const BitVec& seed, std::uint64_t rng_seed) {
  return prc_encode(ks, seed, rng_seed, ks.params.eta);
}

namespace {

constexpr double kInnerClamp = 30.0;     // variable-to-check message bound
constexpr double kTanhCap = 1.0 - 1e-14; // keeps atanh finite on saturated products

struct BpOutcome {
  Eigen::ArrayXd posterior;
  bool converged = false;
  int iterations = 0;
};

/// Plain sum-product with flooding schedule; early exit once the hard
/// decisions satisfy every parity check.
BpOutcome run_bp(const SparseParityMatrix& P, const Eigen::ArrayXd& llr, int max_iters) {
  const std::size_t n = llr.size();
  const std::size_t r = P.rows.size();
  const std::uint32_t t = r ? std::uint32_t(P.rows[0].size()) : 0;
  const std::size_t n_edges = r * t;

  BpOutcome out;
  out.posterior = llr;
  if (r == 0 || max_iters <= 0) return out;

  std::vector<double> m_vc(n_edges), m_cv(n_edges, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::uint32_t j = 0; j < t; ++j) m_vc[i * t + j] = llr[P.rows[i][j]];

  std::vector<double> acc(n);
  std::vector<double> fwd(t), bwd(t);

  for (int it = 1; it <= max_iters; ++it) {
    // check pass
    for (std::size_t i = 0; i < r; ++i) {
      const double* in = &m_vc[i * t];
      double* outm = &m_cv[i * t];
      for (std::uint32_t j = 0; j < t; ++j) {
        const double th = std::tanh(0.5 * in[j]);
        fwd[j] = j ? fwd[j - 1] * th : th;
      }
      double back = 1.0;
      for (std::uint32_t j = t; j-- > 0;) {
        bwd[j] = back;
        back *= std::tanh(0.5 * in[j]);
      }
      for (std::uint32_t j = 0; j < t; ++j) {
        double prod = (j ? fwd[j - 1] : 1.0) * bwd[j];
        prod = std::min(kTanhCap, std::max(-kTanhCap, prod));
        outm[j] = 2.0 * std::atanh(prod);
      }
    }

    // variable pass
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::uint32_t j = 0; j < t; ++j) acc[P.rows[i][j]] += m_cv[i * t + j];
    for (std::size_t v = 0; v < n; ++v) out.posterior[v] = llr[v] + acc[v];
    for (std::size_t i = 0; i < r; ++i) {
      for (std::uint32_t j = 0; j < t; ++j) {
        const double m = out.posterior[P.rows[i][j]] - m_cv[i * t + j];
        m_vc[i * t + j] = std::min(kInnerClamp, std::max(-kInnerClamp, m));
      }
    }

    out.iterations = it;
    bool all_satisfied = true;
    for (std::size_t i = 0; i < r && all_satisfied; ++i) {
      bool parity = false;
      for (std::uint32_t j = 0; j < t; ++j) parity ^= out.posterior[P.rows[i][j]] < 0.0;
      all_satisfied = !parity;
    }
    if (all_satisfied) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// 32x32-ish F2 system solver; rows are uint64 bit masks over message bits.
struct SmallInverse {
  std::vector<std::uint64_t> inv_rows;  // row i of A^{-1}
  bool ok = false;
};

SmallInverse invert(std::vector<std::uint64_t> a, std::uint32_t g) {
  SmallInverse s;
  s.inv_rows.assign(g, 0);
  for (std::uint32_t i = 0; i < g; ++i) s.inv_rows[i] = std::uint64_t(1) << i;
  for (std::uint32_t col = 0; col < g; ++col) {
    std::uint32_t piv = col;
    while (piv < g && !((a[piv] >> col) & 1)) ++piv;
    if (piv == g) return s;
    std::swap(a[col], a[piv]);
    std::swap(s.inv_rows[col], s.inv_rows[piv]);
    for (std::uint32_t i = 0; i < g; ++i) {
      if (i != col && ((a[i] >> col) & 1)) {
        a[i] ^= a[col];
        s.inv_rows[i] ^= s.inv_rows[col];
      }
    }
  }
  s.ok = true;
  return s;
}

inline std::uint64_t apply_inverse(const SmallInverse& inv, std::uint64_t b, std::uint32_t g) {
  std::uint64_t m = 0;
  for (std::uint32_t i = 0; i < g; ++i)
    m |= std::uint64_t(std::popcount(inv.inv_rows[i] & b) & 1) << i;
  return m;
}

BitVec message_bits(std::uint64_t m, std::uint32_t g) {
  BitVec v(g);
  for (std::uint32_t j = 0; j < g; ++j)
    if ((m >> j) & 1) v.set(j, true);
  return v;
}

}  // namespace

PrcDecodeResult prc_decode(const WatermarkKeySet& ks, const Eigen::ArrayXd& soft,
                           const DecoderConfig& cfg) {
  const std::uint32_t n = ks.params.n;
  const std::uint32_t g = ks.params.g;
  if (soft.size() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("prc_decode: soft vector length != n");
  if (g > 64) throw std::invalid_argument("prc_decode: g > 64 unsupported");

  // Gain normalization: uniform scaling of the soft values must not change
  // the decode, so bring the largest magnitude to 1 before the artanh map.
  const double peak = soft.abs().maxCoeff();
  const Eigen::ArrayXd llr =
      soft_to_llr(peak > 0.0 ? (soft / peak).eval() : soft, cfg.llr_clamp);
  const BpOutcome bp = run_bp(ks.P, llr, cfg.bp_iters);

  PrcDecodeResult res;
  res.bp_converged = bp.converged;
  res.bp_iterations = bp.iterations;
  res.seed = BitVec(g);

  // Ordered statistics: walk positions by posterior reliability and keep the
  // first g whose generator rows are linearly independent.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&bp](std::uint32_t a, std::uint32_t b) {
    const double ra = std::abs(bp.posterior[a]), rb = std::abs(bp.posterior[b]);
    return ra != rb ? ra > rb : a < b;
  });

  std::vector<std::uint64_t> basis_rows;     // raw generator rows of chosen positions
  std::vector<std::uint32_t> chosen;
  std::vector<std::uint64_t> echelon(g, 0);  // reduced rows by leading bit
  basis_rows.reserve(g);
  chosen.reserve(g);
  for (std::uint32_t idx : order) {
    std::uint64_t row = 0;
    for (std::uint32_t j = 0; j < g; ++j)
      row |= std::uint64_t(ks.G.cols[j].get(idx)) << j;
    std::uint64_t reduced = row;
    while (reduced) {
      const int lead = std::countr_zero(reduced);
      if (!echelon[lead]) break;
      reduced ^= echelon[lead];
    }
    if (!reduced) continue;
    echelon[std::countr_zero(reduced)] = reduced;
    basis_rows.push_back(row);
    chosen.push_back(idx);
    if (chosen.size() == g) break;
  }
  if (chosen.size() < g) return res;  // generator rank deficit; nothing to solve

  const SmallInverse inv = invert(basis_rows, g);
  if (!inv.ok) return res;

  std::uint64_t hard_basis = 0;
  for (std::uint32_t i = 0; i < g; ++i)
    hard_basis |= std::uint64_t(bp.posterior[chosen[i]] < 0.0) << i;
  const std::uint64_t m0 = apply_inverse(inv, hard_basis, g);

  double total = 0.0;
  for (std::uint32_t i = 0; i < n; ++i) total += std::abs(llr[i]);

  const auto weighted_discrepancy = [&](const BitVec& cw) {
    double d = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const bool hard = llr[i] < 0.0;
      if (cw.get(i) != hard) d += std::abs(llr[i]);
    }
    return d;
  };

  std::uint64_t best_m = m0;
  double best_d = weighted_discrepancy(ks.G.encode(message_bits(m0, g)));
  if (cfg.osd_order >= 1) {
    // column j of A^{-1}, i.e. the message delta for flipping basis bit j
    for (std::uint32_t j = 0; j < g; ++j) {
      std::uint64_t delta = 0;
      for (std::uint32_t i = 0; i < g; ++i)
        delta |= std::uint64_t((inv.inv_rows[i] >> j) & 1) << i;
      const std::uint64_t mj = m0 ^ delta;
      const double dj = weighted_discrepancy(ks.G.encode(message_bits(mj, g)));
      if (dj < best_d) {
        best_d = dj;
        best_m = mj;
      }
    }
  }

  res.seed = message_bits(best_m, g);
  res.discrepancy = total > 0.0 ? best_d / total : 1.0;
  res.ok = best_d <= cfg.fail_threshold * total && total > 0.0;
  return res;
}

}  // namespace latentmark
