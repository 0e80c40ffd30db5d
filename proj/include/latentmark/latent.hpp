#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>

namespace latentmark {

struct LatentShape {
  std::uint32_t ch = 4;
  std::uint32_t h = 64;
  std::uint32_t w = 64;

  std::uint64_t elems() const { return std::uint64_t(ch) * h * w; }
  /// Elements in one channel half (PRC or GS side).
  std::uint64_t half_elems() const { return elems() / 2; }
  bool operator==(const LatentShape&) const = default;
};

/// Real-valued latent tensor, flat row-major (c, y, x). Stored as float32;
/// numeric work happens in double.
struct LatentTensor {
  LatentShape shape;
  Eigen::ArrayXf values;
};

LatentTensor make_latent(const LatentShape& shape);

/// File format: magic "LTNT", version byte, three u32 LE dims, then
/// ch*h*w float32 LE values.
void save_latent(const LatentTensor& t, const std::string& path);
LatentTensor load_latent(const std::string& path);

/// First half of the channels (PRC side) and second half (GS side).
std::pair<LatentTensor, LatentTensor> split_channels(const LatentTensor& t);
LatentTensor merge_channels(const LatentTensor& prc_part, const LatentTensor& gs_part);

}  // namespace latentmark
