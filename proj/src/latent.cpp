#include "latentmark/latent.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace latentmark {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'N', 'T'};
constexpr std::uint8_t kVersion = 1;

struct File {
  std::FILE* f;
  explicit File(std::FILE* f) : f(f) {}
  ~File() {
    if (f) std::fclose(f);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
};

void write_u32(std::FILE* f, std::uint32_t v) {
  std::uint8_t b[4] = {std::uint8_t(v), std::uint8_t(v >> 8), std::uint8_t(v >> 16),
                       std::uint8_t(v >> 24)};
  if (std::fwrite(b, 1, 4, f) != 4) throw std::runtime_error("latent file: write failed");
}

std::uint32_t read_u32(std::FILE* f, const char* field) {
  std::uint8_t b[4];
  if (std::fread(b, 1, 4, f) != 4)
    throw std::runtime_error(std::string("latent file: truncated while reading ") + field);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

}  // namespace

LatentTensor make_latent(const LatentShape& shape) {
  LatentTensor t;
  t.shape = shape;
  t.values = Eigen::ArrayXf::Zero(static_cast<Eigen::Index>(shape.elems()));
  return t;
}

void save_latent(const LatentTensor& t, const std::string& path) {
  if (t.values.size() != static_cast<Eigen::Index>(t.shape.elems()))
    throw std::invalid_argument("save_latent: value count does not match shape");
  File file(std::fopen(path.c_str(), "wb"));
  if (!file.f) throw std::runtime_error("latent file: cannot open for writing: " + path);
  if (std::fwrite(kMagic, 1, 4, file.f) != 4 || std::fwrite(&kVersion, 1, 1, file.f) != 1)
    throw std::runtime_error("latent file: write failed");
  write_u32(file.f, t.shape.ch);
  write_u32(file.f, t.shape.h);
  write_u32(file.f, t.shape.w);
  static_assert(sizeof(float) == 4);
  if (std::fwrite(t.values.data(), 4, t.values.size(), file.f) !=
      static_cast<std::size_t>(t.values.size()))
    throw std::runtime_error("latent file: write failed");
}

LatentTensor load_latent(const std::string& path) {
  File file(std::fopen(path.c_str(), "rb"));
  if (!file.f) throw std::runtime_error("latent file: cannot open: " + path);
  char magic[4];
  if (std::fread(magic, 1, 4, file.f) != 4)
    throw std::runtime_error("latent file: truncated while reading magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("latent file: bad magic (not a latent tensor file)");
  std::uint8_t version;
  if (std::fread(&version, 1, 1, file.f) != 1)
    throw std::runtime_error("latent file: truncated while reading version");
  if (version != kVersion)
    throw std::runtime_error("latent file: unsupported version " + std::to_string(version));
  LatentShape shape;
  shape.ch = read_u32(file.f, "ch");
  shape.h = read_u32(file.f, "h");
  shape.w = read_u32(file.f, "w");
  LatentTensor t = make_latent(shape);
  if (std::fread(t.values.data(), 4, t.values.size(), file.f) !=
      static_cast<std::size_t>(t.values.size()))
    throw std::runtime_error("latent file: truncated while reading values");
  return t;
}

std::pair<LatentTensor, LatentTensor> split_channels(const LatentTensor& t) {
  if (t.shape.ch % 2 != 0)
    throw std::invalid_argument("split_channels: channel count must be even");
  const auto half = static_cast<Eigen::Index>(t.shape.half_elems());
  LatentShape hs{t.shape.ch / 2, t.shape.h, t.shape.w};
  LatentTensor a{hs, t.values.head(half)};
  LatentTensor b{hs, t.values.tail(half)};
  return {std::move(a), std::move(b)};
}

LatentTensor merge_channels(const LatentTensor& prc_part, const LatentTensor& gs_part) {
  if (!(prc_part.shape == gs_part.shape))
    throw std::invalid_argument("merge_channels: halves must have equal shapes");
  LatentShape full{prc_part.shape.ch * 2, prc_part.shape.h, prc_part.shape.w};
  LatentTensor t = make_latent(full);
  t.values.head(prc_part.values.size()) = prc_part.values;
  t.values.tail(gs_part.values.size()) = gs_part.values;
  return t;
}

}  // namespace latentmark
