#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace latentmark {

using Digest256 = std::array<std::uint8_t, 32>;

class Sha256 {
 public:
  Sha256();
  void update(const std::uint8_t* data, std::size_t len);
  void update(const std::vector<std::uint8_t>& data) { update(data.data(), data.size()); }
  Digest256 finish();

  static Digest256 digest(const std::uint8_t* data, std::size_t len);
  static Digest256 digest(const std::vector<std::uint8_t>& data) {
    return digest(data.data(), data.size());
  }

 private:
  void process_block(const std::uint8_t block[64]);

  std::array<std::uint32_t, 8> state_;
  std::uint64_t total_len_ = 0;
  std::array<std::uint8_t, 64> buf_{};
  std::size_t buf_len_ = 0;
};

Digest256 hmac_sha256(const std::vector<std::uint8_t>& key, const std::vector<std::uint8_t>& msg);

}  // namespace latentmark
