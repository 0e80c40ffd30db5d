#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace latentmark {

/// Packed vector over F2. Bit i lives in word i/64 at position i%64;
/// byte serialization is LSB-first within each byte.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t nbits) : size_(nbits), words_((nbits + 63) / 64, 0) {}

  static BitVec from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t nbits) {
    if (bytes.size() * 8 < nbits) throw std::invalid_argument("BitVec::from_bytes: too few bytes");
    BitVec v(nbits);
    for (std::size_t i = 0; i < nbits; ++i) {
      if ((bytes[i / 8] >> (i % 8)) & 1) v.set(i, true);
    }
    return v;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (v)
      words_[i / 64] |= mask;
    else
      words_[i / 64] &= ~mask;
  }

  void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  BitVec& operator^=(const BitVec& o) {
    if (o.size_ != size_) throw std::invalid_argument("BitVec xor: size mismatch");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
    return *this;
  }

  friend BitVec operator^(BitVec a, const BitVec& b) {
    a ^= b;
    return a;
  }

  bool operator==(const BitVec&) const = default;

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }

  std::size_t hamming(const BitVec& o) const {
    if (o.size_ != size_) throw std::invalid_argument("BitVec hamming: size mismatch");
    std::size_t c = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) c += std::popcount(words_[w] ^ o.words_[w]);
    return c;
  }

  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }

  /// Index of the lowest set bit, or size() if none.
  std::size_t lowest_set() const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w]) return w * 64 + std::countr_zero(words_[w]);
    return size_;
  }

  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
    for (std::size_t i = 0; i < size_; ++i)
      if (get(i)) out[i / 8] |= std::uint8_t(1u << (i % 8));
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace latentmark
