#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "vvote/crypto/bytes.hpp"

namespace vvote::crypto {

/// Deterministic byte stream keyed by a seed (ChaCha20 blocks, rekeyed per
/// refill). Every random choice in the system flows through one of these so
/// runs are reproducible from their seeds.
class Drbg {
 public:
  explicit Drbg(ByteView seed);
  explicit Drbg(std::string_view seed) : Drbg(as_bytes(seed)) {}

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  /// Uniform in [0, bound); bound must be non-zero.
  std::uint64_t uniform(std::uint64_t bound);
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }

  /// Independent child stream, keyed by this stream's key and a label.
  Drbg fork(std::string_view label) const;

 private:
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 512> buffer_{};
  std::size_t pos_ = 512;
};

}  // namespace vvote::crypto
