#include "vvote/crypto/drbg.hpp"

#include <sodium.h>

#include "vvote/crypto/hash.hpp"
#include "vvote/error.hpp"

namespace vvote::crypto {

Drbg::Drbg(ByteView seed) { key_ = Hasher("vvote/drbg").field(seed).finish(); }

void Drbg::refill() {
  auto block_key = Hasher("vvote/drbg/block").update(key_).field(counter_++).finish();
  randombytes_buf_deterministic(buffer_.data(), buffer_.size(), block_key.data());
  pos_ = 0;
}

void Drbg::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (pos_ == buffer_.size()) refill();
    b = buffer_[pos_++];
  }
}

std::uint64_t Drbg::next_u64() {
  std::array<std::uint8_t, 8> raw{};
  fill(raw);
  return read_u64_be(raw.data());
}

std::uint64_t Drbg::uniform(std::uint64_t bound) {
  require(bound != 0, ErrorCode::Parameter, "uniform bound must be non-zero");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    auto v = next_u64();
    if (v <= limit) return v % bound;
  }
}

double Drbg::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Drbg Drbg::fork(std::string_view label) const {
  auto child = Hasher("vvote/drbg/fork").update(key_).field(label).finish();
  return Drbg(ByteView(child));
}

}  // namespace vvote::crypto
