#include "vvote/crypto/hash.hpp"

#include "vvote/error.hpp"

namespace vvote::crypto {

void ensure_sodium() {
  static const bool ready = sodium_init() >= 0;
  if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

Hasher::Hasher() {
  ensure_sodium();
  crypto_hash_sha256_init(&state_);
}

Hasher::Hasher(std::string_view domain) : Hasher() { field(domain); }

Hasher& Hasher::update(ByteView data) {
  crypto_hash_sha256_update(&state_, data.data(), data.size());
  return *this;
}

Hasher& Hasher::field(ByteView data) {
  field(static_cast<std::uint64_t>(data.size()));
  return update(data);
}

Hasher& Hasher::field(std::uint64_t v) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 0; i < 8; ++i) be[i] = static_cast<std::uint8_t>(v >> (8 * (7 - i)));
  return update(be);
}

Digest Hasher::finish() {
  Digest out{};
  crypto_hash_sha256_final(&state_, out.data());
  return out;
}

Digest sha256(ByteView data) {
  Digest out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

std::string sha256_hex(std::string_view s) { return hex(sha256(s)); }

Digest digest_from_hex(std::string_view h) {
  auto raw = from_hex(h);
  require(raw.size() == 32, ErrorCode::Decode, "digest must be 32 bytes");
  Digest d{};
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

}  // namespace vvote::crypto
