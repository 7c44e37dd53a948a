#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <sodium.h>

#include "vvote/crypto/bytes.hpp"

namespace vvote::crypto {

using Digest = std::array<std::uint8_t, 32>;

void ensure_sodium();

/// Incremental SHA-256. The `field` helpers length-prefix their input so
/// that concatenated fields cannot be re-split into a different context.
class Hasher {
 public:
  Hasher();
  explicit Hasher(std::string_view domain);

  Hasher& update(ByteView data);
  Hasher& update(std::string_view data) { return update(as_bytes(data)); }
  Hasher& field(ByteView data);
  Hasher& field(std::string_view data) { return field(as_bytes(data)); }
  Hasher& field(std::uint64_t v);

  Digest finish();

 private:
  crypto_hash_sha256_state state_;
};

Digest sha256(ByteView data);
inline Digest sha256(std::string_view s) { return sha256(as_bytes(s)); }
std::string sha256_hex(std::string_view s);
inline std::string hex(const Digest& d) { return to_hex(d); }
Digest digest_from_hex(std::string_view hex);

}  // namespace vvote::crypto
