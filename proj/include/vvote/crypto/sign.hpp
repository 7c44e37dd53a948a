#pragma once

#include <array>
#include <string>
#include <string_view>

#include "vvote/crypto/bytes.hpp"

namespace vvote::crypto {

using PublicSigningKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

/// Ed25519 signing identity, derived deterministically from a seed string.
class SigningKey {
 public:
  static SigningKey from_seed(std::string_view seed);

  Signature sign(ByteView message) const;
  Signature sign(std::string_view message) const { return sign(as_bytes(message)); }
  const PublicSigningKey& public_key() const { return public_; }

 private:
  std::array<std::uint8_t, 64> secret_{};
  PublicSigningKey public_{};
};

bool verify_signature(const PublicSigningKey& key, ByteView message, const Signature& sig);
inline bool verify_signature(const PublicSigningKey& key, std::string_view message, const Signature& sig) {
  return verify_signature(key, as_bytes(message), sig);
}

std::string key_to_hex(const PublicSigningKey& key);
PublicSigningKey key_from_hex(std::string_view hex);
std::string signature_to_hex(const Signature& sig);
Signature signature_from_hex(std::string_view hex);

}  // namespace vvote::crypto
