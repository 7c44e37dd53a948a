#include "vvote/crypto/sign.hpp"

#include <algorithm>

#include <sodium.h>

#include "vvote/crypto/hash.hpp"
#include "vvote/error.hpp"

namespace vvote::crypto {

SigningKey SigningKey::from_seed(std::string_view seed) {
  auto material = Hasher("vvote/ed25519-seed").field(seed).finish();
  SigningKey key;
  ensure_sodium();
  crypto_sign_seed_keypair(key.public_.data(), key.secret_.data(), material.data());
  return key;
}

Signature SigningKey::sign(ByteView message) const {
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

bool verify_signature(const PublicSigningKey& key, ByteView message, const Signature& sig) {
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), key.data()) == 0;
}

namespace {
template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex, const char* what) {
  auto raw = from_hex(hex);
  require(raw.size() == N, ErrorCode::Decode, std::string("bad length for ") + what);
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}
}  // namespace

std::string key_to_hex(const PublicSigningKey& key) { return to_hex(key); }
PublicSigningKey key_from_hex(std::string_view hex) { return fixed_from_hex<32>(hex, "public key"); }
std::string signature_to_hex(const Signature& sig) { return to_hex(sig); }
Signature signature_from_hex(std::string_view hex) { return fixed_from_hex<64>(hex, "signature"); }

}  // namespace vvote::crypto
