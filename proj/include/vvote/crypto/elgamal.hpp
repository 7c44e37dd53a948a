#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "vvote/crypto/group.hpp"

namespace vvote::crypto {

/// Exponential ElGamal pair (g^r, g^m * pk^r).
struct Ciphertext {
  Element a;
  Element b;
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

/// Group plus the largest plaintext recoverable by table lookup.
struct GroupParams {
  GroupPtr group;
  std::uint64_t table_bound = 0;
};

struct TrusteeShare {
  std::uint32_t index = 0;  // Shamir x-coordinate, 1-based
  Scalar value;
};

struct PublicKeySet {
  Element joint;
  std::vector<Element> trustee_keys;  // g^share, position index-1
  std::uint32_t threshold = 0;

  std::uint32_t trustees() const { return static_cast<std::uint32_t>(trustee_keys.size()); }
  const Element& trustee_key(std::uint32_t index) const;
};

struct KeyMaterial {
  PublicKeySet public_keys;
  std::vector<TrusteeShare> shares;
  friend bool operator==(const KeyMaterial& x, const KeyMaterial& y) {
    if (x.shares.size() != y.shares.size() || !(x.public_keys.joint == y.public_keys.joint)) return false;
    for (std::size_t i = 0; i < x.shares.size(); ++i)
      if (x.shares[i].index != y.shares[i].index || !(x.shares[i].value == y.shares[i].value)) return false;
    return x.public_keys.trustee_keys == y.public_keys.trustee_keys &&
           x.public_keys.threshold == y.public_keys.threshold;
  }
};

/// Chaum-Pedersen transcript: log_g(trustee key) == log_a(factor).
struct DecryptionProof {
  Element commit_g;
  Element commit_a;
  Scalar challenge;
  Scalar response;
};

struct DecryptionShare {
  std::uint32_t trustee = 0;
  Element factor;
  DecryptionProof proof;
};

/// Dealer-based Shamir sharing of a fresh secret, deterministic in `seed`.
KeyMaterial keygen(const GroupPtr& group, std::uint32_t trustees, std::uint32_t threshold, ByteView seed);

/// Lagrange coefficient at x=0 for `index` over the x-coordinates `indices`.
Scalar lagrange_at_zero(const Group& group, std::uint32_t index, std::span<const std::uint32_t> indices);

/// Encryption under one joint key, with fixed-base tables for g and pk.
class ElGamal {
 public:
  ElGamal(GroupPtr group, const Element& public_key, std::uint64_t bound);

  Ciphertext encrypt(std::uint64_t m, const Scalar& r) const;
  Ciphertext reencrypt(const Ciphertext& c, const Scalar& r) const;
  /// Encryption of m with zero randomness: (1, g^m).
  Ciphertext trivial(std::uint64_t m) const;
  Ciphertext multiply(const Ciphertext& x, const Ciphertext& y) const;
  /// Componentwise c^k; encrypts k*m.
  Ciphertext power(const Ciphertext& c, std::uint64_t k) const;

  const Group& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  const Element& public_key() const { return public_key_; }
  std::uint64_t bound() const { return bound_; }

 private:
  GroupPtr group_;
  Element public_key_;
  std::uint64_t bound_;
  std::unique_ptr<FixedBase> g_table_;
  std::unique_ptr<FixedBase> pk_table_;
};

bool is_valid_ciphertext(const Group& group, const Ciphertext& c);

/// Trustee decryption factor a^share with a non-interactive proof. The proof
/// nonce is derived from the share and ciphertext, so the output is a pure
/// function of its inputs.
DecryptionShare partial_decrypt(const Group& group, const TrusteeShare& share, const Ciphertext& c);

bool verify_decryption(const Group& group, const DecryptionShare& share, const Ciphertext& c,
                       const Element& trustee_key);

/// Reverse lookup g^m -> m for m in [0, bound).
class DecodeTable {
 public:
  DecodeTable(const Group& group, std::uint64_t bound);
  std::optional<std::uint64_t> find(const Element& e) const;
  std::uint64_t bound() const { return bound_; }

 private:
  std::uint64_t bound_;
  std::unordered_map<Element, std::uint64_t, ElementHash> table_;
};

/// Recovers the plaintext from at least `threshold` factors with distinct
/// trustee indices. Fewer factors -> Unavailable; plaintext outside the
/// table -> Decode.
std::uint64_t combine(const Group& group, std::span<const DecryptionShare> shares, const Ciphertext& c,
                      const DecodeTable& table, std::uint32_t threshold);

/// Single-key decryption, used by tests and the dealer-side oracle.
std::uint64_t decrypt_with_secret(const Group& group, const Scalar& secret, const Ciphertext& c,
                                  const DecodeTable& table);

}  // namespace vvote::crypto
