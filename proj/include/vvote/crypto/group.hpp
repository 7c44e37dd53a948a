#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "vvote/crypto/bytes.hpp"

namespace vvote::crypto {

class Drbg;
class Hasher;

inline constexpr std::size_t kElementBytes = 33;
inline constexpr std::size_t kScalarBytes = 32;

/// Group element in the owning group's canonical encoding, left-aligned and
/// zero padded. Only `Group::element_size()` leading bytes are significant.
struct Element {
  std::array<std::uint8_t, kElementBytes> raw{};
  friend bool operator==(const Element&, const Element&) = default;
};

/// Exponent modulo the group order, big-endian, left-aligned like Element.
struct Scalar {
  std::array<std::uint8_t, kScalarBytes> raw{};
  friend bool operator==(const Scalar&, const Scalar&) = default;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept;
};

/// Precomputed powers of one base for repeated exponentiation.
class FixedBase {
 public:
  virtual ~FixedBase() = default;
  virtual Element exp(const Scalar& e) const = 0;
};

/// Prime-order group used for ElGamal. Implementations are immutable and
/// safe to share between threads.
class Group {
 public:
  virtual ~Group() = default;

  /// Descriptor accepted by make_group().
  virtual std::string name() const = 0;
  virtual std::size_t element_size() const = 0;
  virtual std::size_t scalar_size() const = 0;
  virtual std::string order_decimal() const = 0;

  virtual const Element& identity() const = 0;
  virtual const Element& generator() const = 0;
  virtual Element mul(const Element& x, const Element& y) const = 0;
  virtual Element inverse(const Element& x) const = 0;
  virtual Element exp(const Element& base, const Scalar& e) const = 0;
  virtual bool is_member(const Element& x) const = 0;
  virtual std::unique_ptr<FixedBase> fixed_base(const Element& base) const;

  virtual Scalar scalar(std::uint64_t v) const = 0;
  virtual Scalar add(const Scalar& x, const Scalar& y) const = 0;
  virtual Scalar sub(const Scalar& x, const Scalar& y) const = 0;
  virtual Scalar mul(const Scalar& x, const Scalar& y) const = 0;
  virtual Scalar inverse(const Scalar& x) const = 0;
  /// Interprets `wide` as a big-endian integer and reduces it mod the order.
  virtual Scalar reduce(ByteView wide) const = 0;
  virtual bool is_canonical(const Scalar& s) const = 0;

  Scalar random_scalar(Drbg& rng) const;
  Scalar hash_to_scalar(Hasher& h) const;
  Scalar negate(const Scalar& x) const { return sub(scalar(0), x); }
  Element exp_u64(const Element& base, std::uint64_t e) const { return exp(base, scalar(e)); }

  Bytes encode(const Element& e) const;
  Element decode(ByteView bytes) const;  // length + membership checked
  std::string to_hex(const Element& e) const;
  Element element_from_hex(std::string_view hex) const;

  Bytes encode(const Scalar& s) const;
  Scalar decode_scalar(ByteView bytes) const;
  std::string to_hex(const Scalar& s) const;
  Scalar scalar_from_hex(std::string_view hex) const;
};

using GroupPtr = std::shared_ptr<const Group>;

/// Schnorr group: the order-q subgroup of Z_p^* for a safe prime p = 2q+1
/// below 2^63. Small enough for brute-force oracles in tests.
GroupPtr make_schnorr_group(std::uint64_t p, std::uint64_t q, std::uint64_t g);

/// NIST P-256, ~128-bit security.
GroupPtr make_p256_group();

/// The 63-bit Schnorr group used for tests and small-group simulation runs.
GroupPtr test_group();

/// Accepts "test64", "p256", or "schnorr:<p>:<q>:<g>" (decimal).
GroupPtr make_group(std::string_view name);

}  // namespace vvote::crypto
