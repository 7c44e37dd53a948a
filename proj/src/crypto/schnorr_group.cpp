#include <array>
#include <vector>

#include "vvote/crypto/group.hpp"
#include "vvote/error.hpp"

namespace vvote::crypto {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m) {
  u64 r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

void store(std::uint8_t* out, u64 v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * (7 - i)));
}

u64 load(const std::uint8_t* in) {
  u64 v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

/// Montgomery arithmetic modulo an odd p < 2^63 with R = 2^64.
struct Montgomery {
  u64 p = 0;
  u64 neg_inv = 0;  // -p^{-1} mod 2^64
  u64 r2 = 0;       // R^2 mod p
  u64 one = 0;      // R mod p

  explicit Montgomery(u64 modulus) : p(modulus) {
    u64 inv = p;  // Newton iteration for p^{-1} mod 2^64
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    neg_inv = ~inv + 1;
    one = static_cast<u64>((static_cast<u128>(1) << 64) % p);
    r2 = mulmod(one, one, p);
  }

  u64 mul(u64 a, u64 b) const {
    u128 t = static_cast<u128>(a) * b;
    u64 m = static_cast<u64>(t) * neg_inv;
    u128 u = (t + static_cast<u128>(m) * p) >> 64;
    u64 r = static_cast<u64>(u);
    return r >= p ? r - p : r;
  }
  u64 to(u64 x) const { return mul(x % p, r2); }
  u64 from(u64 x) const { return mul(x, 1); }

  u64 pow(u64 base_m, u64 e) const {
    // 4-bit fixed window
    std::array<u64, 16> table{};
    table[0] = one;
    for (int i = 1; i < 16; ++i) table[i] = mul(table[i - 1], base_m);
    u64 r = one;
    for (int shift = 60; shift >= 0; shift -= 4) {
      if (r != one) {
        r = mul(r, r);
        r = mul(r, r);
        r = mul(r, r);
        r = mul(r, r);
      }
      unsigned nib = static_cast<unsigned>((e >> shift) & 0xf);
      if (nib) r = mul(r, table[nib]);
    }
    return r;
  }
};

class SchnorrGroup;

class SchnorrFixedBase final : public FixedBase {
 public:
  SchnorrFixedBase(const Montgomery& mont, u64 base);
  Element exp(const Scalar& e) const override;

 private:
  const Montgomery& mont_;
  // table_[w][k] = base^(k * 256^w) in Montgomery form
  std::vector<std::array<u64, 256>> table_;
};

class SchnorrGroup final : public Group {
 public:
  SchnorrGroup(u64 p, u64 q, u64 g) : p_(p), q_(q), g_(g), mont_(p) {
    require(p < (1ULL << 63), ErrorCode::Parameter, "schnorr modulus must be below 2^63");
    require(is_prime_u64(q), ErrorCode::Parameter, "group order q is not prime");
    require(p == 2 * q + 1 && is_prime_u64(p), ErrorCode::Parameter, "p must be the safe prime 2q+1");
    require(g > 1 && g < p && powmod(g, q, p) == 1, ErrorCode::Parameter, "g does not have order q");
    store(identity_.raw.data(), 1);
    store(generator_.raw.data(), g);
  }

  std::string name() const override {
    if (p_ == 9223372036854771239ULL && q_ == 4611686018427385619ULL && g_ == 4) return "test64";
    return "schnorr:" + std::to_string(p_) + ":" + std::to_string(q_) + ":" + std::to_string(g_);
  }
  std::size_t element_size() const override { return 8; }
  std::size_t scalar_size() const override { return 8; }
  std::string order_decimal() const override { return std::to_string(q_); }

  const Element& identity() const override { return identity_; }
  const Element& generator() const override { return generator_; }

  Element mul(const Element& x, const Element& y) const override {
    return make(mulmod(value(x), value(y), p_));
  }
  Element inverse(const Element& x) const override { return make(powmod(value(x), p_ - 2, p_)); }
  Element exp(const Element& base, const Scalar& e) const override {
    return make(mont_.from(mont_.pow(mont_.to(value(base)), svalue(e))));
  }
  bool is_member(const Element& x) const override {
    for (std::size_t i = 8; i < kElementBytes; ++i)
      if (x.raw[i] != 0) return false;
    u64 v = value(x);
    if (v == 0 || v >= p_) return false;
    return mont_.from(mont_.pow(mont_.to(v), q_)) == 1;
  }
  std::unique_ptr<FixedBase> fixed_base(const Element& base) const override {
    return std::make_unique<SchnorrFixedBase>(mont_, value(base));
  }

  Scalar scalar(u64 v) const override { return smake(v % q_); }
  Scalar add(const Scalar& x, const Scalar& y) const override {
    return smake(static_cast<u64>((static_cast<u128>(svalue(x)) + svalue(y)) % q_));
  }
  Scalar sub(const Scalar& x, const Scalar& y) const override {
    return smake(static_cast<u64>((static_cast<u128>(svalue(x)) + q_ - svalue(y)) % q_));
  }
  Scalar mul(const Scalar& x, const Scalar& y) const override {
    return smake(mulmod(svalue(x), svalue(y), q_));
  }
  Scalar inverse(const Scalar& x) const override {
    require(svalue(x) != 0, ErrorCode::Parameter, "zero has no inverse");
    return smake(powmod(svalue(x), q_ - 2, q_));
  }
  Scalar reduce(ByteView wide) const override {
    u64 r = 0;
    for (auto b : wide) r = static_cast<u64>(((static_cast<u128>(r) << 8) | b) % q_);
    return smake(r);
  }
  bool is_canonical(const Scalar& s) const override {
    for (std::size_t i = 8; i < kScalarBytes; ++i)
      if (s.raw[i] != 0) return false;
    return svalue(s) < q_;
  }

 private:
  static u64 value(const Element& e) { return load(e.raw.data()); }
  static u64 svalue(const Scalar& s) { return load(s.raw.data()); }
  static Element make(u64 v) {
    Element e;
    store(e.raw.data(), v);
    return e;
  }
  static Scalar smake(u64 v) {
    Scalar s;
    store(s.raw.data(), v);
    return s;
  }

  u64 p_, q_, g_;
  Montgomery mont_;
  Element identity_, generator_;
};

SchnorrFixedBase::SchnorrFixedBase(const Montgomery& mont, u64 base) : mont_(mont), table_(8) {
  u64 step = mont_.to(base);
  for (auto& row : table_) {
    row[0] = mont_.one;
    for (int k = 1; k < 256; ++k) row[k] = mont_.mul(row[k - 1], step);
    // next window base = step^256
    u64 next = row[255];
    step = mont_.mul(next, step);
  }
}

Element SchnorrFixedBase::exp(const Scalar& e) const {
  u64 s = load(e.raw.data());
  u64 r = mont_.one;
  for (std::size_t w = 0; w < table_.size(); ++w) {
    unsigned byte = static_cast<unsigned>((s >> (8 * w)) & 0xff);
    if (byte) r = mont_.mul(r, table_[w][byte]);
  }
  Element out;
  store(out.raw.data(), mont_.from(r));
  return out;
}

}  // namespace

GroupPtr make_schnorr_group(std::uint64_t p, std::uint64_t q, std::uint64_t g) {
  return std::make_shared<SchnorrGroup>(p, q, g);
}

}  // namespace vvote::crypto
