#include <memory>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include "vvote/crypto/group.hpp"
#include "vvote/error.hpp"

namespace vvote::crypto {

namespace {

struct BnCtxFree {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct BnFree {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct PointFree {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct GroupFree {
  void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};

using CtxPtr = std::unique_ptr<BN_CTX, BnCtxFree>;
using BnPtr = std::unique_ptr<BIGNUM, BnFree>;
using PointPtr = std::unique_ptr<EC_POINT, PointFree>;

void check(int ok, const char* what) {
  if (ok != 1) fail(ErrorCode::Decode, std::string("openssl: ") + what);
}

/// P-256 with points in 33-byte compressed form; the point at infinity is
/// encoded as 33 zero bytes.
class P256Group final : public Group {
 public:
  P256Group() : group_(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1)), order_(BN_new()) {
    if (!group_) throw std::runtime_error("P-256 unavailable in OpenSSL");
    check(EC_GROUP_get_order(group_.get(), order_.get(), nullptr), "order");
    PointPtr g(EC_POINT_dup(EC_GROUP_get0_generator(group_.get()), group_.get()));
    generator_ = store(g.get());
  }

  std::string name() const override { return "p256"; }
  std::size_t element_size() const override { return 33; }
  std::size_t scalar_size() const override { return 32; }
  std::string order_decimal() const override {
    char* s = BN_bn2dec(order_.get());
    std::string out(s);
    OPENSSL_free(s);
    return out;
  }

  const Element& identity() const override { return identity_; }
  const Element& generator() const override { return generator_; }

  Element mul(const Element& x, const Element& y) const override {
    CtxPtr ctx(BN_CTX_new());
    auto a = load(x, ctx.get());
    auto b = load(y, ctx.get());
    PointPtr r(EC_POINT_new(group_.get()));
    check(EC_POINT_add(group_.get(), r.get(), a.get(), b.get(), ctx.get()), "add");
    return store(r.get(), ctx.get());
  }
  Element inverse(const Element& x) const override {
    CtxPtr ctx(BN_CTX_new());
    auto a = load(x, ctx.get());
    check(EC_POINT_invert(group_.get(), a.get(), ctx.get()), "invert");
    return store(a.get(), ctx.get());
  }
  Element exp(const Element& base, const Scalar& e) const override {
    CtxPtr ctx(BN_CTX_new());
    auto a = load(base, ctx.get());
    auto k = bn(e);
    PointPtr r(EC_POINT_new(group_.get()));
    check(EC_POINT_mul(group_.get(), r.get(), nullptr, a.get(), k.get(), ctx.get()), "mul");
    return store(r.get(), ctx.get());
  }
  bool is_member(const Element& x) const override {
    try {
      CtxPtr ctx(BN_CTX_new());
      load(x, ctx.get());
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  Scalar scalar(std::uint64_t v) const override {
    CtxPtr ctx(BN_CTX_new());
    BnPtr b(BN_new());
    BN_set_word(b.get(), v);
    BN_nnmod(b.get(), b.get(), order_.get(), ctx.get());
    return from_bn(b.get());
  }
  Scalar add(const Scalar& x, const Scalar& y) const override {
    return arith(x, y, [](BIGNUM* r, const BIGNUM* a, const BIGNUM* b, const BIGNUM* m, BN_CTX* c) {
      return BN_mod_add(r, a, b, m, c);
    });
  }
  Scalar sub(const Scalar& x, const Scalar& y) const override {
    return arith(x, y, [](BIGNUM* r, const BIGNUM* a, const BIGNUM* b, const BIGNUM* m, BN_CTX* c) {
      return BN_mod_sub(r, a, b, m, c);
    });
  }
  Scalar mul(const Scalar& x, const Scalar& y) const override {
    return arith(x, y, [](BIGNUM* r, const BIGNUM* a, const BIGNUM* b, const BIGNUM* m, BN_CTX* c) {
      return BN_mod_mul(r, a, b, m, c);
    });
  }
  Scalar inverse(const Scalar& x) const override {
    CtxPtr ctx(BN_CTX_new());
    auto a = bn(x);
    require(!BN_is_zero(a.get()), ErrorCode::Parameter, "zero has no inverse");
    BnPtr r(BN_mod_inverse(nullptr, a.get(), order_.get(), ctx.get()));
    return from_bn(r.get());
  }
  Scalar reduce(ByteView wide) const override {
    CtxPtr ctx(BN_CTX_new());
    BnPtr b(BN_bin2bn(wide.data(), static_cast<int>(wide.size()), nullptr));
    BN_nnmod(b.get(), b.get(), order_.get(), ctx.get());
    return from_bn(b.get());
  }
  bool is_canonical(const Scalar& s) const override { return BN_cmp(bn(s).get(), order_.get()) < 0; }

 private:
  PointPtr load(const Element& e, BN_CTX* ctx) const {
    PointPtr p(EC_POINT_new(group_.get()));
    if (e == identity_) {
      EC_POINT_set_to_infinity(group_.get(), p.get());
      return p;
    }
    check(EC_POINT_oct2point(group_.get(), p.get(), e.raw.data(), 33, ctx), "decode point");
    return p;
  }
  Element store(const EC_POINT* p, BN_CTX* ctx = nullptr) const {
    Element e;
    if (EC_POINT_is_at_infinity(group_.get(), p)) return e;
    auto n = EC_POINT_point2oct(group_.get(), p, POINT_CONVERSION_COMPRESSED, e.raw.data(), 33, ctx);
    if (n != 33) fail(ErrorCode::Encoding, "point encoding failed");
    return e;
  }
  static BnPtr bn(const Scalar& s) { return BnPtr(BN_bin2bn(s.raw.data(), 32, nullptr)); }
  static Scalar from_bn(const BIGNUM* b) {
    Scalar s;
    BN_bn2binpad(b, s.raw.data(), 32);
    return s;
  }
  template <class Op>
  Scalar arith(const Scalar& x, const Scalar& y, Op op) const {
    CtxPtr ctx(BN_CTX_new());
    auto a = bn(x);
    auto b = bn(y);
    BnPtr r(BN_new());
    op(r.get(), a.get(), b.get(), order_.get(), ctx.get());
    return from_bn(r.get());
  }

  std::unique_ptr<EC_GROUP, GroupFree> group_;
  BnPtr order_;
  Element identity_{};
  Element generator_{};
};

}  // namespace

GroupPtr make_p256_group() {
  static const GroupPtr group = std::make_shared<P256Group>();
  return group;
}

}  // namespace vvote::crypto
