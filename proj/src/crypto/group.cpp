#include "vvote/crypto/group.hpp"

#include <charconv>
#include <vector>

#include "vvote/crypto/drbg.hpp"
#include "vvote/crypto/hash.hpp"
#include "vvote/error.hpp"

namespace vvote::crypto {

std::size_t ElementHash::operator()(const Element& e) const noexcept {
  // FNV-1a over the first 16 bytes; encodings are already uniform-looking.
  std::size_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < 16; ++i) {
    h ^= e.raw[i];
    h *= 1099511628211ULL;
  }
  h ^= e.raw[32];
  return h;
}

namespace {
class GenericFixedBase final : public FixedBase {
 public:
  GenericFixedBase(const Group& group, Element base) : group_(group), base_(base) {}
  Element exp(const Scalar& e) const override { return group_.exp(base_, e); }

 private:
  const Group& group_;
  Element base_;
};
}  // namespace

std::unique_ptr<FixedBase> Group::fixed_base(const Element& base) const {
  return std::make_unique<GenericFixedBase>(*this, base);
}

Scalar Group::random_scalar(Drbg& rng) const {
  std::array<std::uint8_t, 64> wide{};
  rng.fill(wide);
  return reduce(wide);
}

Scalar Group::hash_to_scalar(Hasher& h) const {
  auto d = h.finish();
  auto d2 = Hasher("vvote/wide").update(d).finish();
  std::array<std::uint8_t, 64> wide{};
  std::copy(d.begin(), d.end(), wide.begin());
  std::copy(d2.begin(), d2.end(), wide.begin() + 32);
  return reduce(wide);
}

Bytes Group::encode(const Element& e) const {
  return Bytes(e.raw.begin(), e.raw.begin() + static_cast<std::ptrdiff_t>(element_size()));
}

Element Group::decode(ByteView bytes) const {
  require(bytes.size() == element_size(), ErrorCode::Decode, "group element has wrong length");
  Element e;
  std::copy(bytes.begin(), bytes.end(), e.raw.begin());
  require(is_member(e), ErrorCode::Decode, "value is not a member of the group");
  return e;
}

std::string Group::to_hex(const Element& e) const { return vvote::to_hex(encode(e)); }
Element Group::element_from_hex(std::string_view hex) const { return decode(from_hex(hex)); }

Bytes Group::encode(const Scalar& s) const {
  return Bytes(s.raw.begin(), s.raw.begin() + static_cast<std::ptrdiff_t>(scalar_size()));
}

Scalar Group::decode_scalar(ByteView bytes) const {
  require(bytes.size() == scalar_size(), ErrorCode::Decode, "scalar has wrong length");
  Scalar s;
  std::copy(bytes.begin(), bytes.end(), s.raw.begin());
  require(is_canonical(s), ErrorCode::Decode, "scalar not reduced modulo the group order");
  return s;
}

std::string Group::to_hex(const Scalar& s) const { return vvote::to_hex(encode(s)); }
Scalar Group::scalar_from_hex(std::string_view hex) const { return decode_scalar(from_hex(hex)); }

GroupPtr test_group() {
  static const GroupPtr group =
      make_schnorr_group(9223372036854771239ULL, 4611686018427385619ULL, 4);
  return group;
}

GroupPtr make_group(std::string_view name) {
  if (name == "test64") return test_group();
  if (name == "p256") return make_p256_group();
  if (name.starts_with("schnorr:")) {
    std::vector<std::uint64_t> parts;
    auto rest = name.substr(8);
    while (!rest.empty()) {
      auto colon = rest.find(':');
      auto piece = rest.substr(0, colon);
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
      require(ec == std::errc() && ptr == piece.data() + piece.size(), ErrorCode::Parameter,
              "bad schnorr group descriptor");
      parts.push_back(v);
      if (colon == std::string_view::npos) break;
      rest = rest.substr(colon + 1);
    }
    require(parts.size() == 3, ErrorCode::Parameter, "schnorr descriptor needs p:q:g");
    return make_schnorr_group(parts[0], parts[1], parts[2]);
  }
  fail(ErrorCode::Parameter, "unknown group '" + std::string(name) + "'");
}

}  // namespace vvote::crypto
