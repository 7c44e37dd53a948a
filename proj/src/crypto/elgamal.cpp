#include "vvote/crypto/elgamal.hpp"

#include <algorithm>
#include <set>

#include "vvote/crypto/drbg.hpp"
#include "vvote/crypto/hash.hpp"
#include "vvote/error.hpp"

namespace vvote::crypto {

const Element& PublicKeySet::trustee_key(std::uint32_t index) const {
  require(index >= 1 && index <= trustee_keys.size(), ErrorCode::Parameter,
          "unknown trustee index " + std::to_string(index));
  return trustee_keys[index - 1];
}

KeyMaterial keygen(const GroupPtr& group, std::uint32_t trustees, std::uint32_t threshold, ByteView seed) {
  require(threshold >= 1 && threshold <= trustees, ErrorCode::Parameter, "need 1 <= t <= n");
  require(!seed.empty(), ErrorCode::Parameter, "keygen seed must be non-empty");
  Drbg rng(seed);
  std::vector<Scalar> coeffs;
  for (std::uint32_t i = 0; i < threshold; ++i) coeffs.push_back(group->random_scalar(rng));

  KeyMaterial km;
  km.public_keys.threshold = threshold;
  km.public_keys.joint = group->exp(group->generator(), coeffs[0]);
  for (std::uint32_t x = 1; x <= trustees; ++x) {
    // Horner evaluation of the sharing polynomial at x
    Scalar xs = group->scalar(x);
    Scalar acc = coeffs.back();
    for (auto it = coeffs.rbegin() + 1; it != coeffs.rend(); ++it) acc = group->add(group->mul(acc, xs), *it);
    km.shares.push_back({x, acc});
    km.public_keys.trustee_keys.push_back(group->exp(group->generator(), acc));
  }
  return km;
}

Scalar lagrange_at_zero(const Group& group, std::uint32_t index, std::span<const std::uint32_t> indices) {
  Scalar num = group.scalar(1);
  Scalar den = group.scalar(1);
  for (auto j : indices) {
    if (j == index) continue;
    num = group.mul(num, group.scalar(j));
    den = group.mul(den, group.sub(group.scalar(j), group.scalar(index)));
  }
  return group.mul(num, group.inverse(den));
}

ElGamal::ElGamal(GroupPtr group, const Element& public_key, std::uint64_t bound)
    : group_(std::move(group)),
      public_key_(public_key),
      bound_(bound),
      g_table_(group_->fixed_base(group_->generator())),
      pk_table_(group_->fixed_base(public_key)) {}

Ciphertext ElGamal::encrypt(std::uint64_t m, const Scalar& r) const {
  require(m < bound_, ErrorCode::Encoding,
          "plaintext " + std::to_string(m) + " outside table bound " + std::to_string(bound_));
  return {g_table_->exp(r), group_->mul(g_table_->exp(group_->scalar(m)), pk_table_->exp(r))};
}

Ciphertext ElGamal::reencrypt(const Ciphertext& c, const Scalar& r) const {
  return {group_->mul(c.a, g_table_->exp(r)), group_->mul(c.b, pk_table_->exp(r))};
}

Ciphertext ElGamal::trivial(std::uint64_t m) const {
  return {group_->identity(), g_table_->exp(group_->scalar(m))};
}

Ciphertext ElGamal::multiply(const Ciphertext& x, const Ciphertext& y) const {
  return {group_->mul(x.a, y.a), group_->mul(x.b, y.b)};
}

Ciphertext ElGamal::power(const Ciphertext& c, std::uint64_t k) const {
  auto s = group_->scalar(k);
  return {group_->exp(c.a, s), group_->exp(c.b, s)};
}

bool is_valid_ciphertext(const Group& group, const Ciphertext& c) {
  return group.is_member(c.a) && group.is_member(c.b);
}

namespace {

Scalar proof_challenge(const Group& group, std::uint32_t trustee, const Element& trustee_key,
                       const Ciphertext& c, const Element& factor, const Element& commit_g,
                       const Element& commit_a) {
  Hasher h("vvote/decryption-proof");
  h.field(group.name());
  h.field(group.encode(group.generator()));
  h.field(static_cast<std::uint64_t>(trustee));
  h.field(group.encode(trustee_key));
  h.field(group.encode(c.a));
  h.field(group.encode(c.b));
  h.field(group.encode(factor));
  h.field(group.encode(commit_g));
  h.field(group.encode(commit_a));
  return group.hash_to_scalar(h);
}

}  // namespace

DecryptionShare partial_decrypt(const Group& group, const TrusteeShare& share, const Ciphertext& c) {
  require(is_valid_ciphertext(group, c), ErrorCode::Decode, "malformed ciphertext");
  Hasher nonce_h("vvote/decryption-nonce");
  nonce_h.field(group.encode(share.value)).field(static_cast<std::uint64_t>(share.index));
  nonce_h.field(group.encode(c.a)).field(group.encode(c.b));
  Scalar w = group.hash_to_scalar(nonce_h);

  DecryptionShare out;
  out.trustee = share.index;
  out.factor = group.exp(c.a, share.value);
  Element trustee_key = group.exp(group.generator(), share.value);
  out.proof.commit_g = group.exp(group.generator(), w);
  out.proof.commit_a = group.exp(c.a, w);
  out.proof.challenge =
      proof_challenge(group, share.index, trustee_key, c, out.factor, out.proof.commit_g, out.proof.commit_a);
  out.proof.response = group.add(w, group.mul(out.proof.challenge, share.value));
  return out;
}

bool verify_decryption(const Group& group, const DecryptionShare& share, const Ciphertext& c,
                       const Element& trustee_key) {
  if (!is_valid_ciphertext(group, c) || !group.is_member(share.factor)) return false;
  const auto& p = share.proof;
  auto expected = proof_challenge(group, share.trustee, trustee_key, c, share.factor, p.commit_g, p.commit_a);
  if (!(expected == p.challenge)) return false;
  // g^z == commit_g * key^e  and  a^z == commit_a * factor^e
  auto lhs1 = group.exp(group.generator(), p.response);
  auto rhs1 = group.mul(p.commit_g, group.exp(trustee_key, p.challenge));
  if (!(lhs1 == rhs1)) return false;
  auto lhs2 = group.exp(c.a, p.response);
  auto rhs2 = group.mul(p.commit_a, group.exp(share.factor, p.challenge));
  return lhs2 == rhs2;
}

DecodeTable::DecodeTable(const Group& group, std::uint64_t bound) : bound_(bound) {
  require(bound >= 1, ErrorCode::Parameter, "table bound must be positive");
  table_.reserve(bound);
  Element acc = group.identity();
  for (std::uint64_t m = 0; m < bound; ++m) {
    auto [it, fresh] = table_.emplace(acc, m);
    require(fresh, ErrorCode::Parameter, "table bound exceeds the group order");
    acc = group.mul(acc, group.generator());
  }
}

std::optional<std::uint64_t> DecodeTable::find(const Element& e) const {
  auto it = table_.find(e);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t combine(const Group& group, std::span<const DecryptionShare> shares, const Ciphertext& c,
                      const DecodeTable& table, std::uint32_t threshold) {
  std::vector<const DecryptionShare*> used;
  std::set<std::uint32_t> seen;
  for (const auto& s : shares) {
    if (used.size() == threshold) break;
    if (seen.insert(s.trustee).second) used.push_back(&s);
  }
  require(used.size() >= threshold && threshold >= 1, ErrorCode::Unavailable,
          "only " + std::to_string(used.size()) + " of " + std::to_string(threshold) +
              " required decryption factors");
  std::vector<std::uint32_t> indices;
  for (auto* s : used) indices.push_back(s->trustee);

  Element mask = group.identity();
  for (auto* s : used) mask = group.mul(mask, group.exp(s->factor, lagrange_at_zero(group, s->trustee, indices)));
  Element gm = group.mul(c.b, group.inverse(mask));
  auto m = table.find(gm);
  require(m.has_value(), ErrorCode::Decode, "decrypted exponent not in the decode table");
  return *m;
}

std::uint64_t decrypt_with_secret(const Group& group, const Scalar& secret, const Ciphertext& c,
                                  const DecodeTable& table) {
  Element gm = group.mul(c.b, group.inverse(group.exp(c.a, secret)));
  auto m = table.find(gm);
  require(m.has_value(), ErrorCode::Decode, "decrypted exponent not in the decode table");
  return *m;
}

}  // namespace vvote::crypto
