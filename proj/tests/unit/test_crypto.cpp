#include <set>

#include "doctest.h"
#include "vvote/crypto/drbg.hpp"
#include "vvote/crypto/elgamal.hpp"
#include "vvote/crypto/hash.hpp"
#include "vvote/crypto/sign.hpp"
#include "vvote/error.hpp"

using namespace vvote;
using namespace vvote::crypto;

namespace {

// Independent modular arithmetic for the 63-bit test group; shares nothing
// with the Montgomery implementation under test.
using u64 = std::uint64_t;
using u128 = unsigned __int128;
constexpr u64 kP = 9223372036854771239ULL;
constexpr u64 kQ = 4611686018427385619ULL;
constexpr u64 kG = 4;

u64 oracle_mul(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }
u64 oracle_pow(u64 b, u64 e, u64 m) {
  u64 r = 1;
  while (e) {
    if (e & 1) r = oracle_mul(r, b, m);
    b = oracle_mul(b, b, m);
    e >>= 1;
  }
  return r;
}
u64 val(const Element& e) { return read_u64_be(e.raw.data()); }
u64 sval(const Scalar& s) { return read_u64_be(s.raw.data()); }

/// Brute-force decryption: strip the mask with the raw secret, then walk g^m.
std::optional<u64> oracle_decrypt(const Ciphertext& c, u64 secret, u64 bound) {
  u64 mask = oracle_pow(val(c.a), secret, kP);
  u64 gm = oracle_mul(val(c.b), oracle_pow(mask, kP - 2, kP), kP);
  u64 acc = 1;
  for (u64 m = 0; m < bound; ++m) {
    if (acc == gm) return m;
    acc = oracle_mul(acc, kG, kP);
  }
  return std::nullopt;
}

/// Secret reconstructed by Lagrange interpolation over raw integers mod q.
u64 oracle_reconstruct(const std::vector<TrusteeShare>& shares) {
  u64 secret = 0;
  for (const auto& si : shares) {
    u64 num = 1, den = 1;
    for (const auto& sj : shares) {
      if (sj.index == si.index) continue;
      num = oracle_mul(num, sj.index, kQ);
      den = oracle_mul(den, (sj.index + kQ - si.index) % kQ, kQ);
    }
    u64 lambda = oracle_mul(num, oracle_pow(den, kQ - 2, kQ), kQ);
    secret = static_cast<u64>((static_cast<u128>(secret) + oracle_mul(lambda, sval(si.value), kQ)) % kQ);
  }
  return secret;
}

KeyMaterial test_keys(std::uint32_t n, std::uint32_t t, std::string_view seed = "s1") {
  return keygen(test_group(), n, t, as_bytes(seed));
}

}  // namespace

TEST_SUITE("group") {
  TEST_CASE("montgomery exponentiation matches the naive oracle") {
    auto g = test_group();
    Drbg rng("exp-oracle");
    auto fixed = g->fixed_base(g->generator());
    for (int i = 0; i < 300; ++i) {
      u64 base = oracle_pow(kG, rng.uniform(kQ), kP);
      Element b;
      Bytes enc;
      append_u64_be(enc, base);
      b = g->decode(enc);
      auto e = g->random_scalar(rng);
      CHECK(val(g->exp(b, e)) == oracle_pow(base, sval(e), kP));
      CHECK(val(fixed->exp(e)) == oracle_pow(kG, sval(e), kP));
    }
  }

  TEST_CASE("membership and decoding") {
    auto g = test_group();
    u64 non_residue = 2;
    while (oracle_pow(non_residue, kQ, kP) == 1) ++non_residue;
    Bytes nr;
    append_u64_be(nr, non_residue);
    CHECK_THROWS_AS(g->decode(nr), Error);
    Bytes zero(8, 0);
    CHECK_THROWS_AS(g->decode(zero), Error);
    CHECK_THROWS_AS(g->decode(Bytes(7, 1)), Error);
    CHECK(g->is_member(g->generator()));
    CHECK(g->element_from_hex(g->to_hex(g->generator())) == g->generator());
  }

  TEST_CASE("group descriptors round-trip") {
    CHECK(make_group("test64")->name() == "test64");
    auto tiny = make_group("schnorr:2039:1019:4");
    CHECK(tiny->name() == "schnorr:2039:1019:4");
    CHECK(make_group(tiny->name())->order_decimal() == "1019");
    CHECK_THROWS_AS(make_group("schnorr:2039:1019:2039"), Error);
    CHECK_THROWS_AS(make_group("schnorr:2041:1020:4"), Error);
    CHECK_THROWS_AS(make_group("nope"), Error);
  }

  TEST_CASE("scalar arithmetic") {
    auto g = test_group();
    auto a = g->scalar(kQ - 1), b = g->scalar(5);
    CHECK(sval(g->add(a, b)) == 4);
    CHECK(sval(g->sub(b, a)) == 6);
    CHECK(g->mul(g->inverse(b), b) == g->scalar(1));
    CHECK_THROWS_AS(g->inverse(g->scalar(0)), Error);
    Scalar bad;
    CHECK(g->is_canonical(g->scalar(0)));
    bad.raw[0] = 0xff;
    CHECK_FALSE(g->is_canonical(bad));
  }
}

TEST_SUITE("keygen") {
  TEST_CASE("t > n is a parameter error") {
    CHECK_THROWS_AS(test_keys(2, 3), Error);
    CHECK_THROWS_AS(test_keys(2, 0), Error);
    CHECK_THROWS_AS(keygen(test_group(), 3, 2, ByteView{}), Error);
  }

  TEST_CASE("single trustee share is the secret") {
    auto km = test_keys(1, 1);
    REQUIRE(km.shares.size() == 1);
    CHECK(val(km.public_keys.joint) == oracle_pow(kG, sval(km.shares[0].value), kP));
  }

  TEST_CASE("deterministic for a fixed seed") {
    CHECK(test_keys(3, 2, "s1") == test_keys(3, 2, "s1"));
    CHECK_FALSE(test_keys(3, 2, "s1") == test_keys(3, 2, "s2"));
  }

  TEST_CASE("any two of three shares reconstruct the joint key") {
    auto km = test_keys(3, 2);
    const auto& s = km.shares;
    for (auto pair : {std::vector{s[0], s[1]}, std::vector{s[1], s[2]}, std::vector{s[0], s[2]}}) {
      CHECK(oracle_pow(kG, oracle_reconstruct(pair), kP) == val(km.public_keys.joint));
    }
    for (const auto& share : s)
      CHECK(val(km.public_keys.trustee_key(share.index)) == oracle_pow(kG, sval(share.value), kP));
  }
}

TEST_SUITE("elgamal") {
  TEST_CASE("zero randomness and zero message give the identity pair") {
    auto km = test_keys(3, 2);
    ElGamal eg(test_group(), km.public_keys.joint, 1000);
    auto c = eg.encrypt(0, test_group()->scalar(0));
    CHECK(c.a == test_group()->identity());
    CHECK(c.b == test_group()->identity());
  }

  TEST_CASE("plaintext at or above the bound is an encoding error") {
    auto km = test_keys(1, 1);
    ElGamal eg(test_group(), km.public_keys.joint, 64);
    try {
      eg.encrypt(64, test_group()->scalar(1));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Encoding);
    }
  }

  TEST_CASE("round trip and homomorphism against the brute-force oracle") {
    auto g = test_group();
    auto km = test_keys(3, 2);
    u64 secret = oracle_reconstruct({km.shares[0], km.shares[1]});
    const u64 bound = 4096;
    ElGamal eg(g, km.public_keys.joint, bound);
    Drbg rng("roundtrip");
    for (int i = 0; i < 200; ++i) {
      u64 m = rng.uniform(bound);
      auto c = eg.encrypt(m, g->random_scalar(rng));
      CHECK(oracle_decrypt(c, secret, bound) == m);
      CHECK(val(c.a) != 1);
    }
    for (int i = 0; i < 50; ++i) {
      u64 m1 = rng.uniform(bound / 2), m2 = rng.uniform(bound / 2);
      auto c = eg.multiply(eg.encrypt(m1, g->random_scalar(rng)), eg.encrypt(m2, g->random_scalar(rng)));
      CHECK(oracle_decrypt(c, secret, bound) == m1 + m2);
    }
  }

  TEST_CASE("re-encryption preserves the plaintext") {
    auto g = test_group();
    auto km = test_keys(3, 2);
    u64 secret = oracle_reconstruct({km.shares[1], km.shares[2]});
    ElGamal eg(g, km.public_keys.joint, 4096);
    Drbg rng("reenc");
    auto c0 = eg.encrypt(17, g->random_scalar(rng));
    CHECK(eg.reencrypt(c0, g->scalar(0)) == c0);
    for (int i = 0; i < 200; ++i) {
      u64 m = rng.uniform(4096);
      auto c = eg.encrypt(m, g->random_scalar(rng));
      auto r1 = g->random_scalar(rng), r2 = g->random_scalar(rng);
      auto twice = eg.reencrypt(eg.reencrypt(c, r1), r2);
      CHECK(oracle_decrypt(eg.reencrypt(c, r1), secret, 4096) == m);
      CHECK(twice == eg.reencrypt(c, g->add(r1, r2)));
    }
  }

  TEST_CASE("trivial encryption and powers") {
    auto g = test_group();
    auto km = test_keys(1, 1);
    u64 secret = sval(km.shares[0].value);
    ElGamal eg(g, km.public_keys.joint, 5000);
    CHECK(oracle_decrypt(eg.trivial(9), secret, 5000) == 9);
    CHECK(oracle_decrypt(eg.power(eg.encrypt(7, g->scalar(99)), 64), secret, 5000) == 448);
  }
}

TEST_SUITE("threshold decryption") {
  TEST_CASE("single trustee fully decrypts") {
    auto g = test_group();
    auto km = test_keys(1, 1);
    ElGamal eg(g, km.public_keys.joint, 100);
    DecodeTable table(*g, 100);
    auto c = eg.encrypt(42, g->scalar(12345));
    auto share = partial_decrypt(*g, km.shares[0], c);
    CHECK(verify_decryption(*g, share, c, km.public_keys.trustee_key(1)));
    CHECK(combine(*g, std::span(&share, 1), c, table, 1) == 42);
  }

  TEST_CASE("every t-subset combines to the same plaintext") {
    auto g = test_group();
    auto km = test_keys(4, 3, "subsets");
    ElGamal eg(g, km.public_keys.joint, 1000);
    DecodeTable table(*g, 1000);
    Drbg rng("subsets");
    for (int trial = 0; trial < 20; ++trial) {
      u64 m = rng.uniform(1000);
      auto c = eg.encrypt(m, g->random_scalar(rng));
      std::vector<DecryptionShare> all;
      for (const auto& s : km.shares) all.push_back(partial_decrypt(*g, s, c));
      for (int skip = 0; skip < 4; ++skip) {
        std::vector<DecryptionShare> subset;
        for (int i = 0; i < 4; ++i)
          if (i != skip) subset.push_back(all[i]);
        CHECK(combine(*g, subset, c, table, 3) == m);
      }
    }
  }

  TEST_CASE("too few factors is unavailable; unknown exponent is a decode error") {
    auto g = test_group();
    auto km = test_keys(3, 2);
    ElGamal eg(g, km.public_keys.joint, 1000);
    DecodeTable table(*g, 10);
    auto c = eg.encrypt(500, g->scalar(77));
    std::vector<DecryptionShare> one{partial_decrypt(*g, km.shares[0], c)};
    try {
      combine(*g, one, c, table, 2);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unavailable);
    }
    // duplicated trustee does not count twice
    std::vector<DecryptionShare> dup{one[0], one[0]};
    CHECK_THROWS_AS(combine(*g, dup, c, table, 2), Error);
    one.push_back(partial_decrypt(*g, km.shares[2], c));
    try {
      combine(*g, one, c, table, 2);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Decode);
    }
  }

  TEST_CASE("malformed ciphertext is rejected") {
    auto g = test_group();
    auto km = test_keys(1, 1);
    Ciphertext bad{g->generator(), Element{}};
    CHECK_THROWS_AS(partial_decrypt(*g, km.shares[0], bad), Error);
  }

  TEST_CASE("proof mutations are rejected") {
    auto g = test_group();
    auto km = test_keys(3, 2);
    ElGamal eg(g, km.public_keys.joint, 1000);
    Drbg rng("mutations");
    auto c = eg.encrypt(3, g->random_scalar(rng));
    auto honest = partial_decrypt(*g, km.shares[1], c);
    const auto& key = km.public_keys.trustee_key(2);
    REQUIRE(verify_decryption(*g, honest, c, key));

    auto perturbed = honest;
    perturbed.proof.response = g->add(perturbed.proof.response, g->scalar(1));
    CHECK_FALSE(verify_decryption(*g, perturbed, c, key));

    auto swapped = honest;
    swapped.factor = g->exp(g->generator(), g->random_scalar(rng));
    CHECK_FALSE(verify_decryption(*g, swapped, c, key));

    // same transcript presented for a different ciphertext
    auto other = eg.reencrypt(c, g->random_scalar(rng));
    CHECK_FALSE(verify_decryption(*g, honest, other, key));
    CHECK_FALSE(verify_decryption(*g, honest, c, km.public_keys.trustee_key(1)));

    int rejected = 0;
    for (int i = 0; i < 1000; ++i) {
      auto m = honest;
      auto delta = g->add(g->random_scalar(rng), g->scalar(1));
      switch (i % 5) {
        case 0: m.proof.response = g->add(m.proof.response, delta); break;
        case 1: m.proof.challenge = g->add(m.proof.challenge, delta); break;
        case 2: m.proof.commit_g = g->mul(m.proof.commit_g, g->exp(g->generator(), delta)); break;
        case 3: m.proof.commit_a = g->mul(m.proof.commit_a, g->exp(g->generator(), delta)); break;
        case 4: m.factor = g->mul(m.factor, g->exp(g->generator(), delta)); break;
      }
      if (!verify_decryption(*g, m, c, key)) ++rejected;
    }
    CHECK(rejected == 1000);
  }
}

TEST_SUITE("p256") {
  TEST_CASE("encryption, re-encryption and threshold decryption on the curve") {
    auto g = make_p256_group();
    CHECK(g->element_size() == 33);
    auto km = keygen(g, 3, 2, as_bytes("curve"));
    ElGamal eg(g, km.public_keys.joint, 256);
    DecodeTable table(*g, 256);
    Drbg rng("curve");
    auto zero = eg.encrypt(0, g->scalar(0));
    CHECK(zero.a == g->identity());
    CHECK(g->element_from_hex(g->to_hex(g->generator())) == g->generator());
    for (int i = 0; i < 5; ++i) {
      u64 m = rng.uniform(256);
      auto c = eg.reencrypt(eg.encrypt(m, g->random_scalar(rng)), g->random_scalar(rng));
      std::vector<DecryptionShare> shares{partial_decrypt(*g, km.shares[2], c),
                                          partial_decrypt(*g, km.shares[0], c)};
      CHECK(verify_decryption(*g, shares[0], c, km.public_keys.trustee_key(3)));
      CHECK(combine(*g, shares, c, table, 2) == m);
    }
    auto bad = g->scalar(1);
    bad.raw.fill(0xff);
    CHECK_FALSE(g->is_canonical(bad));
  }
}

TEST_SUITE("primitives") {
  TEST_CASE("drbg is deterministic and forks independently") {
    Drbg a("seed"), b("seed"), c("other");
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    auto f1 = a.fork("x"), f2 = b.fork("x"), f3 = a.fork("y");
    CHECK(f1.next_u64() == f2.next_u64());
    CHECK(f1.next_u64() != f3.next_u64());
    for (int i = 0; i < 1000; ++i) CHECK(a.uniform(7) < 7);
    CHECK_THROWS_AS(a.uniform(0), Error);
  }

  TEST_CASE("signatures") {
    auto key = SigningKey::from_seed("peer-1");
    auto sig = key.sign("hello");
    CHECK(verify_signature(key.public_key(), "hello", sig));
    CHECK_FALSE(verify_signature(key.public_key(), "hellp", sig));
    CHECK(key_from_hex(key_to_hex(key.public_key())) == key.public_key());
    CHECK(signature_from_hex(signature_to_hex(sig)) == sig);
    CHECK_THROWS_AS(key_from_hex("abcd"), Error);
  }

  TEST_CASE("hex and base64") {
    Bytes data{0, 1, 2, 250, 255};
    CHECK(from_hex(to_hex(data)) == data);
    CHECK(from_base64(to_base64(data)) == data);
    CHECK_THROWS_AS(from_hex("abc"), Error);
    CHECK_THROWS_AS(from_hex("zz"), Error);
    CHECK_THROWS_AS(from_base64(""), Error);
    CHECK_THROWS_AS(from_base64("!!!"), Error);
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }
}
