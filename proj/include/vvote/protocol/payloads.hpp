#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vvote/crypto/elgamal.hpp"
#include "vvote/crypto/hash.hpp"
#include "vvote/crypto/sign.hpp"
#include "vvote/election/manifest.hpp"

// Bulletin-board payload schemas. Every encoder emits canonical JSON
// (sorted keys, compact) so that equal payloads are byte-identical.
namespace vvote::protocol {

/// Everything a verifier needs besides the log itself; posted once as the
/// MANIFEST item.
struct ElectionParams {
  election::ElectionManifest manifest;
  std::string group_name;
  crypto::GroupPtr group;
  crypto::PublicKeySet keys;
  crypto::PublicSigningKey ballot_key{};
  std::string wbb_endpoint;
  std::uint32_t mix_stages = 2;

  std::uint64_t table_bound() const { return manifest.packing.table_bound(); }
  crypto::ElGamal elgamal() const;
};

std::string encode_params(const ElectionParams& p);
ElectionParams decode_params(std::string_view payload);

struct RaceOnion {
  std::string race;
  std::vector<crypto::Ciphertext> onion;  // position i encrypts the canonical index printed there
};

struct CommitPayload {
  std::string serial;
  std::string manifest_digest;
  std::vector<RaceOnion> races;
};

crypto::Digest onion_hash(const crypto::Group& g, const std::vector<crypto::Ciphertext>& onion);
std::string encode_commit(const crypto::Group& g, const CommitPayload& p);
CommitPayload decode_commit(const crypto::Group& g, std::string_view payload);

struct RaceRanks {
  std::string race;
  std::vector<std::uint32_t> ranks;  // per printed position, 0 = blank
  friend bool operator==(const RaceRanks&, const RaceRanks&) = default;
};

/// Ranks travel packed with the manifest's packing rules.
struct VotePayload {
  std::string serial;
  std::string manifest_digest;
  std::string session;
  std::vector<RaceRanks> races;
};

std::string encode_vote(const election::PackingRules& packing, const VotePayload& p);
VotePayload decode_vote(const election::PackingRules& packing, std::string_view payload);

struct RaceOpening {
  std::string race;
  std::vector<std::uint32_t> permutation;  // printed position -> canonical index
  std::vector<crypto::Scalar> randomness;
  std::vector<std::string> printed;        // candidate ids as printed
};

struct AuditPayload {
  std::string serial;
  std::string manifest_digest;
  std::vector<RaceOpening> races;
};

std::string encode_audit(const crypto::Group& g, const AuditPayload& p);
AuditPayload decode_audit(const crypto::Group& g, std::string_view payload);

struct QuarantinePayload {
  std::string serial;
  std::string session;
  std::string reason;
};

std::string encode_quarantine(const QuarantinePayload& p);
QuarantinePayload decode_quarantine(std::string_view payload);

nlohmann::json ciphertext_to_json(const crypto::Group& g, const crypto::Ciphertext& c);
crypto::Ciphertext ciphertext_from_json(const crypto::Group& g, const nlohmann::json& j);
nlohmann::json public_keys_to_json(const crypto::Group& g, const crypto::PublicKeySet& k);
crypto::PublicKeySet public_keys_from_json(const crypto::Group& g, const nlohmann::json& j);

/// Parses JSON, mapping any parse or schema failure to Error(Format).
nlohmann::json parse_json(std::string_view text, std::string_view what);

}  // namespace vvote::protocol
