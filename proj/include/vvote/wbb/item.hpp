#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vvote/crypto/hash.hpp"
#include "vvote/crypto/sign.hpp"

namespace vvote::wbb {

using crypto::Digest;

enum class ItemKind { Manifest, BallotCommit, VoteCast, BallotAudit, Quarantine };

std::string_view to_string(ItemKind kind);
ItemKind item_kind_from_string(std::string_view s);

/// One entry of the append-only log. `prev_hash` links to the previous
/// item's `hash`; the first item links to the all-zero digest.
struct WbbItem {
  std::uint64_t seq = 0;  // 1-based, dense
  ItemKind kind = ItemKind::Manifest;
  std::string serial;
  std::uint64_t timestamp = 0;
  std::string payload;
  Digest payload_hash{};
  Digest prev_hash{};
  Digest hash{};

  Digest compute_hash() const;
};

using ItemPtr = std::shared_ptr<const WbbItem>;

/// Canonical single-line JSON with a fixed field order.
std::string to_ndjson_line(const WbbItem& item);
WbbItem item_from_json(const nlohmann::json& j);

struct PeerSignature {
  std::uint32_t peer = 0;
  crypto::Signature signature{};
};

/// Public keys of the board's peers and the countersignature threshold.
struct PeerDirectory {
  std::vector<crypto::PublicSigningKey> keys;
  std::uint32_t threshold = 0;
};

/// Proof that an item was accepted: at least `threshold` peer signatures
/// over receipt_bytes().
struct SignedReceipt {
  std::string serial;
  ItemKind kind = ItemKind::VoteCast;
  std::uint64_t seq = 0;
  Digest payload_hash{};
  Digest item_hash{};
  std::vector<PeerSignature> signatures;

  std::string receipt_bytes() const;
};

bool verify_receipt(const SignedReceipt& receipt, const PeerDirectory& peers);

/// Number of distinct directory peers with a valid signature over `message`.
std::size_t count_valid_signatures(std::string_view message, const std::vector<PeerSignature>& sigs,
                                   const PeerDirectory& peers);

nlohmann::json to_json(const SignedReceipt& r);
SignedReceipt receipt_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PeerSignature& s);
PeerSignature peer_signature_from_json(const nlohmann::json& j);

}  // namespace vvote::wbb
