#include "vvote/wbb/item.hpp"

#include <set>

#include "vvote/error.hpp"

namespace vvote::wbb {

using nlohmann::json;

std::string_view to_string(ItemKind kind) {
  switch (kind) {
    case ItemKind::Manifest: return "MANIFEST";
    case ItemKind::BallotCommit: return "BALLOT_COMMIT";
    case ItemKind::VoteCast: return "VOTE_CAST";
    case ItemKind::BallotAudit: return "BALLOT_AUDIT";
    case ItemKind::Quarantine: return "QUARANTINE";
  }
  return "?";
}

ItemKind item_kind_from_string(std::string_view s) {
  for (auto k : {ItemKind::Manifest, ItemKind::BallotCommit, ItemKind::VoteCast, ItemKind::BallotAudit,
                 ItemKind::Quarantine})
    if (to_string(k) == s) return k;
  fail(ErrorCode::Format, "unknown item kind '" + std::string(s) + "'");
}

Digest WbbItem::compute_hash() const {
  crypto::Hasher h("vvote/wbb-item");
  h.field(seq).field(to_string(kind)).field(serial).field(timestamp);
  h.field(ByteView(payload_hash)).field(ByteView(prev_hash));
  return h.finish();
}

std::string to_ndjson_line(const WbbItem& item) {
  nlohmann::ordered_json j;
  j["seq"] = item.seq;
  j["kind"] = to_string(item.kind);
  j["serial"] = item.serial;
  j["timestamp"] = item.timestamp;
  j["payload_hash"] = crypto::hex(item.payload_hash);
  j["prev_hash"] = crypto::hex(item.prev_hash);
  j["hash"] = crypto::hex(item.hash);
  j["payload"] = item.payload;
  return j.dump();
}

WbbItem item_from_json(const json& j) {
  try {
    WbbItem item;
    item.seq = j.at("seq").get<std::uint64_t>();
    item.kind = item_kind_from_string(j.at("kind").get<std::string>());
    item.serial = j.at("serial").get<std::string>();
    item.timestamp = j.at("timestamp").get<std::uint64_t>();
    item.payload = j.at("payload").get<std::string>();
    item.payload_hash = crypto::digest_from_hex(j.at("payload_hash").get<std::string>());
    item.prev_hash = crypto::digest_from_hex(j.at("prev_hash").get<std::string>());
    item.hash = crypto::digest_from_hex(j.at("hash").get<std::string>());
    return item;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("log item: ") + e.what());
  }
}

std::string SignedReceipt::receipt_bytes() const {
  std::string out = "vvote/wbb-receipt\n";
  out += serial + "\n" + std::string(to_string(kind)) + "\n" + std::to_string(seq) + "\n";
  out += crypto::hex(payload_hash) + "\n" + crypto::hex(item_hash);
  return out;
}

std::size_t count_valid_signatures(std::string_view message, const std::vector<PeerSignature>& sigs,
                                   const PeerDirectory& peers) {
  std::set<std::uint32_t> good;
  for (const auto& s : sigs) {
    if (s.peer >= peers.keys.size() || good.contains(s.peer)) continue;
    if (crypto::verify_signature(peers.keys[s.peer], message, s.signature)) good.insert(s.peer);
  }
  return good.size();
}

bool verify_receipt(const SignedReceipt& receipt, const PeerDirectory& peers) {
  return peers.threshold > 0 &&
         count_valid_signatures(receipt.receipt_bytes(), receipt.signatures, peers) >= peers.threshold;
}

json to_json(const PeerSignature& s) {
  return {{"peer", s.peer}, {"signature", crypto::signature_to_hex(s.signature)}};
}

PeerSignature peer_signature_from_json(const json& j) {
  return {j.at("peer").get<std::uint32_t>(), crypto::signature_from_hex(j.at("signature").get<std::string>())};
}

json to_json(const SignedReceipt& r) {
  json sigs = json::array();
  for (const auto& s : r.signatures) sigs.push_back(to_json(s));
  return {{"serial", r.serial},
          {"kind", std::string(to_string(r.kind))},
          {"seq", r.seq},
          {"payload_hash", crypto::hex(r.payload_hash)},
          {"item_hash", crypto::hex(r.item_hash)},
          {"signatures", sigs}};
}

SignedReceipt receipt_from_json(const json& j) {
  try {
    SignedReceipt r;
    r.serial = j.at("serial").get<std::string>();
    r.kind = item_kind_from_string(j.at("kind").get<std::string>());
    r.seq = j.at("seq").get<std::uint64_t>();
    r.payload_hash = crypto::digest_from_hex(j.at("payload_hash").get<std::string>());
    r.item_hash = crypto::digest_from_hex(j.at("item_hash").get<std::string>());
    for (const auto& s : j.at("signatures")) r.signatures.push_back(peer_signature_from_json(s));
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("receipt: ") + e.what());
  }
}

}  // namespace vvote::wbb
