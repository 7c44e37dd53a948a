#include "vvote/wbb/checkpoint.hpp"

#include "vvote/error.hpp"
#include "vvote/wbb/merkle.hpp"

namespace vvote::wbb {

using nlohmann::json;

std::string Checkpoint::signing_bytes() const {
  return "vvote/wbb-checkpoint\n" + std::to_string(period) + "\n" + std::to_string(first_seq) + "\n" +
         std::to_string(count) + "\n" + crypto::hex(root) + "\n" + crypto::hex(prev);
}

Digest Checkpoint::hash() const { return crypto::sha256(signing_bytes()); }

bool verify_inclusion(const WbbItem& item, const InclusionProof& proof, const Checkpoint& checkpoint) {
  if (proof.period != checkpoint.period || !checkpoint.covers(item.seq)) return false;
  if (item.seq - checkpoint.first_seq != proof.index) return false;
  return verify_path(item.hash, proof.index, checkpoint.count, proof.path, checkpoint.root);
}

json to_json(const Checkpoint& c) {
  json sigs = json::array();
  for (const auto& s : c.signatures) sigs.push_back(to_json(s));
  return {{"period", c.period}, {"first_seq", c.first_seq}, {"count", c.count},
          {"root", crypto::hex(c.root)}, {"prev", crypto::hex(c.prev)}, {"signatures", sigs}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    Checkpoint c;
    c.period = j.at("period").get<std::uint64_t>();
    c.first_seq = j.at("first_seq").get<std::uint64_t>();
    c.count = j.at("count").get<std::uint64_t>();
    c.root = crypto::digest_from_hex(j.at("root").get<std::string>());
    c.prev = crypto::digest_from_hex(j.at("prev").get<std::string>());
    for (const auto& s : j.at("signatures")) c.signatures.push_back(peer_signature_from_json(s));
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("checkpoint: ") + e.what());
  }
}

json to_json(const InclusionProof& p) {
  json path = json::array();
  for (const auto& d : p.path) path.push_back(crypto::hex(d));
  return {{"period", p.period}, {"index", p.index}, {"path", path}};
}

InclusionProof inclusion_from_json(const json& j) {
  try {
    InclusionProof p;
    p.period = j.at("period").get<std::uint64_t>();
    p.index = j.at("index").get<std::uint64_t>();
    for (const auto& d : j.at("path")) p.path.push_back(crypto::digest_from_hex(d.get<std::string>()));
    return p;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("inclusion proof: ") + e.what());
  }
}

json to_json(const CheckpointFile& f) {
  json keys = json::array();
  for (const auto& k : f.peers.keys) keys.push_back(crypto::key_to_hex(k));
  json cps = json::array();
  for (const auto& c : f.checkpoints) cps.push_back(to_json(c));
  return {{"threshold", f.peers.threshold}, {"peers", keys}, {"checkpoints", cps}};
}

CheckpointFile checkpoint_file_from_json(const json& j) {
  try {
    CheckpointFile f;
    f.peers.threshold = j.at("threshold").get<std::uint32_t>();
    for (const auto& k : j.at("peers")) f.peers.keys.push_back(crypto::key_from_hex(k.get<std::string>()));
    for (const auto& c : j.at("checkpoints")) f.checkpoints.push_back(checkpoint_from_json(c));
    return f;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("checkpoint file: ") + e.what());
  }
}

}  // namespace vvote::wbb
