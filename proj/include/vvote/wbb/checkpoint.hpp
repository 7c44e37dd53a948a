#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vvote/wbb/item.hpp"

namespace vvote::wbb {

/// Signed Merkle commitment to the items [first_seq, first_seq + count).
struct Checkpoint {
  std::uint64_t period = 0;
  std::uint64_t first_seq = 1;
  std::uint64_t count = 0;
  Digest root{};
  Digest prev{};  // hash() of the previous checkpoint, zero for the first
  std::vector<PeerSignature> signatures;

  std::string signing_bytes() const;
  Digest hash() const;
  bool covers(std::uint64_t seq) const { return seq >= first_seq && seq < first_seq + count; }
};

struct InclusionProof {
  std::uint64_t period = 0;
  std::uint64_t index = 0;  // leaf position within the checkpoint
  std::vector<Digest> path;
};

bool verify_inclusion(const WbbItem& item, const InclusionProof& proof, const Checkpoint& checkpoint);

nlohmann::json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
nlohmann::json to_json(const InclusionProof& p);
InclusionProof inclusion_from_json(const nlohmann::json& j);

/// The published checkpoint file: peer directory plus the checkpoint chain.
struct CheckpointFile {
  PeerDirectory peers;
  std::vector<Checkpoint> checkpoints;
};

nlohmann::json to_json(const CheckpointFile& f);
CheckpointFile checkpoint_file_from_json(const nlohmann::json& j);

}  // namespace vvote::wbb
