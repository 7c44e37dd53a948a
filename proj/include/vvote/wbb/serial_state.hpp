#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "vvote/wbb/item.hpp"

namespace vvote::wbb {

struct SerialState {
  bool committed = false;
  bool voted = false;
  bool audited = false;
  bool quarantined = false;
};

/// Per-serial rules for the log:
///  BALLOT_COMMIT  only for a fresh serial;
///  VOTE_CAST      once, after commit, never after audit or quarantine;
///  BALLOT_AUDIT   once, after commit, never after a vote or quarantine;
///  QUARANTINE     once, after commit, not on an audited serial;
///  MANIFEST       once, without serial.
class SerialStateMachine {
 public:
  /// Reason the item would be rejected, or nullopt if it is admissible.
  std::optional<std::string> check(ItemKind kind, const std::string& serial) const;
  void apply(ItemKind kind, const std::string& serial);
  std::optional<SerialState> state(const std::string& serial) const;
  bool has_manifest() const { return manifest_seen_; }

 private:
  std::unordered_map<std::string, SerialState> states_;
  bool manifest_seen_ = false;
};

}  // namespace vvote::wbb
