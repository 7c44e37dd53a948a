#include "vvote/wbb/serial_state.hpp"

namespace vvote::wbb {

std::optional<std::string> SerialStateMachine::check(ItemKind kind, const std::string& serial) const {
  if (kind == ItemKind::Manifest) {
    if (!serial.empty()) return "manifest items carry no serial";
    if (manifest_seen_) return "manifest already published";
    return std::nullopt;
  }
  if (serial.empty()) return "item requires a serial";
  auto it = states_.find(serial);
  const SerialState s = it == states_.end() ? SerialState{} : it->second;
  switch (kind) {
    case ItemKind::BallotCommit:
      if (s.committed) return "serial " + serial + " already committed";
      break;
    case ItemKind::VoteCast:
      if (!s.committed) return "serial " + serial + " has no ballot commitment";
      if (s.voted) return "serial " + serial + " has already voted";
      if (s.audited) return "serial " + serial + " was audited and cannot then be used to vote";
      if (s.quarantined) return "serial " + serial + " is quarantined";
      break;
    case ItemKind::BallotAudit:
      if (!s.committed) return "serial " + serial + " has no ballot commitment";
      if (s.voted) return "serial " + serial + " has voted; auditing would expose the vote";
      if (s.audited) return "serial " + serial + " already audited";
      if (s.quarantined) return "serial " + serial + " is quarantined";
      break;
    case ItemKind::Quarantine:
      if (!s.committed) return "serial " + serial + " has no ballot commitment";
      if (s.audited) return "serial " + serial + " was audited";
      if (s.quarantined) return "serial " + serial + " already quarantined";
      break;
    case ItemKind::Manifest:
      break;
  }
  return std::nullopt;
}

void SerialStateMachine::apply(ItemKind kind, const std::string& serial) {
  if (kind == ItemKind::Manifest) {
    manifest_seen_ = true;
    return;
  }
  auto& s = states_[serial];
  switch (kind) {
    case ItemKind::BallotCommit: s.committed = true; break;
    case ItemKind::VoteCast: s.voted = true; break;
    case ItemKind::BallotAudit: s.audited = true; break;
    case ItemKind::Quarantine: s.quarantined = true; break;
    case ItemKind::Manifest: break;
  }
}

std::optional<SerialState> SerialStateMachine::state(const std::string& serial) const {
  auto it = states_.find(serial);
  if (it == states_.end()) return std::nullopt;
  return it->second;
}

}  // namespace vvote::wbb
