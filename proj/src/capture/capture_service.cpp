#include "vvote/capture/capture_service.hpp"

#include <sstream>

#include "vvote/error.hpp"

namespace vvote::capture {

using nlohmann::json;

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Idle: return "IDLE";
    case SessionState::ClScanned: return "CL_SCANNED";
    case SessionState::PrefsEntered: return "PREFS_ENTERED";
    case SessionState::Submitted: return "SUBMITTED";
    case SessionState::ReceiptIssued: return "RECEIPT_ISSUED";
    case SessionState::Quarantined: return "QUARANTINED";
  }
  return "?";
}

std::string_view to_string(AccessMode m) { return m == AccessMode::Visual ? "visual" : "keypad"; }

AccessMode access_mode_from_string(std::string_view s) {
  if (s == "visual") return AccessMode::Visual;
  if (s == "keypad") return AccessMode::Keypad;
  fail(ErrorCode::Validation, "unknown access mode '" + std::string(s) + "'");
}

std::string PreferenceReceipt::render_text() const {
  std::ostringstream out;
  out << "Preferences receipt " << serial << "\n";
  for (const auto& r : races) {
    out << r.race << "\n";
    for (std::size_t i = 0; i < r.ranks.size(); ++i)
      out << "  " << (i + 1) << ". " << (r.ranks[i] ? std::to_string(r.ranks[i]) : "") << "\n";
  }
  out << "seq " << receipt.seq << " item " << crypto::hex(receipt.item_hash) << "\n";
  for (const auto& s : receipt.signatures) out << "sig " << s.peer << " " << crypto::signature_to_hex(s.signature) << "\n";
  return out.str();
}

json to_json(const PreferenceReceipt& r) {
  json races = json::array();
  for (const auto& rr : r.races) races.push_back({{"race", rr.race}, {"ranks", rr.ranks}});
  return {{"serial", r.serial}, {"races", races}, {"receipt", wbb::to_json(r.receipt)}};
}

PreferenceReceipt preference_receipt_from_json(const json& j) {
  try {
    PreferenceReceipt r;
    r.serial = j.at("serial").get<std::string>();
    for (const auto& rr : j.at("races"))
      r.races.push_back({rr.at("race").get<std::string>(), rr.at("ranks").get<std::vector<std::uint32_t>>()});
    r.receipt = wbb::receipt_from_json(j.at("receipt"));
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("preference receipt: ") + e.what());
  }
}

json to_json(const SessionView& s) {
  json printed = json::array();
  for (const auto& p : s.printed) printed.push_back({{"race", p.race}, {"printed", p.candidate_ids}});
  json prefs = json::array();
  for (const auto& p : s.preferences) prefs.push_back(election::to_json(p));
  json j = {{"id", s.id},         {"state", std::string(to_string(s.state))},
            {"serial", s.serial}, {"mode", std::string(to_string(s.mode))},
            {"printed", printed}, {"preferences", prefs},
            {"warnings", s.warnings}};
  if (s.receipt) j["receipt"] = wbb::to_json(*s.receipt);
  return j;
}

CaptureService::CaptureService(const protocol::ElectionParams& params, wbb::BulletinBoard& board,
                               const std::string& seed)
    : params_(params), board_(board), digest_(params.manifest.digest()), seed_(seed) {
  auto first = board_.item(1);
  require(first && first->kind == wbb::ItemKind::Manifest, ErrorCode::State, "board has no manifest item");
  require(protocol::decode_params(first->payload).manifest.digest() == digest_, ErrorCode::State,
          "manifest differs from the one committed on the board");
}

std::shared_ptr<CaptureService::Session> CaptureService::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  require(it != sessions_.end(), ErrorCode::NotFound, "unknown session " + id);
  return it->second;
}

SessionView CaptureService::view(const Session& s) const {
  return {s.id, s.state, s.serial, s.mode, s.printed, s.preferences, s.warnings, s.receipt};
}

void CaptureService::erase_preferences(Session& s) {
  s.preferences.clear();
  s.preferences.shrink_to_fit();
  s.ranks.clear();
  s.ranks.shrink_to_fit();
  s.warnings.clear();
}

void CaptureService::alert(const Session& s, const std::string& message) {
  std::lock_guard lock(alerts_mu_);
  alerts_.push_back({s.id, s.serial, message});
}

SessionView CaptureService::start_session(const std::string& qr, AccessMode mode) {
  auto payload = ballot::qr_decode(qr, params_.ballot_key);
  require(payload.manifest_digest == digest_, ErrorCode::Validation, "ballot printed for a different manifest");
  require(payload.races.size() == 2, ErrorCode::Validation, "ballot must carry a district and a region race");
  for (const auto& r : payload.races) {
    const auto* race = params_.manifest.find_race(r.race);
    require(race && race->size() == r.candidate_ids.size(), ErrorCode::Validation, "ballot race " + r.race + " unknown");
    for (const auto& id : r.candidate_ids) race->candidate_index(id);
  }
  require(params_.manifest.race(payload.races[0].race).kind == election::RaceKind::District &&
              params_.manifest.race(payload.races[1].race).kind == election::RaceKind::Region,
          ErrorCode::Validation, "ballot races out of order");
  auto state = board_.serial_state(payload.serial);
  require(state && state->committed, ErrorCode::NotFound, "serial " + payload.serial + " is not committed");
  require(!state->voted, ErrorCode::Conflict, "serial " + payload.serial + " has already voted");
  require(!state->audited, ErrorCode::Conflict, "serial " + payload.serial + " was audited and cannot be used to vote");
  require(!state->quarantined, ErrorCode::Conflict, "serial " + payload.serial + " is quarantined");

  auto s = std::make_shared<Session>();
  s->serial = payload.serial;
  s->printed = payload.races;
  s->mode = mode;
  s->state = SessionState::ClScanned;
  std::unique_lock lock(mu_);
  crypto::Hasher h("vvote/session-id");
  h.field(seed_).field(counter_++);
  s->id = to_hex(ByteView(h.finish()).first(12));
  sessions_.emplace(s->id, s);
  return view(*s);
}

SessionView CaptureService::record_preferences(const std::string& id, const election::PreferenceVector& district,
                                               const election::PreferenceVector& region) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  require(s->state == SessionState::ClScanned || s->state == SessionState::PrefsEntered, ErrorCode::State,
          "session " + id + " is " + std::string(to_string(s->state)));

  std::vector<std::string> warnings;
  std::vector<protocol::RaceRanks> ranks;
  const election::PreferenceVector* marks[] = {&district, &region};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& v = *marks[k];
    const auto& printed = s->printed[k];
    const auto& race = params_.manifest.race(printed.race);
    require(v.race == race.id, ErrorCode::Validation, "preferences for " + v.race + " on a ballot for " + race.id);
    require((race.kind == election::RaceKind::District) == (v.mode == election::VoteMode::District),
            ErrorCode::Validation, "wrong vote mode for " + race.id);
    std::vector<std::uint32_t> printed_ranks(race.size(), 0);
    if (v.mode == election::VoteMode::Atl) {
      for (auto g : v.atl_groups)
        require(g < race.groups.size(), ErrorCode::Validation, "race " + race.id + " has no group " + std::to_string(g));
      if (v.atl_groups.size() == 1) {
        auto canonical = election::atl_expand(v.atl_groups[0], race);
        for (std::size_t i = 0; i < race.size(); ++i)
          printed_ranks[i] = canonical[race.candidate_index(printed.candidate_ids[i])];
      }
    } else {
      require(v.ranks.size() == race.size(), ErrorCode::Validation,
              "expected " + std::to_string(race.size()) + " positions for " + race.id);
      for (auto r : v.ranks)
        require(r <= race.size(), ErrorCode::Validation,
                "rank " + std::to_string(r) + " exceeds the " + std::to_string(race.size()) + " candidates of " + race.id);
      printed_ranks = v.ranks;
    }
    auto verdict = election::check_formality(v, race, params_.manifest.formality);
    if (!verdict.formal) warnings.push_back(race.id + ": " + std::string(election::to_string(verdict.reason)));
    ranks.push_back({race.id, std::move(printed_ranks)});
  }
  s->preferences = {district, region};
  s->ranks = std::move(ranks);
  s->warnings = std::move(warnings);
  s->state = SessionState::PrefsEntered;
  return view(*s);
}

PreferenceReceipt CaptureService::rebuild_receipt(const Session& s) const {
  auto item = board_.item(s.receipt->seq);
  require(item && item->hash == s.receipt->item_hash, ErrorCode::State, "receipt item missing from the board");
  auto vote = protocol::decode_vote(params_.manifest.packing, item->payload);
  return {s.serial, vote.races, *s.receipt};
}

PreferenceReceipt CaptureService::submit(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state == SessionState::ReceiptIssued) return rebuild_receipt(*s);
  require(s->state == SessionState::PrefsEntered || s->state == SessionState::Submitted, ErrorCode::State,
          "session " + id + " is " + std::string(to_string(s->state)));

  s->state = SessionState::Submitted;
  protocol::VotePayload payload{s->serial, digest_, s->id, s->ranks};
  if (tamper_hook_) tamper_hook_(payload.races);
  wbb::SignedReceipt receipt;
  try {
    receipt = board_.append(wbb::ItemKind::VoteCast, s->serial, protocol::encode_vote(params_.manifest.packing, payload));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Conflict) {
      s->state = SessionState::Quarantined;
      erase_preferences(*s);
      alert(*s, std::string("submission refused: ") + e.what());
    } else if (e.code() == ErrorCode::Unavailable) {
      s->state = SessionState::PrefsEntered;
    }
    throw;
  }
  if (crash_hook_ && crash_hook_()) fail(ErrorCode::Unavailable, "capture service crashed before issuing the receipt");

  PreferenceReceipt pr{s->serial, s->ranks, receipt};
  s->receipt = std::move(receipt);
  s->state = SessionState::ReceiptIssued;
  erase_preferences(*s);
  return pr;
}

SessionView CaptureService::quarantine(const std::string& id, const std::string& reason) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state == SessionState::Quarantined) return view(*s);
  require(s->state != SessionState::Idle, ErrorCode::State, "session " + id + " has no ballot");
  try {
    board_.append(wbb::ItemKind::Quarantine, s->serial, protocol::encode_quarantine({s->serial, s->id, reason}));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Conflict) throw;
    alert(*s, std::string("quarantine refused by the board: ") + e.what());
  }
  s->state = SessionState::Quarantined;
  erase_preferences(*s);
  return view(*s);
}

SessionView CaptureService::get(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return view(*s);
}

void CaptureService::close(const std::string& id) {
  std::unique_lock lock(mu_);
  sessions_.erase(id);
}

std::vector<OperatorAlert> CaptureService::alerts() const {
  std::lock_guard lock(alerts_mu_);
  return alerts_;
}

json CaptureService::dump_state() const {
  std::shared_lock lock(mu_);
  json out = json::array();
  for (const auto& [id, s] : sessions_) {
    std::lock_guard slock(s->mu);
    auto j = to_json(view(*s));
    json ranks = json::array();
    for (const auto& r : s->ranks) ranks.push_back({{"race", r.race}, {"ranks", r.ranks}});
    j["pending_ranks"] = ranks;
    out.push_back(j);
  }
  return out;
}

std::size_t CaptureService::sessions() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

}  // namespace vvote::capture
