#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "vvote/ballot/ballot_service.hpp"
#include "vvote/election/preferences.hpp"
#include "vvote/protocol/payloads.hpp"
#include "vvote/wbb/board.hpp"

namespace vvote::capture {

enum class SessionState { Idle, ClScanned, PrefsEntered, Submitted, ReceiptIssued, Quarantined };
enum class AccessMode { Visual, Keypad };

std::string_view to_string(SessionState s);
std::string_view to_string(AccessMode m);
AccessMode access_mode_from_string(std::string_view s);

/// What the voter takes home: ranks in candidate-list position order plus
/// the board's signed receipt for the VOTE_CAST item.
struct PreferenceReceipt {
  std::string serial;
  std::vector<protocol::RaceRanks> races;
  wbb::SignedReceipt receipt;

  std::string render_text() const;
};

nlohmann::json to_json(const PreferenceReceipt& r);
PreferenceReceipt preference_receipt_from_json(const nlohmann::json& j);

struct SessionView {
  std::string id;
  SessionState state = SessionState::Idle;
  std::string serial;
  AccessMode mode = AccessMode::Visual;
  std::vector<ballot::PrintedRace> printed;
  std::vector<election::PreferenceVector> preferences;  // empty once the session is finished
  std::vector<std::string> warnings;
  std::optional<wbb::SignedReceipt> receipt;
};

nlohmann::json to_json(const SessionView& s);

struct OperatorAlert {
  std::string session;
  std::string serial;
  std::string message;
};

/// Electronic ballot marker backend. Sessions are independent; each
/// session's transitions are serialized.
class CaptureService {
 public:
  CaptureService(const protocol::ElectionParams& params, wbb::BulletinBoard& board, const std::string& seed);

  /// Errors: Format/Signature for a bad QR, Validation for a manifest
  /// mismatch, NotFound for an uncommitted serial, Conflict if the serial
  /// has voted, been audited or quarantined.
  SessionView start_session(const std::string& qr, AccessMode mode = AccessMode::Visual);
  /// Formality problems become warnings; malformed marks are Validation errors.
  SessionView record_preferences(const std::string& id, const election::PreferenceVector& district,
                                 const election::PreferenceVector& region);
  /// Idempotent. Unavailable leaves the session retryable; Conflict
  /// quarantines it and raises an operator alert.
  PreferenceReceipt submit(const std::string& id);
  SessionView quarantine(const std::string& id, const std::string& reason);
  SessionView get(const std::string& id) const;
  /// Drops a finished session.
  void close(const std::string& id);

  std::vector<OperatorAlert> alerts() const;
  /// Every retained session field, for statelessness checks.
  nlohmann::json dump_state() const;
  std::size_t sessions() const;

  /// Test hook: called after a successful board append; returning true
  /// simulates a crash before the receipt is recorded.
  void set_crash_hook(std::function<bool()> hook) { crash_hook_ = std::move(hook); }
  /// Adversary hook: rewrites ranks on their way to the board while the
  /// printed receipt keeps the voter's ranks.
  using TamperHook = std::function<void(std::vector<protocol::RaceRanks>&)>;
  void set_tamper_hook(TamperHook hook) { tamper_hook_ = std::move(hook); }

 private:
  struct Session {
    std::mutex mu;
    std::string id;
    SessionState state = SessionState::Idle;
    std::string serial;
    AccessMode mode = AccessMode::Visual;
    std::vector<ballot::PrintedRace> printed;
    std::vector<election::PreferenceVector> preferences;
    std::vector<protocol::RaceRanks> ranks;  // printed-position ranks to submit
    std::vector<std::string> warnings;
    std::optional<wbb::SignedReceipt> receipt;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  SessionView view(const Session& s) const;
  PreferenceReceipt rebuild_receipt(const Session& s) const;
  void erase_preferences(Session& s);
  void alert(const Session& s, const std::string& message);

  protocol::ElectionParams params_;
  wbb::BulletinBoard& board_;
  std::string digest_;
  std::string seed_;
  std::function<bool()> crash_hook_;
  TamperHook tamper_hook_;

  mutable std::shared_mutex mu_;
  std::uint64_t counter_ = 0;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  mutable std::mutex alerts_mu_;
  std::vector<OperatorAlert> alerts_;
};

}  // namespace vvote::capture
