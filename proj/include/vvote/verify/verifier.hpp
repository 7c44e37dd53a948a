#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vvote/capture/capture_service.hpp"
#include "vvote/crypto/drbg.hpp"
#include "vvote/protocol/payloads.hpp"
#include "vvote/tally/decrypt.hpp"
#include "vvote/tally/export.hpp"
#include "vvote/tally/mix_input.hpp"
#include "vvote/tally/mixnet.hpp"
#include "vvote/wbb/board.hpp"

namespace vvote::verify {

/// Export file name per house.
inline constexpr const char* kDistrictHouse = "district";
inline constexpr const char* kRegionHouse = "region";
std::string house_of(const election::Race& race);

/// Everything an election publishes. Nothing here is secret.
struct PublishedArtifacts {
  std::vector<wbb::ItemPtr> log;
  wbb::CheckpointFile checkpoints;
  std::map<std::string, tally::MixTranscript> transcripts;    // by race
  std::map<std::string, tally::DecryptionRecord> decryptions;  // by race
  std::map<std::string, std::string> exports;                  // by house, CSV text
};

/// Layout of a published directory:
///   wbb_log.ndjson, checkpoints.json, mix/<race>.json, decrypt/<race>.json,
///   export_<house>.csv
void save_artifacts(const PublishedArtifacts& a, const std::filesystem::path& dir);
/// Reads whatever is present; the group for the crypto files comes from the
/// log's MANIFEST item. Format on unparseable files.
PublishedArtifacts load_artifacts(const std::filesystem::path& dir);

std::vector<wbb::ItemPtr> load_log(const std::filesystem::path& file);
std::string log_to_ndjson(const std::vector<wbb::ItemPtr>& log);

/// Election parameters from the first log item. Format if it is not a MANIFEST.
protocol::ElectionParams params_from_log(const std::vector<wbb::ItemPtr>& log);

struct CheckOutcome {
  std::string name;
  bool passed = true;
  std::uint64_t checked = 0;
  std::vector<std::string> problems;  // capped; `failures` keeps the full count
  std::uint64_t failures = 0;
  std::optional<std::string> first_failure;

  void fail(std::string problem);
};

struct VerificationReport {
  std::vector<CheckOutcome> checks;

  bool passed() const;
  const CheckOutcome& check(const std::string& name) const;
  CheckOutcome& check(const std::string& name);
  std::string render_text() const;
};

nlohmann::json to_json(const VerificationReport& r);

enum class ReceiptStatus { Ok, Missing, Mismatch, BadSignature, NotIncluded };
std::string_view to_string(ReceiptStatus s);

struct ReceiptCheck {
  ReceiptStatus status = ReceiptStatus::Ok;
  std::string detail;
  bool ok() const { return status == ReceiptStatus::Ok; }
};

/// A voter's check: the serial has a VOTE_CAST whose ranks equal the
/// receipt's, the receipt signatures verify against the peer directory,
/// and the item sits under a signed checkpoint.
ReceiptCheck check_receipt(const capture::PreferenceReceipt& pr, const std::vector<wbb::ItemPtr>& log,
                           const wbb::CheckpointFile& checkpoints);

/// Runs the checks race by race so that a caller can stream mix and
/// decryption artifacts through it without holding them all. Checks:
/// chain, receipts, audits, mix, decryption, export.
class ElectionVerifier {
 public:
  ElectionVerifier(std::vector<wbb::ItemPtr> log, wbb::CheckpointFile checkpoints);

  void check_receipts(const std::vector<capture::PreferenceReceipt>& receipts);
  /// Mix and decryption checks for one race; decrypted votes are kept for
  /// the export cross-check.
  void check_race(const std::string& race, const tally::MixTranscript* transcript,
                  const tally::DecryptionRecord* decryption);
  void check_exports(const std::map<std::string, std::string>& exports);
  /// Fails any race never passed to check_race.
  VerificationReport finish();

  const protocol::ElectionParams* params() const { return params_.get(); }
  const tally::MixInputs& inputs() const { return inputs_; }
  const crypto::Digest& final_checkpoint() const { return final_checkpoint_; }

 private:
  std::vector<wbb::ItemPtr> log_;
  wbb::CheckpointFile checkpoints_;
  std::unique_ptr<protocol::ElectionParams> params_;
  std::unique_ptr<crypto::DecodeTable> table_;
  tally::MixInputs inputs_;
  crypto::Digest final_checkpoint_{};
  std::map<std::string, bool> races_done_;
  std::map<std::string, std::vector<tally::VoteRecord>> decrypted_;  // by house
  VerificationReport report_;
};

VerificationReport verify_election(const PublishedArtifacts& a,
                                   const std::vector<capture::PreferenceReceipt>& receipts = {});

/// Checking rate r and k altered votes; with k = 0 and a margin, k becomes
/// the smallest number of alterations that could flip that margin.
struct ConfidenceQuery {
  double rate = 0;
  std::uint64_t changes = 0;
  std::optional<std::uint64_t> margin;
};

/// 1 - (1 - r)^k.
double detection_confidence(const ConfidenceQuery& q);
/// Fraction of `trials` in which at least one of k altered votes is checked.
double detection_monte_carlo(const ConfidenceQuery& q, std::uint64_t trials, crypto::Drbg& rng);
/// ceil((m + 1) / 2): each altered vote moves a two-candidate margin by 2.
std::uint64_t min_changes_to_flip(std::uint64_t margin);

}  // namespace vvote::verify
