#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vvote/crypto/drbg.hpp"
#include "vvote/crypto/elgamal.hpp"
#include "vvote/crypto/sign.hpp"
#include "vvote/election/manifest.hpp"
#include "vvote/protocol/payloads.hpp"
#include "vvote/wbb/board.hpp"

namespace vvote::ballot {

enum class BallotStatus { Unused, Voted, Audited, Quarantined };

std::string_view to_string(BallotStatus s);

struct RaceBallot {
  std::string race;
  std::vector<std::uint32_t> permutation;  // printed position -> canonical index
  std::vector<std::string> printed;        // candidate ids in printed order
  std::vector<crypto::Ciphertext> onion;
  std::vector<crypto::Scalar> randomness;
};

/// One voter's ballot: the district race first, then the region race.
/// The service drops the races once the serial votes or is quarantined.
struct BallotRecord {
  std::string serial;
  std::vector<RaceBallot> races;

  bool randomness_erased() const;
};

struct PrintedRace {
  std::string race;
  std::vector<std::string> candidate_ids;
  friend bool operator==(const PrintedRace&, const PrintedRace&) = default;
};

/// Contents of the candidate-list QR code.
struct QrPayload {
  std::string serial;
  std::string manifest_digest;
  std::string wbb_endpoint;
  std::vector<PrintedRace> races;
  crypto::Signature signature{};
};

/// Base64 of canonical JSON, signed by the ballot-service key.
std::string qr_encode(QrPayload payload, const crypto::SigningKey& key);
/// Throws Format for malformed input, Signature if the signature fails.
QrPayload qr_decode(std::string_view qr, const crypto::PublicSigningKey& key);

struct PrintedCandidateList {
  std::string serial;
  std::vector<PrintedRace> races;
  std::vector<std::vector<std::string>> names;  // per race, printed order
  std::string qr;

  std::string render_text() const;
};

using AuditOpening = protocol::AuditPayload;

/// Samples permutations, randomness and a 128-bit serial from `rng` and
/// encrypts the onions. No side effects.
BallotRecord generate_ballot(const election::ElectionManifest& m, const crypto::ElGamal& eg,
                             const std::string& district_id, crypto::Drbg& rng);

protocol::CommitPayload commitment_of(const BallotRecord& b, const std::string& manifest_digest);
AuditOpening opening_of(const BallotRecord& b, const std::string& manifest_digest);

/// Public check of an opening: the printed lists match the opened
/// permutations, and re-encrypting the canonical indices with the opened
/// randomness reproduces every committed onion.
bool verify_audit(const election::ElectionManifest& m, const crypto::ElGamal& eg,
                  const std::vector<PrintedRace>& printed, const AuditOpening& opening,
                  const protocol::CommitPayload& commitment);

struct IssuedBallot {
  PrintedCandidateList cl;
  wbb::SignedReceipt commitment;
};

/// Print-on-demand ballot issue with commitments on the bulletin board.
class BallotService {
 public:
  BallotService(const protocol::ElectionParams& params, wbb::BulletinBoard& board, const std::string& key_seed,
                const std::string& rng_seed);

  /// Commits the new ballot to the board, then releases its candidate list.
  IssuedBallot issue(const std::string& district_id);
  /// Publishes and returns the opening. Conflict if the serial has been
  /// used or audited, NotFound if unknown.
  AuditOpening audit(const std::string& serial);
  BallotStatus status(const std::string& serial) const;
  std::optional<BallotRecord> record(const std::string& serial) const;
  std::size_t ballots() const;

  const crypto::PublicSigningKey& public_key() const { return key_.public_key(); }

  /// Test hook: ballots issued while set print two district candidates in
  /// swapped positions relative to the committed onion.
  void set_misprint(bool on) { misprint_ = on; }

 private:
  void on_item(const wbb::WbbItem& item);

  protocol::ElectionParams params_;
  crypto::ElGamal elgamal_;
  wbb::BulletinBoard& board_;
  crypto::SigningKey key_;
  std::string digest_;
  std::atomic<bool> misprint_ = false;

  mutable std::mutex mu_;
  crypto::Drbg rng_;
  std::uint64_t issued_ = 0;
  std::map<std::string, BallotRecord> records_;
};

}  // namespace vvote::ballot
