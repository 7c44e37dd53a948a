#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vvote/ballot/ballot_service.hpp"
#include "vvote/capture/capture_service.hpp"
#include "vvote/crypto/elgamal.hpp"
#include "vvote/protocol/payloads.hpp"
#include "vvote/tally/irv.hpp"
#include "vvote/verify/verifier.hpp"
#include "vvote/wbb/board.hpp"

namespace vvote::sim {

/// Simulated hours since polls opened.
struct Outage {
  double start = 0;
  double end = 0;
};

/// A polling place. Remote sites differ only in latency and outages.
struct Site {
  std::string name = "local";
  std::uint64_t voters = 0;
  double latency_ms = 0;
  std::vector<Outage> outages;
};

struct PeerFault {
  std::uint32_t peer = 0;
  std::uint64_t crash_at = 0;  // voter index
  std::optional<std::uint64_t> restart_at;
};

/// Independent per-voter probabilities.
struct Rates {
  double compare = 1;      // compares the receipt with the candidate list
  double lookup = 0;       // checks the receipt on the board
  double audit = 0;        // audits a ballot first, then takes a fresh one
  double quarantine = 0;   // cancels after the receipt and votes again
  double informal_district = 0;
  double informal_region = 0;
  double atl = 0.5;        // region vote above the line
};

/// Capture-point adversary: rewrites the district ranks of `alter` voters
/// on their way to the board while their receipts show what they entered.
/// Print-point adversary: `misprint` ballots carry a candidate list that
/// differs from their commitment; those voters audit them.
struct Adversary {
  std::uint64_t alter = 0;
  std::uint64_t misprint = 0;
};

struct ScenarioConfig {
  std::string manifest = "small";  // "small", "reference", or a manifest JSON path
  std::string group = "test64";
  std::vector<Site> sites;         // voter counts add up to the electorate
  Rates rates;
  std::optional<std::uint64_t> informal_district_votes;  // exact counts override the rates
  std::optional<std::uint64_t> informal_region_votes;
  std::vector<PeerFault> peer_faults;
  Adversary adversary;
  std::uint32_t peers = 4;
  std::uint32_t threshold = 3;
  std::uint32_t trustees = 3;
  std::uint32_t trustee_threshold = 2;
  std::uint32_t mix_stages = 2;
  double voting_hours = 288;
  double checkpoint_hours = 24;
  std::string seed = "vvote";
  bool tally = true;           // mix, decrypt, export and verify after close
  bool keep_artifacts = true;  // retain published files and receipts in the report

  std::uint64_t voters() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);

/// 1121 voters: 973 at a remote site, 148 local, 29 informal district and
/// 13 informal region votes.
ScenarioConfig deployment_replica();

election::ElectionManifest load_scenario_manifest(const std::string& name);

/// Keys, board and services for one election.
struct Deployment {
  crypto::KeyMaterial keys;
  protocol::ElectionParams params;
  std::unique_ptr<wbb::BulletinBoard> board;
  std::unique_ptr<ballot::BallotService> ballots;
  std::unique_ptr<capture::CaptureService> capture;

  Deployment(election::ElectionManifest manifest, const ScenarioConfig& cfg);
};

struct Percentiles {
  std::uint64_t samples = 0;
  double p50 = 0;
  double p90 = 0;
  double p99 = 0;
  double max = 0;
};

Percentiles percentiles(std::vector<double> values);

struct AppliedFault {
  std::uint64_t at = 0;
  std::uint32_t peer = 0;
  bool crashed = false;
  std::size_t live_after = 0;
};

/// Crashes or restarts the peers named for voter `index`.
std::vector<AppliedFault> inject_fault(wbb::BulletinBoard& board, const std::vector<PeerFault>& plan,
                                       std::uint64_t index);

struct RunReport {
  std::map<std::string, std::uint64_t> item_counts;
  std::map<std::string, std::uint64_t> outcomes;        // per voter
  std::map<std::string, std::uint64_t> ballot_status;   // per issued ballot
  std::map<std::string, std::uint64_t> ground_truth;    // "race|prefs" -> count
  std::map<std::string, std::uint64_t> decrypted;       // same keying, from the tally
  std::map<std::string, std::uint64_t> export_lines;    // per house
  std::uint64_t ballots_issued = 0;
  std::uint64_t votes_cast = 0;       // receipts issued for votes that count
  std::uint64_t tampered = 0;
  std::uint64_t lookups = 0;
  std::uint64_t lookup_mismatches = 0;
  std::uint64_t compares = 0;
  std::uint64_t duplicate_votes = 0;  // serials with more than one VOTE_CAST
  bool detected = false;
  std::optional<tally::TallyResult> tally;
  std::optional<verify::VerificationReport> verification;
  std::vector<AppliedFault> faults;
  Percentiles append_ms;  // measured submit time
  Percentiles reply_ms;   // plus the site's network latency
  double wall_seconds = 0;

  std::shared_ptr<verify::PublishedArtifacts> artifacts;
  std::vector<capture::PreferenceReceipt> receipts;
  std::vector<crypto::TrusteeShare> shares;  // private
  std::string group_name;

  bool truth_matches() const { return ground_truth == decrypted; }
  /// Every issued ballot is in exactly one final state.
  bool conserved() const;
  /// SHA-256 over everything except timings.
  std::string digest() const;
  std::string render_text() const;
};

nlohmann::json to_json(const RunReport& r);

RunReport run_election(const ScenarioConfig& cfg);

/// out/published (verifier input), out/private/shares.json,
/// out/receipts/<serial>.json, out/report.json, out/report.txt.
void write_run(const RunReport& r, const std::filesystem::path& out);

struct BenchConfig {
  double seconds = 10;
  unsigned concurrency = 1;
  bool http = false;
  std::string manifest = "small";
  std::string seed = "bench";
};

struct BenchResult {
  std::uint64_t accepted = 0;         // VOTE_CAST items
  double seconds = 0;
  std::vector<std::uint64_t> windows;  // accepted per full 10 s window
  double per_10s = 0;                  // accepted / seconds * 10
  Percentiles append_ms;
};

nlohmann::json to_json(const BenchResult& b);

/// Voters cast votes as fast as `concurrency` workers can, each ballot
/// issued, captured and submitted in full; over HTTP when `http` is set.
BenchResult benchmark_throughput(const BenchConfig& cfg);

}  // namespace vvote::sim
