#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "vvote/error.hpp"
#include "vvote/sim/harness.hpp"
#include "vvote/tally/irv.hpp"
#include "vvote/verify/verifier.hpp"

using namespace vvote;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned targets and tolerances.
constexpr double kLookupRate = 0.134;
constexpr std::uint64_t kAlteredVotes = 21;
constexpr double kNonDetection = 0.049;
constexpr double kNonDetectionTol = 0.001;
constexpr double kHighRateDetection = 0.999;
constexpr std::uint64_t kMargin = 41;
constexpr std::uint64_t kMarginFlips = 21;

constexpr std::uint64_t kReplicaLines = 1121;
constexpr std::uint64_t kReplicaRaceVotes = 2242;
constexpr double kFormalPercent = 98.13;
constexpr double kFormalPercentTol = 0.01;
constexpr double kReplicaSeconds = 300;

constexpr int kMonteCarloTrials = 1000;
constexpr double kExpectedDetection = 0.951;
constexpr double kSigmas = 3;
constexpr int kInjections = 100;
constexpr int kHonestRuns = 100;

constexpr int kIrvInstances = 500;
constexpr int kPackVectors = 500;
constexpr int kElGamalCases = 200;

constexpr double kBenchSeconds = 20;
constexpr unsigned kBenchConcurrency = 4;
constexpr std::uint64_t kVotesPer10s = 800;
constexpr double kReferenceLatencyMs = 300;

constexpr std::uint64_t kScaleVotes = 1000000;
constexpr int kSchedules = 1000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------- statistics

Verdict statistics() {
  double oracle = 1;
  for (std::uint64_t i = 0; i < kAlteredVotes; ++i) oracle *= 1 - kLookupRate;
  const double miss = 1 - verify::detection_confidence({kLookupRate, kAlteredVotes, std::nullopt});
  const double high = verify::detection_confidence({0.5, kAlteredVotes, std::nullopt});
  const auto flips = verify::min_changes_to_flip(kMargin);
  const bool pass = std::abs(miss - kNonDetection) <= kNonDetectionTol && std::abs(miss - oracle) < 1e-12 &&
                    high > kHighRateDetection && flips == kMarginFlips;
  return {pass, "non-detection(0.134, 21) = " + fmt(miss) + " (target 0.049 +/- 0.001), detection(0.5, 21) = " +
                    fmt(high, 7) + " (> 0.999), min flips for margin 41 = " + std::to_string(flips)};
}

// ---------------------------------------------------------------- deployment

Verdict deployment_replica() {
  const auto t0 = Clock::now();
  auto r = sim::run_election(sim::deployment_replica());
  const double secs = seconds_since(t0);
  const auto district = r.export_lines[verify::kDistrictHouse];
  const auto region = r.export_lines[verify::kRegionHouse];
  const std::uint64_t race_votes = r.tally ? r.tally->formal + r.tally->informal : 0;
  const double percent = r.tally ? 100 * r.tally->formal_proportion() : 0;
  const bool verified = r.verification && r.verification->passed();
  const bool pass = district == kReplicaLines && region == kReplicaLines && race_votes == kReplicaRaceVotes &&
                    std::abs(percent - kFormalPercent) <= kFormalPercentTol && verified && r.truth_matches() &&
                    secs < kReplicaSeconds;
  return {pass, "export lines " + std::to_string(district) + "/" + std::to_string(region) + ", formal " + fmt(percent) +
                    "% of " + std::to_string(race_votes) + " race-votes, verifier " + (verified ? "PASS" : "FAIL") +
                    ", tally matches intent " + (r.truth_matches() ? "yes" : "no") + ", " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------- tamper

bool detected_by_verifier(const verify::PublishedArtifacts& a, const std::vector<capture::PreferenceReceipt>& receipts) {
  try {
    return !verify::verify_election(a, receipts).passed();
  } catch (const Error&) {
    return true;
  }
}

using Injection = std::function<void(verify::PublishedArtifacts&, std::vector<capture::PreferenceReceipt>&, crypto::Drbg&)>;

void delete_item(verify::PublishedArtifacts& a, std::vector<capture::PreferenceReceipt>&, crypto::Drbg& rng) {
  a.log.erase(a.log.begin() + static_cast<std::ptrdiff_t>(rng.uniform(a.log.size())));
}

void mutate_item(verify::PublishedArtifacts& a, std::vector<capture::PreferenceReceipt>&, crypto::Drbg& rng) {
  auto& slot = a.log[rng.uniform(a.log.size())];
  auto copy = std::make_shared<wbb::WbbItem>(*slot);
  copy->payload[rng.uniform(copy->payload.size())] ^= static_cast<char>(1u << rng.uniform(7));
  slot = copy;
}

void forge_receipt(verify::PublishedArtifacts&, std::vector<capture::PreferenceReceipt>& receipts, crypto::Drbg& rng) {
  auto& pr = receipts[rng.uniform(receipts.size())];
  switch (rng.uniform(3)) {
    case 0: {  // claims different ranks
      auto& ranks = pr.races[0].ranks;
      ranks[0] = ranks[0] == 1 ? 2 : 1;
      break;
    }
    case 1:  // countersignatures the forger cannot produce
      for (auto& sig : pr.receipt.signatures) sig.signature[rng.uniform(64)] ^= 0x10;
      break;
    default:  // a serial that never voted
      pr.serial[0] = pr.serial[0] == 'f' ? 'e' : 'f';
      pr.receipt.serial = pr.serial;
  }
}

void substitute_mix_row(verify::PublishedArtifacts& a, std::vector<capture::PreferenceReceipt>&, crypto::Drbg& rng) {
  std::vector<std::string> races;
  for (const auto& [race, t] : a.transcripts)
    if (t.output().size() >= 2) races.push_back(race);
  auto& t = a.transcripts.at(races[rng.uniform(races.size())]);
  auto& out = t.stages[rng.uniform(t.stages.size())].output;
  const auto i = rng.uniform(out.size());
  out[i] = out[(i + 1 + rng.uniform(out.size() - 1)) % out.size()];
}

void omit_export_line(verify::PublishedArtifacts& a, std::vector<capture::PreferenceReceipt>&, crypto::Drbg& rng) {
  auto& csv = a.exports[rng.bernoulli(0.5) ? verify::kDistrictHouse : verify::kRegionHouse];
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(rng.uniform(lines.size())));
  csv.clear();
  for (const auto& l : lines) csv += l + "\n";
}

sim::ScenarioConfig small_run(const std::string& seed, std::uint64_t voters) {
  sim::ScenarioConfig c;
  c.sites = {{"local", voters, 0, {}}};
  c.seed = seed;
  return c;
}

Verdict tamper_soundness() {
  std::ostringstream detail;
  bool pass = true;

  // Alteration at the capture point, caught only by voters who look up.
  int caught = 0;
  for (int i = 0; i < kMonteCarloTrials; ++i) {
    auto c = small_run("tamper-mc-" + std::to_string(i), kAlteredVotes);
    c.adversary.alter = kAlteredVotes;
    c.rates.lookup = kLookupRate;
    c.tally = false;
    c.keep_artifacts = false;
    caught += sim::run_election(c).detected;
  }
  const double freq = static_cast<double>(caught) / kMonteCarloTrials;
  const double sigma = std::sqrt(kExpectedDetection * (1 - kExpectedDetection) / kMonteCarloTrials);
  const bool mc_ok = std::abs(freq - kExpectedDetection) <= kSigmas * sigma;
  pass &= mc_ok;
  detail << "alteration detected " << fmt(freq) << " (0.951 +/- " << fmt(kSigmas * sigma) << ")";

  auto base_cfg = small_run("tamper-base", 40);
  base_cfg.rates.audit = 0.2;
  base_cfg.rates.quarantine = 0.1;
  const auto base = sim::run_election(base_cfg);
  if (!base.verification || !base.verification->passed()) return {false, "honest base election failed verification"};

  const std::vector<std::pair<std::string, Injection>> classes = {{"deletion", delete_item},
                                                                  {"mutation", mutate_item},
                                                                  {"forged receipt", forge_receipt},
                                                                  {"mix substitution", substitute_mix_row},
                                                                  {"export omission", omit_export_line}};
  for (const auto& [name, inject] : classes) {
    crypto::Drbg rng{std::string_view(name)};
    int found = 0;
    for (int i = 0; i < kInjections; ++i) {
      auto a = *base.artifacts;
      auto receipts = base.receipts;
      inject(a, receipts, rng);
      found += detected_by_verifier(a, receipts);
    }
    pass &= found == kInjections;
    detail << ", " << name << " " << found << "/" << kInjections;
  }

  // Printed candidate list differs from its commitment; the voter audits it.
  int audits = 0;
  for (int i = 0; i < kInjections; ++i) {
    auto c = small_run("tamper-audit-" + std::to_string(i), 6);
    c.adversary.misprint = 1;
    auto r = sim::run_election(c);
    audits += r.verification && !r.verification->check("audits").passed;
  }
  pass &= audits == kInjections;
  detail << ", audit mismatch " << audits << "/" << kInjections;

  int false_positives = 0;
  for (int i = 0; i < kHonestRuns; ++i) {
    auto c = small_run("honest-" + std::to_string(i), 12);
    c.rates.audit = 0.1;
    c.rates.quarantine = 0.05;
    c.rates.lookup = 1;
    c.rates.informal_district = 0.1;
    auto r = sim::run_election(c);
    false_positives += r.detected || !r.verification || !r.verification->passed() || !r.truth_matches();
  }
  pass &= false_positives == 0;
  detail << ", false positives " << false_positives << "/" << kHonestRuns;
  return {pass, detail.str()};
}

// ---------------------------------------------------------------- oracles

// Reference IRV: recount from scratch every round and pick the loser by
// sorting on (votes, first preferences, id).
std::optional<std::string> oracle_irv(const std::vector<std::string>& cands,
                                      const std::vector<std::vector<std::string>>& ballots) {
  if (ballots.empty()) return std::nullopt;
  std::map<std::string, std::uint64_t> first;
  for (const auto& b : ballots)
    if (!b.empty()) first[b[0]]++;
  std::set<std::string> alive(cands.begin(), cands.end());
  while (true) {
    std::map<std::string, std::uint64_t> count;
    for (const auto& c : alive) count[c] = 0;
    std::uint64_t active = 0;
    for (const auto& b : ballots)
      for (const auto& id : b)
        if (alive.count(id)) {
          ++count[id];
          ++active;
          break;
        }
    std::vector<std::pair<std::string, std::uint64_t>> sorted(count.begin(), count.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    if (alive.size() == 1 || sorted[0].second * 2 > active) return sorted[0].first;
    auto loser = std::min_element(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
      return std::tuple(a.second, first[a.first], a.first) < std::tuple(b.second, first[b.first], b.first);
    });
    alive.erase(loser->first);
  }
}

using u64 = std::uint64_t;
using u128 = unsigned __int128;
constexpr u64 kP = 9223372036854771239ULL;
constexpr u64 kQ = (kP - 1) / 2;
constexpr u64 kG = 4;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }
u64 powmod(u64 b, u64 e, u64 m) {
  u64 r = 1;
  for (; e; e >>= 1, b = mulmod(b, b, m))
    if (e & 1) r = mulmod(r, b, m);
  return r;
}
u64 raw(const crypto::Element& e) { return read_u64_be(e.raw.data()); }
u64 raw(const crypto::Scalar& s) { return read_u64_be(s.raw.data()); }

std::optional<u64> oracle_decrypt(const crypto::Ciphertext& c, u64 secret, u64 bound) {
  const u64 gm = mulmod(raw(c.b), powmod(powmod(raw(c.a), secret, kP), kP - 2, kP), kP);
  u64 acc = 1;
  for (u64 m = 0; m < bound; ++m, acc = mulmod(acc, kG, kP))
    if (acc == gm) return m;
  return std::nullopt;
}

Verdict oracle_equivalence() {
  crypto::Drbg rng{std::string_view("acceptance-oracles")};

  int irv = 0;
  for (int i = 0; i < kIrvInstances; ++i) {
    election::Race race;
    race.id = "R";
    std::vector<std::string> ids;
    for (std::size_t k = 0, n = 2 + rng.uniform(4); k < n; ++k) {
      ids.push_back(std::string(1, static_cast<char>('A' + k)));
      race.candidates.push_back({ids.back(), ""});
    }
    std::vector<std::vector<std::string>> ballots(rng.uniform(101));
    for (auto& b : ballots) {
      b = ids;
      for (std::size_t k = b.size(); k > 1; --k) std::swap(b[k - 1], b[rng.uniform(k)]);
      b.resize(1 + rng.uniform(i % 3 == 0 ? 2 : ids.size()));
    }
    irv += tally::tally_irv(race, ballots).winner == oracle_irv(ids, ballots);
  }

  const election::PackingRules packing;
  int packs = 0;
  for (int i = 0; i < kPackVectors; ++i) {
    std::vector<std::uint32_t> v(1 + rng.uniform(40));
    for (auto& x : v) x = static_cast<std::uint32_t>(rng.uniform(packing.slot_base));
    std::vector<u64> expected((v.size() + packing.slots_per_plaintext - 1) / packing.slots_per_plaintext, 0);
    for (std::size_t k = 0; k < v.size(); ++k) {
      u64 weight = 1;
      for (std::size_t j = 0; j < k % packing.slots_per_plaintext; ++j) weight *= packing.slot_base;
      expected[k / packing.slots_per_plaintext] += v[k] * weight;
    }
    const auto packed = election::pack_preferences(v, packing.slots_per_plaintext, packing.slot_base);
    packs += packed == expected &&
             election::unpack_preferences(packed, v.size(), packing.slots_per_plaintext, packing.slot_base) == v;
  }

  auto g = crypto::make_group("test64");
  auto keys = crypto::keygen(g, 3, 2, as_bytes("acceptance-elgamal"));
  u64 secret = 0;  // Lagrange over shares 1 and 2
  for (std::size_t i = 0; i < 2; ++i) {
    const u64 xi = keys.shares[i].index, xj = keys.shares[1 - i].index;
    const u64 lambda = mulmod(xj, powmod((xj + kQ - xi) % kQ, kQ - 2, kQ), kQ);
    secret = (secret + mulmod(lambda, raw(keys.shares[i].value), kQ)) % kQ;
  }
  const u64 bound = packing.table_bound();
  crypto::ElGamal eg(g, keys.public_keys.joint, bound);
  int elgamal = 0;
  for (int i = 0; i < kElGamalCases; ++i) {
    const u64 m = rng.uniform(std::min<u64>(bound, 4096));
    const auto c = eg.encrypt(m, g->random_scalar(rng));
    const auto r1 = g->random_scalar(rng), r2 = g->random_scalar(rng);
    const auto once = eg.reencrypt(c, r1);
    elgamal += oracle_decrypt(c, secret, 4096) == m && oracle_decrypt(once, secret, 4096) == m && !(once == c) &&
               eg.reencrypt(once, r2) == eg.reencrypt(c, g->add(r1, r2));
  }

  const bool pass = irv == kIrvInstances && packs == kPackVectors && elgamal == kElGamalCases;
  return {pass, "IRV " + std::to_string(irv) + "/" + std::to_string(kIrvInstances) + ", pack/unpack " +
                    std::to_string(packs) + "/" + std::to_string(kPackVectors) + ", ElGamal round trip + re-encryption " +
                    std::to_string(elgamal) + "/" + std::to_string(kElGamalCases)};
}

// ---------------------------------------------------------------- throughput

Verdict throughput() {
  auto r = sim::benchmark_throughput({kBenchSeconds, kBenchConcurrency, true});
  const auto worst = r.windows.empty() ? 0 : *std::min_element(r.windows.begin(), r.windows.end());
  std::string windows;
  for (auto w : r.windows) windows += (windows.empty() ? "" : " ") + std::to_string(w);
  return {!r.windows.empty() && worst >= kVotesPer10s,
          "VOTE_CASTs per 10 s window over HTTP: " + windows + " (>= 800); submit latency p50 " +
              fmt(r.append_ms.p50, 2) + " ms, p99 " + fmt(r.append_ms.p99, 2) + " ms (reference " +
              fmt(kReferenceLatencyMs, 0) + " ms, reported only)"};
}

// ---------------------------------------------------------------- scale

Verdict scale(std::uint64_t votes) {
  auto c = small_run("scale", votes);
  c.keep_artifacts = false;
  const auto t0 = Clock::now();
  auto r = sim::run_election(c);
  const double secs = seconds_since(t0);
  const bool verified = r.verification && r.verification->passed();
  const bool pass = r.votes_cast == votes && r.duplicate_votes == 0 && verified && r.truth_matches();
  return {pass, std::to_string(r.votes_cast) + " votes cast, verifier " + (verified ? "PASS" : "FAIL") +
                    ", tally matches intent " + (r.truth_matches() ? "yes" : "no") + ", " + fmt(secs, 0) + " s"};
}

// ---------------------------------------------------------------- invariants

Verdict protocol_invariants() {
  std::uint64_t votes = 0, crashes = 0, capture_crashes = 0, retries = 0, refusals = 0, audited = 0;
  int violations = 0;
  std::string first;
  auto violation = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };

  for (int s = 0; s < kSchedules; ++s) {
    const std::string tag = "schedule " + std::to_string(s) + ": ";
    crypto::Drbg rng{std::string_view("schedule-" + std::to_string(s))};
    auto cfg = small_run("schedule-" + std::to_string(s), 0);
    sim::Deployment d(election::small_manifest(), cfg);
    auto& board = *d.board;
    const std::size_t tolerated = board.peer_count() - cfg.threshold;
    bool crash_next = false, crashed_now = false;
    d.capture->set_crash_hook([&] {
      crashed_now = crash_next;
      crash_next = false;
      return crashed_now;
    });
    auto down = [&] { return board.peer_count() - board.live_peers(); };
    auto restart_one = [&] {
      for (std::size_t p = 0; p < board.peer_count(); ++p)
        if (!board.peer(p).alive()) return board.restart_peer(p);
    };
    auto issue = [&](const std::string& district) {
      for (int attempt = 0;; ++attempt) {
        try {
          return d.ballots->issue(district);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Unavailable || attempt > 4) throw;
          if (down() <= tolerated) violation(tag + "ballot refused with " + std::to_string(down()) + " peers down");
          ++refusals;
          restart_one();
        }
      }
    };

    std::map<std::string, wbb::Digest> receipts;
    std::set<std::string> audited_serials;
    const auto voters = 2 + rng.uniform(7);
    const auto& m = d.params.manifest;
    for (std::uint64_t v = 0; v < voters; ++v) {
      switch (rng.uniform(4)) {
        case 0:
          if (board.live_peers() > 0) {
            std::vector<std::size_t> live;
            for (std::size_t p = 0; p < board.peer_count(); ++p)
              if (board.peer(p).alive()) live.push_back(p);
            board.crash_peer(live[rng.uniform(live.size())]);
            ++crashes;
          }
          break;
        case 1:
          restart_one();
          break;
        default:
          break;
      }

      const auto& district = m.districts[rng.uniform(m.districts.size())].id;
      auto b = issue(district);
      if (rng.bernoulli(0.25)) {
        d.ballots->audit(b.cl.serial);
        audited_serials.insert(b.cl.serial);
        ++audited;
        try {
          d.capture->start_session(b.cl.qr);
          violation(tag + "audited serial " + b.cl.serial + " opened a voting session");
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Conflict) violation(tag + "audited serial refused with " + e.what());
        }
        try {
          board.append(wbb::ItemKind::VoteCast, b.cl.serial, "{}");
          violation(tag + "board accepted a vote for audited serial " + b.cl.serial);
        } catch (const Error&) {
        }
        b = issue(district);
      }

      auto session = d.capture->start_session(b.cl.qr);
      std::vector<std::uint32_t> ranks(session.printed[0].candidate_ids.size());
      std::iota(ranks.begin(), ranks.end(), 1u);
      for (std::size_t k = ranks.size(); k > 1; --k) std::swap(ranks[k - 1], ranks[rng.uniform(k)]);
      d.capture->record_preferences(session.id, election::PreferenceVector::district(session.printed[0].race, ranks),
                                    election::PreferenceVector::atl(session.printed[1].race, 0));
      crash_next = rng.bernoulli(0.3);
      std::optional<capture::PreferenceReceipt> pr;
      for (int attempt = 0; attempt < 8 && !pr; ++attempt) {
        const auto was_down = down();
        try {
          pr = d.capture->submit(session.id);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Unavailable) {
            violation(tag + "submit failed: " + e.what());
            break;
          }
          ++retries;
          if (crashed_now) {
            ++capture_crashes;
          } else {
            if (was_down <= tolerated)
              violation(tag + "vote refused with " + std::to_string(was_down) + " peers down");
            restart_one();
          }
        }
      }
      if (!pr) {
        violation(tag + "vote lost for " + b.cl.serial);
        continue;
      }
      for (auto extra = rng.uniform(3); extra > 0; --extra) {
        ++retries;
        if (!(d.capture->submit(session.id).receipt.item_hash == pr->receipt.item_hash))
          violation(tag + "retry returned a different receipt for " + b.cl.serial);
      }
      d.capture->close(session.id);
      receipts[b.cl.serial] = pr->receipt.item_hash;
      ++votes;
    }

    std::map<std::string, std::vector<wbb::ItemPtr>> cast;
    for (const auto& it : board.items())
      if (it->kind == wbb::ItemKind::VoteCast) cast[it->serial].push_back(it);
    for (const auto& [serial, hash] : receipts) {
      auto it = cast.find(serial);
      if (it == cast.end() || it->second.size() != 1)
        violation(tag + serial + " has " + std::to_string(it == cast.end() ? 0 : it->second.size()) + " VOTE_CASTs");
      else if (!(it->second[0]->hash == hash))
        violation(tag + serial + " receipt does not match its VOTE_CAST");
    }
    for (const auto& [serial, items] : cast)
      if (!receipts.count(serial)) violation(tag + serial + " cast without a receipt");
    for (const auto& serial : audited_serials)
      if (cast.count(serial)) violation(tag + "audited serial " + serial + " voted");
  }

  std::string detail = std::to_string(kSchedules) + " schedules, " + std::to_string(votes) + " votes, " +
                       std::to_string(crashes) + " peer crashes, " + std::to_string(capture_crashes) +
                       " capture crashes, " + std::to_string(retries) + " retries, " + std::to_string(refusals) +
                       " ballot refusals, " + std::to_string(audited) + " audited serials, " +
                       std::to_string(violations) + " violations";
  if (violations) detail += " (first: " + first + ")";
  return {violations == 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vvote acceptance criteria"};
  std::vector<std::string> only, skip;
  std::uint64_t scale_votes = kScaleVotes;
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--skip", skip, "skip these criteria");
  app.add_option("--scale-votes", scale_votes, "votes in the scale run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"statistics", statistics},
      {"deployment", deployment_replica},
      {"tamper", tamper_soundness},
      {"oracles", oracle_equivalence},
      {"throughput", throughput},
      {"scale", [&] { return scale(scale_votes); }},
      {"invariants", protocol_invariants},
  };
  auto listed = [](const std::vector<std::string>& names, const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };

  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if ((!only.empty() && !listed(only, name)) || listed(skip, name)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << fmt(seconds_since(t0), 1) << " s]"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
