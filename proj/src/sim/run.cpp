#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "vvote/error.hpp"
#include "vvote/sim/harness.hpp"
#include "vvote/tally/decrypt.hpp"
#include "vvote/tally/export.hpp"
#include "vvote/tally/mixnet.hpp"

namespace vvote::sim {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

using election::PreferenceVector;
using election::Race;

std::vector<std::uint32_t> shuffled_ranks(crypto::Drbg& rng, std::size_t n) {
  std::vector<std::uint32_t> r(n);
  std::iota(r.begin(), r.end(), 1u);
  for (std::size_t i = n; i > 1; --i) std::swap(r[i - 1], r[rng.uniform(i)]);
  return r;
}

PreferenceVector district_marks(crypto::Drbg& rng, const Race& race, bool informal) {
  const auto n = race.size();
  if (!informal) return PreferenceVector::district(race.id, shuffled_ranks(rng, n));
  std::vector<std::uint32_t> r(n, 0);
  switch (rng.uniform(3)) {
    case 0: break;                               // left blank
    case 1: r[rng.uniform(n)] = 1; break;        // a single tick
    default: r = shuffled_ranks(rng, n); r[0] = r[n - 1]; break;  // repeated number
  }
  if (n == 1 && r[0] == 1) r[0] = 0;
  return PreferenceVector::district(race.id, r);
}

PreferenceVector region_marks(crypto::Drbg& rng, const Race& race, bool informal, double atl_rate) {
  const auto n = race.size();
  if (!informal) {
    if (!race.groups.empty() && rng.bernoulli(atl_rate))
      return PreferenceVector::atl(race.id, static_cast<std::uint32_t>(rng.uniform(race.groups.size())));
    return PreferenceVector::btl(race.id, shuffled_ranks(rng, n));
  }
  if (race.groups.size() >= 2 && rng.bernoulli(0.5)) {
    PreferenceVector v{race.id, election::VoteMode::Atl, {0, 1}, {}};
    return v;
  }
  auto r = shuffled_ranks(rng, n);
  if (n >= 2) r[1] = r[0];
  else r[0] = 0;
  return PreferenceVector::btl(race.id, r);
}

/// Ranks per printed position for what the voter marked.
std::vector<std::uint32_t> printed_ranks(const PreferenceVector& v, const Race& race,
                                         const std::vector<std::uint32_t>& perm) {
  if (v.mode != election::VoteMode::Atl) return v.ranks;
  std::vector<std::uint32_t> out(race.size(), 0);
  if (v.atl_groups.size() != 1) return out;
  auto canon = election::atl_expand(v.atl_groups[0], race);
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = canon[perm[i]];
  return out;
}

/// The plaintext record these marks should decrypt to.
tally::VoteRecord intended_record(const Race& race, const std::vector<std::uint32_t>& perm,
                                  const std::vector<std::uint32_t>& ranks) {
  tally::VoteRecord v{race.id, std::vector<std::string>(race.size())};
  for (std::size_t k = 1; k <= race.size(); ++k) {
    std::size_t holders = 0, at = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i)
      if (ranks[i] == k) ++holders, at = i;
    if (holders == 1) v.prefs[k - 1] = race.candidates[perm[at]].id;
    else if (holders > 1) v.prefs[k - 1] = std::string(tally::kDuplicateMark);
  }
  return v;
}

std::string truth_key(const tally::VoteRecord& v) { return v.race + "|" + v.key(); }

void alter_ranks(std::vector<std::uint32_t>& r) {
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i] != r[0]) {
      std::swap(r[0], r[i]);
      return;
    }
  }
  if (!r.empty()) r[0] = r[0] == 1 ? 2 : 1;
}

/// Sequential sampling: exactly `quota` of the remaining voters, if all vote.
bool draw_quota(crypto::Drbg& rng, std::uint64_t& quota, std::uint64_t remaining) {
  if (quota == 0 || remaining == 0) return false;
  if (rng.uniform(remaining) < quota) {
    --quota;
    return true;
  }
  return false;
}

bool in_outage(const Site& s, double hour) {
  return std::any_of(s.outages.begin(), s.outages.end(), [&](const Outage& o) { return hour >= o.start && hour < o.end; });
}

/// What a voter sees when looking up their receipt on the live board.
bool lookup_matches(const wbb::BulletinBoard& board, const protocol::ElectionParams& params,
                    const capture::PreferenceReceipt& pr) {
  if (!wbb::verify_receipt(pr.receipt, board.directory())) return false;
  for (const auto& e : board.lookup(pr.serial)) {
    if (e.item->kind != wbb::ItemKind::VoteCast) continue;
    if (e.item->hash != pr.receipt.item_hash) return false;
    return protocol::decode_vote(params.manifest.packing, e.item->payload).races == pr.races;
  }
  return false;
}

struct Voter {
  std::size_t site = 0;
  PreferenceVector district;
  PreferenceVector region;
};

}  // namespace

RunReport run_election(const ScenarioConfig& cfg) {
  const auto started = Clock::now();
  auto manifest = load_scenario_manifest(cfg.manifest);
  require(election::validate_manifest(manifest).empty(), ErrorCode::Parameter, "invalid manifest " + cfg.manifest);
  Deployment d(std::move(manifest), cfg);
  const auto& m = d.params.manifest;
  auto& board = *d.board;
  auto& ballots = *d.ballots;
  auto& cap = *d.capture;

  RunReport rep;
  rep.group_name = cfg.group;
  const std::uint64_t n = cfg.voters();
  crypto::Drbg rng(std::string_view(cfg.seed + "/voters"));

  std::vector<std::uint8_t> site_of;
  site_of.reserve(n);
  for (std::size_t s = 0; s < cfg.sites.size(); ++s) site_of.insert(site_of.end(), cfg.sites[s].voters, std::uint8_t(s));
  require(cfg.sites.size() <= 255, ErrorCode::Parameter, "too many sites");
  for (std::size_t i = site_of.size(); i > 1; --i) std::swap(site_of[i - 1], site_of[rng.uniform(i)]);

  std::set<std::uint64_t> victims;
  while (victims.size() < cfg.adversary.alter) victims.insert(rng.uniform(n));
  std::set<std::uint64_t> misprinted;
  while (misprinted.size() < cfg.adversary.misprint) misprinted.insert(rng.uniform(n));
  bool tamper_now = false;
  cap.set_tamper_hook([&](std::vector<protocol::RaceRanks>& races) {
    if (tamper_now && !races.empty()) alter_ranks(races[0].ranks);
  });

  std::uint64_t informal_d = cfg.informal_district_votes.value_or(0);
  std::uint64_t informal_r = cfg.informal_region_votes.value_or(0);
  std::vector<std::string> issued;
  std::vector<double> append_ms, reply_ms;
  double next_checkpoint = cfg.checkpoint_hours;

  auto issue = [&](const std::string& district) -> std::optional<ballot::IssuedBallot> {
    try {
      auto b = ballots.issue(district);
      issued.push_back(b.cl.serial);
      return b;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unavailable) throw;
      return std::nullopt;
    }
  };

  // Casts on ballot `b`, retrying while the board is unavailable. The
  // session stays open for a follow-up quarantine; empty if no receipt.
  using Cast = std::pair<capture::PreferenceReceipt, std::string>;
  auto cast = [&](const ballot::IssuedBallot& b, const Voter& v, double latency) -> std::optional<Cast> {
    auto s = cap.start_session(b.cl.qr);
    auto pd = v.district, pr = v.region;
    pd.race = s.printed[0].race;
    pr.race = s.printed[1].race;
    cap.record_preferences(s.id, pd, pr);
    for (int attempt = 0; attempt < 3; ++attempt) {
      try {
        auto t0 = Clock::now();
        auto receipt = cap.submit(s.id);
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        append_ms.push_back(ms);
        reply_ms.push_back(ms + latency);
        return Cast{std::move(receipt), s.id};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unavailable) throw;
      }
    }
    cap.close(s.id);
    return std::nullopt;
  };

  for (std::uint64_t i = 0; i < n; ++i) {
    const double hour = (static_cast<double>(i) + 0.5) / static_cast<double>(n) * cfg.voting_hours;
    board.set_time(static_cast<std::uint64_t>(hour * 3600));
    while (hour >= next_checkpoint) {
      try {
        board.checkpoint();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unavailable) throw;
      }
      next_checkpoint += cfg.checkpoint_hours;
    }
    for (auto& f : inject_fault(board, cfg.peer_faults, i)) rep.faults.push_back(f);

    const auto& site = cfg.sites[site_of[i]];
    if (in_outage(site, hour)) {
      ++rep.outcomes["paper_outage"];
      continue;
    }

    const auto& district = m.districts[rng.uniform(m.districts.size())];
    const auto& drace = m.district_race(district.id);
    const auto& rrace = m.region_race(district.region);
    const std::uint64_t remaining = n - i;
    const bool inf_d = cfg.informal_district_votes ? draw_quota(rng, informal_d, remaining)
                                                   : rng.bernoulli(cfg.rates.informal_district);
    const bool inf_r = cfg.informal_region_votes ? draw_quota(rng, informal_r, remaining)
                                                 : rng.bernoulli(cfg.rates.informal_region);
    Voter v{site_of[i], district_marks(rng, drace, inf_d), region_marks(rng, rrace, inf_r, cfg.rates.atl)};
    const bool audits = rng.bernoulli(cfg.rates.audit);
    const bool quarantines = rng.bernoulli(cfg.rates.quarantine);
    const bool compares = rng.bernoulli(cfg.rates.compare);
    const bool looks_up = rng.bernoulli(cfg.rates.lookup);
    tamper_now = victims.count(i) > 0;

    const bool misprint = misprinted.count(i) > 0;
    ballots.set_misprint(misprint);
    auto b = issue(district.id);
    ballots.set_misprint(false);
    if (b && (audits || misprint)) {
      ballots.audit(b->cl.serial);
      ++rep.outcomes["audited_then_reissued"];
      b = issue(district.id);
    }
    if (!b) {
      ++rep.outcomes["unavailable"];
      continue;
    }

    auto record = ballots.record(b->cl.serial);
    auto done = cast(*b, v, site.latency_ms);
    if (done && quarantines) {
      cap.quarantine(done->second, "voter request");
      cap.close(done->second);
      ++rep.outcomes["quarantined_then_recast"];
      done.reset();
      if (auto again = issue(district.id)) {
        record = ballots.record(again->cl.serial);
        done = cast(*again, v, site.latency_ms);
      }
    }
    if (!done) {
      ++rep.outcomes["unavailable"];
      continue;
    }
    cap.close(done->second);
    auto& receipt = done->first;
    ++rep.outcomes["voted"];
    ++rep.votes_cast;
    if (tamper_now) ++rep.tampered;
    if (compares) ++rep.compares;
    if (looks_up) {
      ++rep.lookups;
      if (!lookup_matches(board, d.params, receipt)) {
        ++rep.lookup_mismatches;
        rep.detected = true;
      }
    }

    const auto& rd = record->races[0];
    const auto& rr = record->races[1];
    ++rep.ground_truth[truth_key(intended_record(drace, rd.permutation, printed_ranks(v.district, drace, rd.permutation)))];
    ++rep.ground_truth[truth_key(intended_record(rrace, rr.permutation, printed_ranks(v.region, rrace, rr.permutation)))];
    if (cfg.keep_artifacts) rep.receipts.push_back(std::move(receipt));
  }
  tamper_now = false;
  for (std::size_t p = 0; p < board.peer_count(); ++p)
    if (!board.peer(p).alive()) board.restart_peer(p);
  board.set_time(static_cast<std::uint64_t>(cfg.voting_hours * 3600));
  board.checkpoint();

  rep.ballots_issued = issued.size();
  for (const auto& s : issued) ++rep.ballot_status[std::string(ballot::to_string(ballots.status(s)))];
  issued.clear();
  issued.shrink_to_fit();
  {
    std::map<std::string, std::uint64_t> votes_per_serial;
    for (const auto& it : board.items()) {
      ++rep.item_counts[std::string(wbb::to_string(it->kind))];
      if (it->kind == wbb::ItemKind::VoteCast && ++votes_per_serial[it->serial] == 2) ++rep.duplicate_votes;
    }
  }
  rep.append_ms = percentiles(std::move(append_ms));
  rep.reply_ms = percentiles(std::move(reply_ms));
  rep.shares = d.keys.shares;

  if (cfg.tally) {
    if (cfg.keep_artifacts) rep.artifacts = std::make_shared<verify::PublishedArtifacts>();
    auto log = board.items();
    auto checkpoints = board.checkpoint_file();
    d.capture.reset();
    d.ballots.reset();
    d.board.reset();
    verify::ElectionVerifier verifier(log, checkpoints);
    verifier.check_receipts(rep.receipts);

    const auto eg = d.params.elgamal();
    const auto& g = *d.params.group;
    crypto::DecodeTable table(g, d.params.table_bound());
    const auto& inputs = verifier.inputs();
    crypto::Drbg mix_rng(std::string_view(cfg.seed + "/mix"));
    std::map<std::string, std::vector<tally::VoteRecord>> houses = {{verify::kDistrictHouse, {}},
                                                                    {verify::kRegionHouse, {}}};
    rep.tally.emplace();
    for (const auto& race : m.races) {
      auto batch = inputs.races.find(race.id);
      require(batch != inputs.races.end(), ErrorCode::State, "no mix input for " + race.id);
      auto t = tally::mix(batch->second, cfg.mix_stages, eg, verifier.final_checkpoint(), mix_rng);
      auto rec = tally::decrypt_batch(g, race.id, t.output(), d.keys.shares, cfg.trustee_threshold, table);
      verifier.check_race(race.id, &t, &rec);
      std::vector<tally::VoteRecord> records;
      records.reserve(rec.rows.size());
      for (const auto& row : rec.rows) {
        records.push_back(tally::decode_record(race, row.plaintexts, m.packing));
        ++rep.decrypted[truth_key(records.back())];
      }
      rep.tally->add(tally::tally_race(race, records, m.formality));
      auto& house = houses[verify::house_of(race)];
      house.insert(house.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
      if (rep.artifacts) {
        rep.artifacts->transcripts[race.id] = std::move(t);
        rep.artifacts->decryptions[race.id] = std::move(rec);
      }
    }
    std::map<std::string, std::string> exports;
    for (auto& [house, records] : houses) {
      rep.export_lines[house] = records.size();
      exports[house] = tally::export_votes(records);
      records = {};
    }
    verifier.check_exports(exports);
    rep.verification = verifier.finish();
    if (rep.artifacts) {
      rep.artifacts->log = std::move(log);
      rep.artifacts->checkpoints = std::move(checkpoints);
      rep.artifacts->exports = std::move(exports);
    }
  }
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return rep;
}

bool RunReport::conserved() const {
  std::uint64_t total = 0;
  for (const auto& [status, count] : ballot_status) total += count;
  auto get = [](const auto& map, const std::string& k) -> std::uint64_t {
    auto it = map.find(k);
    return it == map.end() ? 0 : it->second;
  };
  if (total != ballots_issued || get(ballot_status, "VOTED") != votes_cast) return false;
  if (tally)
    for (const auto& [house, lines] : export_lines)
      if (lines != votes_cast) return false;
  return true;
}

namespace {

json percentiles_json(const Percentiles& p) {
  return {{"samples", p.samples}, {"p50", p.p50}, {"p90", p.p90}, {"p99", p.p99}, {"max", p.max}};
}

json stable_json(const RunReport& r) {
  json faults = json::array();
  for (const auto& f : r.faults)
    faults.push_back({{"at", f.at}, {"peer", f.peer}, {"crashed", f.crashed}, {"live_after", f.live_after}});
  json j = {{"item_counts", r.item_counts},
            {"outcomes", r.outcomes},
            {"ballot_status", r.ballot_status},
            {"ballots_issued", r.ballots_issued},
            {"votes_cast", r.votes_cast},
            {"export_lines", r.export_lines},
            {"tampered", r.tampered},
            {"lookups", r.lookups},
            {"lookup_mismatches", r.lookup_mismatches},
            {"compares", r.compares},
            {"duplicate_votes", r.duplicate_votes},
            {"detected", r.detected},
            {"conserved", r.conserved()},
            {"truth_matches", r.truth_matches()},
            {"ground_truth", r.ground_truth},
            {"faults", faults}};
  j["tally"] = r.tally ? tally::to_json(*r.tally) : json(nullptr);
  j["verification"] = r.verification ? verify::to_json(*r.verification) : json(nullptr);
  if (r.tally) j["formal_proportion"] = r.tally->formal_proportion();
  return j;
}

}  // namespace

std::string RunReport::digest() const { return crypto::sha256_hex(stable_json(*this).dump()); }

json to_json(const RunReport& r) {
  auto j = stable_json(r);
  j["digest"] = r.digest();
  j["append_ms"] = percentiles_json(r.append_ms);
  j["reply_ms"] = percentiles_json(r.reply_ms);
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

std::string RunReport::render_text() const {
  std::ostringstream out;
  out << "ballots issued " << ballots_issued << ", votes cast " << votes_cast << "\n";
  out << "items:";
  for (const auto& [k, v] : item_counts) out << " " << k << "=" << v;
  out << "\nvoters:";
  for (const auto& [k, v] : outcomes) out << " " << k << "=" << v;
  out << "\nballots:";
  for (const auto& [k, v] : ballot_status) out << " " << k << "=" << v;
  out << "\n";
  if (tally) {
    out << "export lines:";
    for (const auto& [k, v] : export_lines) out << " " << k << "=" << v;
    out << "\nformal " << tally->formal << ", informal " << tally->informal << ", formal proportion " << std::fixed
        << std::setprecision(4) << tally->formal_proportion() * 100 << "%\n";
    out << "ground truth " << (truth_matches() ? "matches" : "DIFFERS FROM") << " the decrypted votes\n";
  }
  out << "tampered " << tampered << ", lookups " << lookups << ", lookup mismatches " << lookup_mismatches
      << (detected ? " (detected)" : "") << "\n";
  out << std::setprecision(3) << "append ms p50 " << append_ms.p50 << " p90 " << append_ms.p90 << " p99 " << append_ms.p99
      << "; reply ms p50 " << reply_ms.p50 << "\n";
  out << "conserved " << (conserved() ? "yes" : "NO") << ", duplicate votes " << duplicate_votes << "\n";
  if (verification) out << verification->render_text();
  out << "wall " << wall_seconds << " s, digest " << digest() << "\n";
  return out.str();
}

void write_run(const RunReport& r, const fs::path& out) {
  fs::create_directories(out);
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    require(bool(f), ErrorCode::Parameter, "cannot write " + p.string());
    f << text;
  };
  if (r.artifacts) verify::save_artifacts(*r.artifacts, out / "published");
  if (!r.shares.empty()) {
    fs::create_directories(out / "private");
    auto g = crypto::make_group(r.group_name);
    json shares = json::array();
    for (const auto& s : r.shares) shares.push_back(tally::to_json(*g, s));
    write(out / "private" / "shares.json", json{{"group", r.group_name}, {"shares", shares}}.dump(1));
  }
  if (!r.receipts.empty()) {
    fs::create_directories(out / "receipts");
    for (const auto& pr : r.receipts) write(out / "receipts" / (pr.serial + ".json"), capture::to_json(pr).dump(1));
  }
  write(out / "report.json", to_json(r).dump(1));
  write(out / "report.txt", r.render_text());
}

}  // namespace vvote::sim
