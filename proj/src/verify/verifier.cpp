#include "vvote/verify/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "vvote/ballot/ballot_service.hpp"
#include "vvote/error.hpp"
#include "vvote/wbb/merkle.hpp"

namespace vvote::verify {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kProblemCap = 50;

const std::vector<std::string> kCheckOrder = {"chain", "receipts", "audits", "mix", "decryption", "export"};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(bool(in), ErrorCode::NotFound, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary);
  require(bool(out), ErrorCode::Parameter, "cannot write " + p.string());
  out << text;
}

const wbb::Checkpoint* covering(const wbb::CheckpointFile& f, std::uint64_t seq) {
  for (const auto& cp : f.checkpoints)
    if (cp.covers(seq)) return &cp;
  return nullptr;
}

}  // namespace

std::string house_of(const election::Race& race) {
  return race.kind == election::RaceKind::District ? kDistrictHouse : kRegionHouse;
}

std::string log_to_ndjson(const std::vector<wbb::ItemPtr>& log) {
  std::string out;
  for (const auto& it : log) {
    out += wbb::to_ndjson_line(*it);
    out += '\n';
  }
  return out;
}

std::vector<wbb::ItemPtr> load_log(const fs::path& file) {
  std::ifstream in(file);
  require(bool(in), ErrorCode::NotFound, "cannot open " + file.string());
  std::vector<wbb::ItemPtr> log;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      log.push_back(std::make_shared<const wbb::WbbItem>(
          wbb::item_from_json(protocol::parse_json(line, "log line " + std::to_string(n)))));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::Format, file.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return log;
}

protocol::ElectionParams params_from_log(const std::vector<wbb::ItemPtr>& log) {
  require(!log.empty() && log.front()->kind == wbb::ItemKind::Manifest, ErrorCode::Format,
          "log does not start with a MANIFEST item");
  return protocol::decode_params(log.front()->payload);
}

void save_artifacts(const PublishedArtifacts& a, const fs::path& dir) {
  fs::create_directories(dir / "mix");
  fs::create_directories(dir / "decrypt");
  write_file(dir / "wbb_log.ndjson", log_to_ndjson(a.log));
  write_file(dir / "checkpoints.json", wbb::to_json(a.checkpoints).dump(1));
  if (a.transcripts.empty() && a.decryptions.empty() && a.exports.empty()) return;
  const auto params = params_from_log(a.log);
  const auto& g = *params.group;
  for (const auto& [race, t] : a.transcripts) write_file(dir / "mix" / (race + ".json"), to_json(g, t).dump());
  for (const auto& [race, d] : a.decryptions) write_file(dir / "decrypt" / (race + ".json"), to_json(g, d).dump());
  for (const auto& [house, csv] : a.exports) write_file(dir / ("export_" + house + ".csv"), csv);
}

PublishedArtifacts load_artifacts(const fs::path& dir) {
  PublishedArtifacts a;
  a.log = load_log(dir / "wbb_log.ndjson");
  a.checkpoints = wbb::checkpoint_file_from_json(protocol::parse_json(read_file(dir / "checkpoints.json"), "checkpoints"));
  if (a.log.empty()) return a;
  const auto params = params_from_log(a.log);
  const auto& g = *params.group;
  for (const auto& race : params.manifest.races) {
    auto mix = dir / "mix" / (race.id + ".json");
    if (fs::exists(mix))
      a.transcripts[race.id] = tally::mix_transcript_from_json(g, protocol::parse_json(read_file(mix), mix.string()));
    auto dec = dir / "decrypt" / (race.id + ".json");
    if (fs::exists(dec))
      a.decryptions[race.id] = tally::decryption_from_json(g, protocol::parse_json(read_file(dec), dec.string()));
  }
  for (const char* house : {kDistrictHouse, kRegionHouse}) {
    auto p = dir / (std::string("export_") + house + ".csv");
    if (fs::exists(p)) a.exports[house] = read_file(p);
  }
  return a;
}

void CheckOutcome::fail(std::string problem) {
  passed = false;
  ++failures;
  if (!first_failure) first_failure = problem;
  if (problems.size() < kProblemCap) problems.push_back(std::move(problem));
}

bool VerificationReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const CheckOutcome& VerificationReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  fail(ErrorCode::NotFound, "no check named " + name);
}

CheckOutcome& VerificationReport::check(const std::string& name) {
  for (auto& c : checks)
    if (c.name == name) return c;
  CheckOutcome c;
  c.name = name;
  checks.push_back(std::move(c));
  return checks.back();
}

std::string VerificationReport::render_text() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "ok   " : "FAIL ") << c.name << " (" << c.checked << " checked";
    if (!c.passed) out << ", " << c.failures << " failed";
    out << ")\n";
    for (const auto& p : c.problems) out << "     " << p << "\n";
    if (c.failures > c.problems.size()) out << "     ... " << c.failures - c.problems.size() << " more\n";
  }
  out << "verdict: " << (passed() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

json to_json(const VerificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json j = {{"name", c.name}, {"passed", c.passed}, {"checked", c.checked}, {"failures", c.failures},
              {"problems", c.problems}};
    j["first_failure"] = c.first_failure ? json(*c.first_failure) : json(nullptr);
    checks.push_back(j);
  }
  return {{"passed", r.passed()}, {"checks", checks}};
}

std::string_view to_string(ReceiptStatus s) {
  switch (s) {
    case ReceiptStatus::Ok: return "OK";
    case ReceiptStatus::Missing: return "MISSING";
    case ReceiptStatus::Mismatch: return "MISMATCH";
    case ReceiptStatus::BadSignature: return "BAD_SIGNATURE";
    case ReceiptStatus::NotIncluded: return "NOT_INCLUDED";
  }
  return "?";
}

ReceiptCheck check_receipt(const capture::PreferenceReceipt& pr, const std::vector<wbb::ItemPtr>& log,
                           const wbb::CheckpointFile& checkpoints) {
  const wbb::WbbItem* vote = nullptr;
  for (const auto& it : log)
    if (it->kind == wbb::ItemKind::VoteCast && it->serial == pr.serial) vote = it.get();
  if (!vote) return {ReceiptStatus::Missing, "no vote published for serial " + pr.serial};

  const auto& r = pr.receipt;
  if (r.serial != pr.serial || r.kind != wbb::ItemKind::VoteCast)
    return {ReceiptStatus::Mismatch, "receipt names a different item"};
  if (!wbb::verify_receipt(r, checkpoints.peers))
    return {ReceiptStatus::BadSignature, "fewer than " + std::to_string(checkpoints.peers.threshold) +
                                             " valid peer signatures"};
  if (r.seq != vote->seq || r.item_hash != vote->hash || r.payload_hash != vote->payload_hash)
    return {ReceiptStatus::Mismatch, "receipt does not match published item " + std::to_string(vote->seq)};

  try {
    const auto params = params_from_log(log);
    const auto published = protocol::decode_vote(params.manifest.packing, vote->payload);
    if (published.races != pr.races)
      return {ReceiptStatus::Mismatch, "published ranks differ from the receipt"};
  } catch (const Error& e) {
    return {ReceiptStatus::Mismatch, std::string("published vote unreadable: ") + e.what()};
  }

  const auto* cp = covering(checkpoints, vote->seq);
  if (!cp || cp->first_seq + cp->count - 1 > log.size())
    return {ReceiptStatus::NotIncluded, "item " + std::to_string(vote->seq) + " is not under a checkpoint"};
  std::vector<crypto::Digest> hashes;
  for (auto s = cp->first_seq; s < cp->first_seq + cp->count; ++s) hashes.push_back(log[s - 1]->hash);
  const auto index = vote->seq - cp->first_seq;
  wbb::InclusionProof proof{cp->period, index, wbb::inclusion_path(hashes, index)};
  if (!wbb::verify_inclusion(*vote, proof, *cp) ||
      wbb::count_valid_signatures(cp->signing_bytes(), cp->signatures, checkpoints.peers) < checkpoints.peers.threshold)
    return {ReceiptStatus::NotIncluded, "inclusion in checkpoint " + std::to_string(cp->period) + " fails"};
  return {};
}

ElectionVerifier::ElectionVerifier(std::vector<wbb::ItemPtr> log, wbb::CheckpointFile checkpoints)
    : log_(std::move(log)), checkpoints_(std::move(checkpoints)) {
  for (const auto& name : kCheckOrder) report_.check(name);

  auto& chain = report_.check("chain");
  auto cr = wbb::verify_chain(log_, checkpoints_);
  chain.checked = log_.size() + checkpoints_.checkpoints.size();
  for (auto& p : cr.problems) chain.fail(std::move(p));
  if (!cr.ok && cr.problems.empty()) chain.fail("chain verification failed");
  if (!checkpoints_.checkpoints.empty()) final_checkpoint_ = checkpoints_.checkpoints.back().hash();

  try {
    params_ = std::make_unique<protocol::ElectionParams>(params_from_log(log_));
  } catch (const Error& e) {
    chain.fail(std::string("election parameters: ") + e.what());
    for (const auto& name : {"audits", "mix", "decryption", "export"})
      report_.check(name).fail("no usable election parameters");
    return;
  }
  const auto& m = params_->manifest;
  const auto eg = params_->elgamal();
  table_ = std::make_unique<crypto::DecodeTable>(*params_->group, params_->table_bound());

  auto& audits = report_.check("audits");
  std::unordered_map<std::string, const wbb::WbbItem*> commits;
  for (const auto& it : log_) {
    if (it->kind == wbb::ItemKind::BallotCommit) commits.emplace(it->serial, it.get());
    if (it->kind != wbb::ItemKind::BallotAudit) continue;
    ++audits.checked;
    const auto at = "item " + std::to_string(it->seq) + " (audit of " + it->serial + "): ";
    auto c = commits.find(it->serial);
    if (c == commits.end()) {
      audits.fail(at + "no commitment");
      continue;
    }
    try {
      auto opening = protocol::decode_audit(*params_->group, it->payload);
      auto commit = protocol::decode_commit(*params_->group, c->second->payload);
      std::vector<ballot::PrintedRace> printed;
      for (const auto& r : opening.races) printed.push_back({r.race, r.printed});
      if (opening.serial != it->serial || opening.manifest_digest != m.digest())
        audits.fail(at + "opening names a different ballot or manifest");
      else if (!ballot::verify_audit(m, eg, printed, opening, commit))
        audits.fail(at + "opening does not match the commitment");
    } catch (const Error& e) {
      audits.fail(at + e.what());
    }
  }

  try {
    inputs_ = tally::build_mix_input(log_, *params_);
  } catch (const Error& e) {
    report_.check("mix").fail(std::string("mix input: ") + e.what());
  }
  for (const auto& race : m.races) races_done_[race.id] = false;
  decrypted_[kDistrictHouse];
  decrypted_[kRegionHouse];
}

void ElectionVerifier::check_receipts(const std::vector<capture::PreferenceReceipt>& receipts) {
  auto& out = report_.check("receipts");
  for (const auto& pr : receipts) {
    ++out.checked;
    auto r = check_receipt(pr, log_, checkpoints_);
    if (!r.ok()) out.fail("receipt " + pr.serial + ": " + std::string(to_string(r.status)) + ": " + r.detail);
  }
}

void ElectionVerifier::check_race(const std::string& race_id, const tally::MixTranscript* transcript,
                                  const tally::DecryptionRecord* decryption) {
  if (!params_) return;
  auto& mix = report_.check("mix");
  auto& dec = report_.check("decryption");
  const auto* race = params_->manifest.find_race(race_id);
  if (!race) {
    mix.fail("transcript for unknown race " + race_id);
    return;
  }
  races_done_[race_id] = true;
  auto in = inputs_.races.find(race_id);
  if (in == inputs_.races.end()) return;  // mix input already failed
  auto batch = std::move(in->second);
  inputs_.races.erase(in);

  ++mix.checked;
  if (!transcript) {
    mix.fail("race " + race_id + ": no mix transcript");
    return;
  }
  const auto eg = params_->elgamal();
  if (transcript->race != race_id || transcript->width != batch.width) {
    mix.fail("race " + race_id + ": transcript is for a different race or width");
    return;
  }
  if (transcript->stages.size() < params_->mix_stages)
    mix.fail("race " + race_id + ": " + std::to_string(transcript->stages.size()) + " stages, election requires " +
             std::to_string(params_->mix_stages));
  if (auto why = tally::check_mix(batch, *transcript, eg, final_checkpoint_); !why.empty())
    mix.fail("race " + race_id + ": " + why);
  batch.rows.clear();
  batch.rows.shrink_to_fit();

  ++dec.checked;
  if (!decryption) {
    dec.fail("race " + race_id + ": no decryption record");
    return;
  }
  if (decryption->race != race_id) {
    dec.fail("race " + race_id + ": decryption record is for " + decryption->race);
    return;
  }
  if (transcript->stages.empty()) {
    dec.fail("race " + race_id + ": transcript has no output");
    return;
  }
  if (auto why = tally::check_decryption(*params_->group, transcript->output(), *decryption, params_->keys, *table_);
      !why.empty()) {
    dec.fail("race " + race_id + ": " + why);
    return;
  }
  auto& records = decrypted_[house_of(*race)];
  for (std::size_t i = 0; i < decryption->rows.size(); ++i) {
    try {
      records.push_back(tally::decode_record(*race, decryption->rows[i].plaintexts, params_->manifest.packing));
    } catch (const Error& e) {
      dec.fail("race " + race_id + " row " + std::to_string(i) + ": " + e.what());
    }
  }
}

void ElectionVerifier::check_exports(const std::map<std::string, std::string>& exports) {
  if (!params_) return;
  auto& out = report_.check("export");
  for (auto& [house, records] : decrypted_) {
    const auto file = "export_" + house + ".csv";
    ++out.checked;
    auto e = exports.find(house);
    if (e == exports.end()) {
      out.fail(file + ": missing");
      continue;
    }
    std::vector<tally::ExportLine> lines;
    try {
      lines = tally::parse_export(e->second);
    } catch (const Error& err) {
      out.fail(file + ": " + err.what());
      continue;
    }
    bool dense = true;
    for (std::size_t i = 0; i < lines.size() && dense; ++i) {
      if (lines[i].line != i + 1) {
        out.fail(file + ": line numbers jump from " + std::to_string(i) + " to " + std::to_string(lines[i].line) +
                 " (line " + std::to_string(i + 1) + " missing)");
        dense = false;
      }
    }
    for (const auto& l : lines) {
      const auto* race = params_->manifest.find_race(l.record.race);
      if (!race || house_of(*race) != house) {
        out.fail(file + ": line " + std::to_string(l.line) + " names race " + l.record.race + " outside this house");
        break;
      }
    }

    std::vector<tally::VoteRecord> published;
    published.reserve(lines.size());
    for (auto& l : lines) published.push_back(std::move(l.record));
    std::sort(published.begin(), published.end());
    std::sort(records.begin(), records.end());
    std::vector<tally::VoteRecord> missing, extra;
    std::set_difference(records.begin(), records.end(), published.begin(), published.end(),
                        std::back_inserter(missing));
    std::set_difference(published.begin(), published.end(), records.begin(), records.end(),
                        std::back_inserter(extra));
    if (!missing.empty())
      out.fail(file + ": " + std::to_string(missing.size()) + " decrypted votes not exported, first " +
               missing.front().race + " [" + missing.front().key() + "]");
    if (!extra.empty())
      out.fail(file + ": " + std::to_string(extra.size()) + " exported votes not among the decryptions, first " +
               extra.front().race + " [" + extra.front().key() + "]");
    if (missing.empty() && extra.empty() && dense && tally::export_votes(records) != e->second)
      out.fail(file + ": not in canonical order");
    records.clear();
    records.shrink_to_fit();
  }
}

VerificationReport ElectionVerifier::finish() {
  if (params_) {
    for (const auto& [race, done] : races_done_)
      if (!done) report_.check("mix").fail("race " + race + ": no mix transcript");
  }
  return std::move(report_);
}

VerificationReport verify_election(const PublishedArtifacts& a, const std::vector<capture::PreferenceReceipt>& receipts) {
  ElectionVerifier v(a.log, a.checkpoints);
  v.check_receipts(receipts);
  if (v.params()) {
    for (const auto& race : v.params()->manifest.races) {
      auto t = a.transcripts.find(race.id);
      auto d = a.decryptions.find(race.id);
      v.check_race(race.id, t == a.transcripts.end() ? nullptr : &t->second,
                   d == a.decryptions.end() ? nullptr : &d->second);
    }
    for (const auto& [race, t] : a.transcripts)
      if (!v.params()->manifest.find_race(race)) v.check_race(race, &t, nullptr);
    v.check_exports(a.exports);
  }
  return v.finish();
}

double detection_confidence(const ConfidenceQuery& q) {
  require(q.rate >= 0 && q.rate <= 1, ErrorCode::Parameter, "rate must lie in [0, 1]");
  auto k = q.changes;
  if (k == 0 && q.margin) k = min_changes_to_flip(*q.margin);
  if (k == 0) return 0;
  return 1 - std::pow(1 - q.rate, static_cast<double>(k));
}

double detection_monte_carlo(const ConfidenceQuery& q, std::uint64_t trials, crypto::Drbg& rng) {
  require(q.rate >= 0 && q.rate <= 1, ErrorCode::Parameter, "rate must lie in [0, 1]");
  require(trials > 0, ErrorCode::Parameter, "need at least one trial");
  auto k = q.changes;
  if (k == 0 && q.margin) k = min_changes_to_flip(*q.margin);
  std::uint64_t detected = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    bool caught = false;
    for (std::uint64_t i = 0; i < k && !caught; ++i) caught = rng.bernoulli(q.rate);
    detected += caught;
  }
  return static_cast<double>(detected) / static_cast<double>(trials);
}

std::uint64_t min_changes_to_flip(std::uint64_t margin) { return (margin + 2) / 2; }

}  // namespace vvote::verify
