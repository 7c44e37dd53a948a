#include "vvote/ballot/ballot_service.hpp"

#include <numeric>
#include <sstream>

#include "vvote/error.hpp"

namespace vvote::ballot {

using nlohmann::json;

std::string_view to_string(BallotStatus s) {
  switch (s) {
    case BallotStatus::Unused: return "UNUSED";
    case BallotStatus::Voted: return "VOTED";
    case BallotStatus::Audited: return "AUDITED";
    case BallotStatus::Quarantined: return "QUARANTINED";
  }
  return "?";
}

bool BallotRecord::randomness_erased() const {
  for (const auto& r : races)
    if (!r.randomness.empty()) return false;
  return true;
}

namespace {

json printed_to_json(const std::vector<PrintedRace>& races) {
  json out = json::array();
  for (const auto& r : races) out.push_back({{"race", r.race}, {"printed", r.candidate_ids}});
  return out;
}

json qr_body(const QrPayload& p) {
  return {{"serial", p.serial}, {"manifest_digest", p.manifest_digest}, {"wbb", p.wbb_endpoint},
          {"races", printed_to_json(p.races)}};
}

RaceBallot make_race(const election::Race& race, const crypto::ElGamal& eg, crypto::Drbg& rng) {
  RaceBallot rb;
  rb.race = race.id;
  const auto n = static_cast<std::uint32_t>(race.size());
  rb.permutation.resize(n);
  std::iota(rb.permutation.begin(), rb.permutation.end(), 0u);
  for (std::uint32_t i = n; i > 1; --i) std::swap(rb.permutation[i - 1], rb.permutation[rng.uniform(i)]);
  for (std::uint32_t i = 0; i < n; ++i) {
    rb.printed.push_back(race.candidates[rb.permutation[i]].id);
    rb.randomness.push_back(eg.group().random_scalar(rng));
    rb.onion.push_back(eg.encrypt(rb.permutation[i], rb.randomness.back()));
  }
  return rb;
}

}  // namespace

std::string qr_encode(QrPayload payload, const crypto::SigningKey& key) {
  auto body = qr_body(payload).dump();
  payload.signature = key.sign(body);
  json j = qr_body(payload);
  j["signature"] = crypto::signature_to_hex(payload.signature);
  return to_base64(as_bytes(j.dump()));
}

QrPayload qr_decode(std::string_view qr, const crypto::PublicSigningKey& key) {
  require(!qr.empty(), ErrorCode::Format, "empty QR payload");
  auto raw = from_base64(qr);
  auto j = protocol::parse_json(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()), "QR payload");
  QrPayload p;
  try {
    p.serial = j.at("serial").get<std::string>();
    p.manifest_digest = j.at("manifest_digest").get<std::string>();
    p.wbb_endpoint = j.at("wbb").get<std::string>();
    for (const auto& r : j.at("races"))
      p.races.push_back({r.at("race").get<std::string>(), r.at("printed").get<std::vector<std::string>>()});
    p.signature = crypto::signature_from_hex(j.at("signature").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("QR payload: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::Format, std::string("QR payload: ") + e.what());
  }
  require(crypto::verify_signature(key, qr_body(p).dump(), p.signature), ErrorCode::Signature,
          "QR signature does not verify");
  return p;
}

std::string PrintedCandidateList::render_text() const {
  std::ostringstream out;
  out << "Serial " << serial << "\n";
  for (std::size_t r = 0; r < races.size(); ++r) {
    out << races[r].race << "\n";
    for (std::size_t i = 0; i < races[r].candidate_ids.size(); ++i) {
      out << "  " << (i + 1) << ". " << (r < names.size() && i < names[r].size() ? names[r][i] : "") << " ["
          << races[r].candidate_ids[i] << "]\n";
    }
  }
  out << "QR " << qr << "\n";
  return out.str();
}

BallotRecord generate_ballot(const election::ElectionManifest& m, const crypto::ElGamal& eg,
                             const std::string& district_id, crypto::Drbg& rng) {
  const auto& district = m.district(district_id);
  std::array<std::uint8_t, 16> serial{};
  rng.fill(serial);
  BallotRecord b;
  b.serial = to_hex(serial);
  b.races.push_back(make_race(m.district_race(district.id), eg, rng));
  b.races.push_back(make_race(m.region_race(district.region), eg, rng));
  return b;
}

protocol::CommitPayload commitment_of(const BallotRecord& b, const std::string& manifest_digest) {
  protocol::CommitPayload c{b.serial, manifest_digest, {}};
  for (const auto& r : b.races) c.races.push_back({r.race, r.onion});
  return c;
}

AuditOpening opening_of(const BallotRecord& b, const std::string& manifest_digest) {
  AuditOpening o{b.serial, manifest_digest, {}};
  for (const auto& r : b.races) o.races.push_back({r.race, r.permutation, r.randomness, r.printed});
  return o;
}

bool verify_audit(const election::ElectionManifest& m, const crypto::ElGamal& eg,
                  const std::vector<PrintedRace>& printed, const AuditOpening& opening,
                  const protocol::CommitPayload& commitment) {
  if (opening.serial != commitment.serial || opening.races.size() != commitment.races.size() ||
      printed.size() != opening.races.size())
    return false;
  for (std::size_t k = 0; k < opening.races.size(); ++k) {
    const auto& o = opening.races[k];
    const auto& c = commitment.races[k];
    if (o.race != c.race || printed[k].race != o.race || printed[k].candidate_ids != o.printed) return false;
    const auto* race = m.find_race(o.race);
    if (!race) return false;
    const auto n = race->size();
    if (o.permutation.size() != n || o.randomness.size() != n || o.printed.size() != n || c.onion.size() != n)
      return false;
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = o.permutation[i];
      if (p >= n || used[p]) return false;
      used[p] = true;
      if (race->candidates[p].id != o.printed[i]) return false;
      if (!eg.group().is_canonical(o.randomness[i])) return false;
      if (!(eg.encrypt(p, o.randomness[i]) == c.onion[i])) return false;
    }
  }
  return true;
}

BallotService::BallotService(const protocol::ElectionParams& params, wbb::BulletinBoard& board,
                             const std::string& key_seed, const std::string& rng_seed)
    : params_(params),
      elgamal_(params.elgamal()),
      board_(board),
      key_(crypto::SigningKey::from_seed(key_seed)),
      digest_(params.manifest.digest()),
      rng_(std::string_view(rng_seed)) {
  require(key_.public_key() == params.ballot_key, ErrorCode::Parameter,
          "ballot signing key does not match the published key");
  board_.subscribe([this](const wbb::WbbItem& item) { on_item(item); });
}

void BallotService::on_item(const wbb::WbbItem& item) {
  if (item.kind != wbb::ItemKind::VoteCast && item.kind != wbb::ItemKind::Quarantine) return;
  std::lock_guard lock(mu_);
  auto it = records_.find(item.serial);
  if (it == records_.end()) return;
  it->second.races.clear();
  it->second.races.shrink_to_fit();
}

IssuedBallot BallotService::issue(const std::string& district_id) {
  crypto::Drbg rng = [&] {
    std::lock_guard lock(mu_);
    return rng_.fork("ballot/" + std::to_string(issued_++));
  }();
  BallotRecord record = generate_ballot(params_.manifest, elgamal_, district_id, rng);

  if (misprint_ && record.races[0].printed.size() >= 2) std::swap(record.races[0].printed[0], record.races[0].printed[1]);

  // no candidate list leaves the service without a commitment on the board
  auto receipt = board_.append(wbb::ItemKind::BallotCommit, record.serial,
                               protocol::encode_commit(elgamal_.group(), commitment_of(record, digest_)));

  PrintedCandidateList cl;
  cl.serial = record.serial;
  for (const auto& r : record.races) {
    cl.races.push_back({r.race, r.printed});
    const auto& race = params_.manifest.race(r.race);
    std::vector<std::string> names;
    for (const auto& id : r.printed) names.push_back(race.candidates[race.candidate_index(id)].name);
    cl.names.push_back(std::move(names));
  }
  cl.qr = qr_encode({record.serial, digest_, params_.wbb_endpoint, cl.races, {}}, key_);

  for (auto& r : record.races) {
    r.onion.clear();
    r.onion.shrink_to_fit();
  }
  {
    std::lock_guard lock(mu_);
    records_.emplace(record.serial, std::move(record));
  }
  return {std::move(cl), std::move(receipt)};
}

AuditOpening BallotService::audit(const std::string& serial) {
  AuditOpening opening;
  {
    std::lock_guard lock(mu_);
    auto it = records_.find(serial);
    require(it != records_.end(), ErrorCode::NotFound, "unknown serial " + serial);
    auto state = board_.serial_state(serial);
    require(state && !state->voted, ErrorCode::Conflict, "serial " + serial + " has voted; auditing would expose the vote");
    require(!state->audited, ErrorCode::Conflict, "serial " + serial + " already audited");
    require(!state->quarantined, ErrorCode::Conflict, "serial " + serial + " is quarantined");
    require(!it->second.randomness_erased(), ErrorCode::Conflict, "randomness for " + serial + " has been erased");
    opening = opening_of(it->second, digest_);
  }
  board_.append(wbb::ItemKind::BallotAudit, serial, protocol::encode_audit(elgamal_.group(), opening));
  return opening;
}

BallotStatus BallotService::status(const std::string& serial) const {
  auto state = board_.serial_state(serial);
  require(state && state->committed, ErrorCode::NotFound, "unknown serial " + serial);
  if (state->quarantined) return BallotStatus::Quarantined;
  if (state->voted) return BallotStatus::Voted;
  if (state->audited) return BallotStatus::Audited;
  return BallotStatus::Unused;
}

std::optional<BallotRecord> BallotService::record(const std::string& serial) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(serial);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::size_t BallotService::ballots() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

}  // namespace vvote::ballot
