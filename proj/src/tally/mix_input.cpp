#include "vvote/tally/mix_input.hpp"

#include <unordered_map>
#include <unordered_set>

#include "vvote/error.hpp"

namespace vvote::tally {

std::vector<crypto::Ciphertext> preference_ordered(const std::vector<crypto::Ciphertext>& onion,
                                                   const std::vector<std::uint32_t>& ranks) {
  require(onion.size() == ranks.size(), ErrorCode::Parameter, "rank vector and onion differ in length");
  std::uint32_t top = 0;
  for (auto r : ranks) top = std::max(top, r);
  std::vector<crypto::Ciphertext> out;
  for (std::uint32_t k = 1; k <= top; ++k)
    for (std::size_t i = 0; i < ranks.size(); ++i)
      if (ranks[i] == k) out.push_back(onion[i]);
  return out;
}

std::size_t row_width(std::size_t candidates, const election::PackingRules& p) {
  return (candidates + p.slots_per_plaintext - 1) / p.slots_per_plaintext;
}

Row encode_row(const crypto::ElGamal& eg, const election::PackingRules& p, const std::vector<crypto::Ciphertext>& onion,
               const std::vector<std::uint32_t>& ranks) {
  const std::size_t n = onion.size();
  require(ranks.size() == n, ErrorCode::Parameter, "rank vector and onion differ in length");
  std::vector<std::size_t> holder(n + 1, n);  // rank -> position, n = none
  std::vector<bool> duplicate(n + 1, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = ranks[i];
    if (r == 0) continue;
    require(r <= n, ErrorCode::Validation, "rank " + std::to_string(r) + " beyond " + std::to_string(n) + " positions");
    if (holder[r] != n) duplicate[r] = true;
    holder[r] = i;
  }
  const auto d = p.slots_per_plaintext;
  Row row;
  for (std::size_t first = 1; first <= n; first += d) {
    std::uint64_t constant = 0;  // plaintext contribution of the marker slots
    std::uint64_t weight = 1;
    crypto::Ciphertext acc = eg.trivial(0);
    for (std::size_t k = first; k < first + d && k <= n; ++k, weight *= p.slot_base) {
      if (duplicate[k]) {
        constant += duplicate_slot(p) * weight;
      } else if (holder[k] != n) {
        constant += weight;  // canonical index + 1
        acc = eg.multiply(acc, weight == 1 ? onion[holder[k]] : eg.power(onion[holder[k]], weight));
      }
    }
    row.push_back(eg.multiply(acc, eg.trivial(constant)));
  }
  return row;
}

crypto::Digest batch_hash(const crypto::Group& g, const std::vector<Row>& rows) {
  crypto::Hasher h("vvote/batch");
  h.field(static_cast<std::uint64_t>(rows.size()));
  for (const auto& row : rows) {
    h.field(static_cast<std::uint64_t>(row.size()));
    for (const auto& c : row) h.field(g.encode(c.a)).field(g.encode(c.b));
  }
  return h.finish();
}

MixInputs build_mix_input(const std::vector<wbb::ItemPtr>& log, const protocol::ElectionParams& params) {
  const auto& m = params.manifest;
  const auto& g = *params.group;
  const auto digest = m.digest();
  const auto eg = params.elgamal();

  MixInputs out;
  for (const auto& race : m.races) out.races[race.id] = {race.id, row_width(race.size(), m.packing), {}};

  std::unordered_map<std::string, const wbb::WbbItem*> commits;
  std::unordered_set<std::string> quarantined;
  for (const auto& it : log) {
    if (it->kind == wbb::ItemKind::BallotCommit) commits.emplace(it->serial, it.get());
    else if (it->kind == wbb::ItemKind::Quarantine) quarantined.insert(it->serial);
  }

  for (const auto& it : log) {
    if (it->kind != wbb::ItemKind::VoteCast) continue;
    if (quarantined.count(it->serial)) {
      ++out.excluded;
      continue;
    }
    const auto at = "item " + std::to_string(it->seq) + ": ";
    auto c = commits.find(it->serial);
    require(c != commits.end(), ErrorCode::Validation, at + "vote without a commitment");
    protocol::VotePayload vote;
    protocol::CommitPayload commit;
    try {
      vote = protocol::decode_vote(m.packing, it->payload);
      commit = protocol::decode_commit(g, c->second->payload);
    } catch (const Error& e) {
      fail(ErrorCode::Validation, at + e.what());
    }
    require(vote.serial == it->serial && commit.serial == it->serial, ErrorCode::Validation, at + "serial mismatch");
    require(vote.manifest_digest == digest, ErrorCode::Validation, at + "vote cast against a different manifest");
    require(vote.races.size() == commit.races.size(), ErrorCode::Validation, at + "race count differs from commitment");
    for (std::size_t k = 0; k < vote.races.size(); ++k) {
      const auto& vr = vote.races[k];
      const auto& cr = commit.races[k];
      const auto* race = m.find_race(vr.race);
      require(race && vr.race == cr.race, ErrorCode::Validation, at + "race " + vr.race + " does not match commitment");
      require(vr.ranks.size() == race->size() && cr.onion.size() == race->size(), ErrorCode::Validation,
              at + "wrong length for " + vr.race);
      try {
        out.races[vr.race].rows.push_back(encode_row(eg, m.packing, cr.onion, vr.ranks));
      } catch (const Error& e) {
        fail(ErrorCode::Validation, at + e.what());
      }
    }
    ++out.votes;
  }
  return out;
}

}  // namespace vvote::tally
