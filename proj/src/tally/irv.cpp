#include "vvote/tally/irv.hpp"

#include <set>

#include "vvote/error.hpp"

namespace vvote::tally {

using nlohmann::json;

double TallyResult::formal_proportion() const {
  const auto total = formal + informal;
  return total ? static_cast<double>(formal) / static_cast<double>(total) : 1.0;
}

RaceResult tally_irv(const election::Race& race, const std::vector<std::vector<std::string>>& ballots) {
  RaceResult res;
  res.race = race.id;
  res.kind = race.kind;
  res.formal = ballots.size();
  std::set<std::string> continuing;
  for (const auto& c : race.candidates) {
    continuing.insert(c.id);
    res.first_preferences[c.id] = 0;
  }
  for (const auto& b : ballots) {
    for (const auto& id : b) require(continuing.count(id), ErrorCode::Parameter, "ballot names unknown candidate " + id);
    if (!b.empty()) ++res.first_preferences[b.front()];
  }
  if (ballots.empty() || continuing.empty()) return res;

  while (true) {
    IrvRound round;
    for (const auto& c : continuing) round.totals[c] = 0;
    for (const auto& b : ballots) {
      for (const auto& id : b) {
        if (continuing.count(id)) {
          ++round.totals[id];
          ++round.continuing;
          break;
        }
      }
    }
    std::string leader;
    std::uint64_t best = 0, second = 0;
    for (const auto& [id, v] : round.totals) {
      if (leader.empty() || v > best) {
        second = leader.empty() ? 0 : best;
        leader = id;
        best = v;
      } else if (v > second) {
        second = v;
      }
    }
    if (continuing.size() == 1 || 2 * best > round.continuing) {
      res.winner = leader;
      res.margin = best - second;
      res.rounds.push_back(std::move(round));
      return res;
    }
    std::string loser;
    for (const auto& [id, v] : round.totals) {
      if (loser.empty()) {
        loser = id;
        continue;
      }
      const auto lv = round.totals[loser];
      if (v < lv || (v == lv && res.first_preferences[id] < res.first_preferences[loser])) loser = id;
      // equal on both counts: the map order already keeps the smaller id
    }
    round.eliminated = loser;
    continuing.erase(loser);
    res.rounds.push_back(std::move(round));
  }
}

RaceResult tally_race(const election::Race& race, const std::vector<VoteRecord>& records,
                      const election::FormalityRules& rules) {
  std::vector<std::vector<std::string>> ballots;
  std::uint64_t informal = 0;
  for (const auto& r : records) {
    if (r.race != race.id) continue;
    if (record_formality(r, race, rules).formal) ballots.push_back(preference_list(r));
    else ++informal;
  }
  RaceResult res;
  if (race.kind == election::RaceKind::District) {
    res = tally_irv(race, ballots);
  } else {
    res.race = race.id;
    res.kind = race.kind;
    res.formal = ballots.size();
    for (const auto& c : race.candidates) res.first_preferences[c.id] = 0;
    for (const auto& b : ballots) ++res.first_preferences[b.front()];
  }
  res.informal = informal;
  return res;
}

void TallyResult::add(RaceResult r) {
  formal += r.formal;
  informal += r.informal;
  races.push_back(std::move(r));
}

TallyResult tally(const election::ElectionManifest& m, const std::vector<VoteRecord>& records) {
  for (const auto& r : records) m.race(r.race);
  TallyResult out;
  for (const auto& race : m.races) out.add(tally_race(race, records, m.formality));
  return out;
}

json to_json(const TallyResult& t) {
  json races = json::array();
  for (const auto& r : t.races) {
    json rounds = json::array();
    for (const auto& round : r.rounds) {
      json jr = {{"totals", round.totals}, {"continuing", round.continuing}};
      if (round.eliminated) jr["eliminated"] = *round.eliminated;
      rounds.push_back(jr);
    }
    json jr = {{"race", r.race},
               {"kind", std::string(election::to_string(r.kind))},
               {"formal", r.formal},
               {"informal", r.informal},
               {"first_preferences", r.first_preferences},
               {"rounds", rounds},
               {"margin", r.margin}};
    jr["winner"] = r.winner ? json(*r.winner) : json(nullptr);
    races.push_back(jr);
  }
  return {{"formal", t.formal}, {"informal", t.informal}, {"formal_proportion", t.formal_proportion()}, {"races", races}};
}

}  // namespace vvote::tally
