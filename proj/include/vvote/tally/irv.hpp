#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vvote/election/manifest.hpp"
#include "vvote/tally/export.hpp"

namespace vvote::tally {

struct IrvRound {
  std::map<std::string, std::uint64_t> totals;  // continuing candidates only
  std::uint64_t continuing = 0;                 // ballots counting for someone
  std::optional<std::string> eliminated;
};

struct RaceResult {
  std::string race;
  election::RaceKind kind = election::RaceKind::District;
  std::uint64_t formal = 0;
  std::uint64_t informal = 0;
  std::map<std::string, std::uint64_t> first_preferences;
  std::vector<IrvRound> rounds;  // district races only
  std::optional<std::string> winner;
  std::uint64_t margin = 0;  // winner minus runner-up in the deciding round
};

struct TallyResult {
  std::vector<RaceResult> races;
  std::uint64_t formal = 0;
  std::uint64_t informal = 0;

  double formal_proportion() const;
  void add(RaceResult r);
};

/// Instant runoff: a candidate with more than half of the continuing
/// ballots wins; otherwise the lowest is eliminated. Ties for lowest go to
/// the fewest first preferences, then the lexicographically smallest id.
RaceResult tally_irv(const election::Race& race, const std::vector<std::vector<std::string>>& ballots);

/// One race's result; records of other races are ignored.
RaceResult tally_race(const election::Race& race, const std::vector<VoteRecord>& records,
                      const election::FormalityRules& rules);

/// Judges formality per record and counts formal votes: IRV for district
/// races, first preferences for region races.
TallyResult tally(const election::ElectionManifest& m, const std::vector<VoteRecord>& records);

nlohmann::json to_json(const TallyResult& t);

}  // namespace vvote::tally
