#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vvote/election/manifest.hpp"
#include "vvote/election/preferences.hpp"

namespace vvote::tally {

inline constexpr std::string_view kDuplicateMark = "*";

/// A decrypted vote: per rank, the candidate id, "" if no position had that
/// rank, or "*" if several did.
struct VoteRecord {
  std::string race;
  std::vector<std::string> prefs;

  /// Preference fields joined by commas, trailing blanks trimmed.
  std::string key() const;
  friend bool operator==(const VoteRecord&, const VoteRecord&) = default;
  friend auto operator<=>(const VoteRecord& a, const VoteRecord& b) {
    if (auto c = a.race <=> b.race; c != 0) return c;
    return a.key() <=> b.key();
  }
};

/// Unpacks the plaintexts of one row. Decode error for slot values that
/// name no candidate.
VoteRecord decode_record(const election::Race& race, const std::vector<std::uint64_t>& plaintexts,
                         const election::PackingRules& packing);

/// Formality of a decrypted vote; agrees with check_formality on the cast marks.
election::FormalityVerdict record_formality(const VoteRecord& v, const election::Race& race,
                                            const election::FormalityRules& rules);

/// Candidate ids in preference order, for counting. Empty if the vote has
/// a duplicate before its first gap.
std::vector<std::string> preference_list(const VoteRecord& v);

struct ExportLine {
  std::uint64_t line = 0;
  VoteRecord record;
};

/// CSV `line_no,race_id,pref_1,...`: records sorted by (race, preference
/// string), numbered densely from 1.
std::string export_votes(const std::vector<VoteRecord>& records);
/// Parses an export without judging its numbering. Format on bad lines.
std::vector<ExportLine> parse_export(std::string_view csv);

}  // namespace vvote::tally
