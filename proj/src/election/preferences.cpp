#include "vvote/election/preferences.hpp"

#include <algorithm>

#include "vvote/error.hpp"

namespace vvote::election {

std::string_view to_string(VoteMode mode) {
  switch (mode) {
    case VoteMode::Atl: return "ATL";
    case VoteMode::Btl: return "BTL";
    case VoteMode::District: return "DISTRICT";
  }
  return "?";
}

VoteMode vote_mode_from_string(std::string_view s) {
  if (s == "ATL") return VoteMode::Atl;
  if (s == "BTL") return VoteMode::Btl;
  if (s == "DISTRICT") return VoteMode::District;
  fail(ErrorCode::Format, "unknown vote mode '" + std::string(s) + "'");
}

nlohmann::json to_json(const PreferenceVector& v) {
  nlohmann::json j = {{"race", v.race}, {"mode", std::string(to_string(v.mode))}};
  if (v.mode == VoteMode::Atl) j["groups"] = v.atl_groups;
  else j["ranks"] = v.ranks;
  return j;
}

PreferenceVector preference_vector_from_json(const nlohmann::json& j) {
  try {
    PreferenceVector v;
    v.race = j.at("race").get<std::string>();
    v.mode = vote_mode_from_string(j.at("mode").get<std::string>());
    if (v.mode == VoteMode::Atl) v.atl_groups = j.at("groups").get<std::vector<std::uint32_t>>();
    else v.ranks = j.at("ranks").get<std::vector<std::uint32_t>>();
    return v;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("preference vector: ") + e.what());
  }
}

std::string_view to_string(FormalityReason reason) {
  switch (reason) {
    case FormalityReason::Ok: return "OK";
    case FormalityReason::SinglePreferenceDistrict: return "SINGLE_PREFERENCE_DISTRICT";
    case FormalityReason::GapOrDuplicate: return "GAP_OR_DUPLICATE";
    case FormalityReason::Empty: return "EMPTY";
    case FormalityReason::MultipleAtl: return "MULTIPLE_ATL";
  }
  return "?";
}

PreferenceVector PreferenceVector::district(std::string race, std::vector<std::uint32_t> ranks) {
  return {std::move(race), VoteMode::District, {}, std::move(ranks)};
}
PreferenceVector PreferenceVector::btl(std::string race, std::vector<std::uint32_t> ranks) {
  return {std::move(race), VoteMode::Btl, {}, std::move(ranks)};
}
PreferenceVector PreferenceVector::atl(std::string race, std::uint32_t group) {
  return {std::move(race), VoteMode::Atl, {group}, {}};
}

namespace {

constexpr FormalityVerdict kFormal{true, FormalityReason::Ok};
FormalityVerdict informal(FormalityReason r) { return {false, r}; }

}  // namespace

FormalityVerdict check_formality(const PreferenceVector& v, const Race& race, const FormalityRules& rules) {
  require(v.race == race.id, ErrorCode::Parameter, "preferences for " + v.race + " checked against " + race.id);
  const bool district = race.kind == RaceKind::District;
  require(district == (v.mode == VoteMode::District), ErrorCode::Parameter,
          std::string(to_string(v.mode)) + " vote in a " + std::string(to_string(race.kind)) + " race");
  const std::size_t n = race.size();

  if (v.mode == VoteMode::Atl) {
    for (auto g : v.atl_groups) require(g < race.groups.size(), ErrorCode::Parameter, "unknown ATL group");
    if (v.atl_groups.empty()) return informal(FormalityReason::Empty);
    if (v.atl_groups.size() > 1) return informal(FormalityReason::MultipleAtl);
    return kFormal;
  }

  require(v.ranks.size() == n, ErrorCode::Parameter, "rank vector length does not match race " + race.id);
  std::vector<std::uint32_t> seen(n + 1, 0);  // seen[k] = positions holding rank k (k <= n)
  std::size_t marked = 0;
  bool out_of_range = false;
  for (auto r : v.ranks) {
    if (r == 0) continue;
    ++marked;
    if (r > n) {
      out_of_range = true;
    } else {
      ++seen[r];
    }
  }
  if (marked == 0) return informal(FormalityReason::Empty);
  const bool duplicate = std::any_of(seen.begin(), seen.end(), [](auto c) { return c > 1; });

  if (district) {
    if (marked == 1 && n > 1 && seen[1] == 1) return informal(FormalityReason::SinglePreferenceDistrict);
    if (marked != n || out_of_range || duplicate) return informal(FormalityReason::GapOrDuplicate);
    return kFormal;  // n distinct ranks each in 1..n
  }

  if (duplicate || out_of_range) return informal(FormalityReason::GapOrDuplicate);
  const std::size_t needed = std::min<std::size_t>(rules.btl_minimum, n);
  for (std::size_t k = 1; k <= needed; ++k)
    if (seen[k] == 0) return informal(FormalityReason::GapOrDuplicate);
  return kFormal;
}

std::vector<std::uint32_t> atl_expand(std::uint32_t group, const Race& race) {
  require(group < race.groups.size(), ErrorCode::Parameter,
          "race " + race.id + " has no ATL group " + std::to_string(group));
  std::vector<std::uint32_t> ranks(race.size(), 0);
  const auto& ticket = race.groups[group].ticket;
  for (std::size_t pos = 0; pos < ticket.size(); ++pos) ranks[race.candidate_index(ticket[pos])] = static_cast<std::uint32_t>(pos + 1);
  return ranks;
}

namespace {
void check_packing(std::uint32_t slots_per, std::uint64_t base) {
  require(slots_per >= 1 && base >= 2, ErrorCode::Parameter, "packing needs slots >= 1 and base >= 2");
  std::uint64_t bound = 1;
  for (std::uint32_t i = 0; i < slots_per; ++i) {
    require(bound <= UINT64_MAX / base, ErrorCode::Parameter, "base^slots overflows 64 bits");
    bound *= base;
  }
}
}  // namespace

std::vector<std::uint64_t> pack_preferences(std::span<const std::uint32_t> ranks, std::uint32_t slots_per,
                                            std::uint64_t base) {
  check_packing(slots_per, base);
  std::vector<std::uint64_t> out((ranks.size() + slots_per - 1) / slots_per, 0);
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    require(ranks[i] < base, ErrorCode::Encoding,
            "value " + std::to_string(ranks[i]) + " does not fit slot base " + std::to_string(base));
    std::uint64_t weight = 1;
    for (std::size_t j = 0; j < i % slots_per; ++j) weight *= base;
    out[i / slots_per] += ranks[i] * weight;
  }
  return out;
}

std::vector<std::uint32_t> unpack_preferences(std::span<const std::uint64_t> packed, std::size_t count,
                                              std::uint32_t slots_per, std::uint64_t base) {
  check_packing(slots_per, base);
  require(packed.size() == (count + slots_per - 1) / slots_per, ErrorCode::Decode,
          "packed length does not match the slot count");
  std::vector<std::uint32_t> out(count);
  for (std::size_t c = 0; c < packed.size(); ++c) {
    std::uint64_t v = packed[c];
    for (std::uint32_t j = 0; j < slots_per; ++j) {
      std::size_t i = c * slots_per + j;
      if (i < count) {
        out[i] = static_cast<std::uint32_t>(v % base);
      } else {
        require(v % base == 0, ErrorCode::Decode, "non-zero padding slot");
      }
      v /= base;
    }
    require(v == 0, ErrorCode::Decode, "packed value exceeds base^slots");
  }
  return out;
}

}  // namespace vvote::election
