#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vvote/election/manifest.hpp"

namespace vvote::election {

enum class VoteMode { Atl, Btl, District };

std::string_view to_string(VoteMode mode);
VoteMode vote_mode_from_string(std::string_view s);

/// A voter's marks on one race. For ATL, `atl_groups` lists every group the
/// voter marked (formal only when exactly one). For BTL/District, `ranks`
/// has one entry per printed position; 0 is blank.
struct PreferenceVector {
  std::string race;
  VoteMode mode = VoteMode::District;
  std::vector<std::uint32_t> atl_groups;
  std::vector<std::uint32_t> ranks;

  static PreferenceVector district(std::string race, std::vector<std::uint32_t> ranks);
  static PreferenceVector btl(std::string race, std::vector<std::uint32_t> ranks);
  static PreferenceVector atl(std::string race, std::uint32_t group);

  friend bool operator==(const PreferenceVector&, const PreferenceVector&) = default;
};

nlohmann::json to_json(const PreferenceVector& v);
/// {"race", "mode": "ATL"|"BTL"|"DISTRICT", "groups": [...] | "ranks": [...]}; Format on schema errors.
PreferenceVector preference_vector_from_json(const nlohmann::json& j);

enum class FormalityReason { Ok, SinglePreferenceDistrict, GapOrDuplicate, Empty, MultipleAtl };

std::string_view to_string(FormalityReason reason);

struct FormalityVerdict {
  bool formal = true;
  FormalityReason reason = FormalityReason::Ok;
  friend bool operator==(const FormalityVerdict&, const FormalityVerdict&) = default;
};

/// District: formal iff the ranks are exactly 1..n. Region ATL: exactly one
/// group. Region BTL: no repeated rank anywhere and 1..min(btl_minimum, n)
/// all present (any rank above n is informal). Throws Parameter if `v` does not belong to `race`.
FormalityVerdict check_formality(const PreferenceVector& v, const Race& race, const FormalityRules& rules);

/// Ranks per canonical candidate index for the group's ticket.
std::vector<std::uint32_t> atl_expand(std::uint32_t group, const Race& race);

/// Packs `slots_per` values per integer, little-endian in base `base`.
/// Values >= base -> Encoding error.
std::vector<std::uint64_t> pack_preferences(std::span<const std::uint32_t> ranks, std::uint32_t slots_per,
                                            std::uint64_t base);
std::vector<std::uint32_t> unpack_preferences(std::span<const std::uint64_t> packed, std::size_t count,
                                              std::uint32_t slots_per, std::uint64_t base);

}  // namespace vvote::election
