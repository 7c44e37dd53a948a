#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vvote::election {

enum class RaceKind { District, Region };

std::string_view to_string(RaceKind kind);

struct Candidate {
  std::string id;
  std::string name;
};

/// Above-the-line group: one mark expands to the full `ticket` ordering.
struct AtlGroup {
  std::string name;
  std::vector<std::string> ticket;  // candidate ids, first preference first
};

struct Region {
  std::string id;
  std::string name;
};

struct District {
  std::string id;
  std::string name;
  std::string region;
};

struct Race {
  std::string id;
  RaceKind kind = RaceKind::District;
  std::string area;  // district id or region id
  std::vector<Candidate> candidates;
  std::vector<AtlGroup> groups;

  std::size_t size() const { return candidates.size(); }
  /// Canonical index of a candidate id; throws NotFound.
  std::size_t candidate_index(std::string_view id) const;
};

struct FormalityRules {
  std::uint32_t btl_minimum = 5;
};

struct PackingRules {
  std::uint64_t slot_base = 64;
  std::uint32_t slots_per_plaintext = 3;

  /// Largest packed plaintext + 1, i.e. the decode-table size.
  std::uint64_t table_bound() const;
};

/// The frozen structure of an election. Treat as immutable once its digest
/// has been committed to the bulletin board.
struct ElectionManifest {
  std::string name;
  std::vector<Region> regions;
  std::vector<District> districts;
  std::vector<Race> races;
  FormalityRules formality;
  PackingRules packing;

  const Race& race(std::string_view id) const;
  const Race* find_race(std::string_view id) const;
  const Race& district_race(std::string_view district_id) const;
  const Race& region_race(std::string_view region_id) const;
  const District& district(std::string_view id) const;

  /// Hex SHA-256 over the canonical (sorted-key, compact) JSON encoding.
  std::string digest() const;
};

nlohmann::json to_json(const ElectionManifest& m);
ElectionManifest manifest_from_json(const nlohmann::json& j);
ElectionManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const ElectionManifest& m, const std::filesystem::path& path);

/// Replaces the candidate lists of the races named in a CSV with rows
/// `race_id,candidate_id,name`. A header row starting with "race_id" is skipped.
void load_candidates_csv(ElectionManifest& m, std::istream& csv);

/// Empty iff every structural invariant holds.
std::vector<std::string> validate_manifest(const ElectionManifest& m);

/// 8 regions x 11 districts; 40-candidate region races with ATL groups,
/// district races of 3..8 candidates. Deterministic in `seed`.
ElectionManifest reference_manifest(std::uint64_t seed = 2014);

/// Small fixture: `regions` regions of `districts_per_region` districts,
/// `district_candidates` per district race, `region_candidates` per region
/// race split over two ATL groups.
ElectionManifest small_manifest(std::size_t regions = 1, std::size_t districts_per_region = 2,
                                std::size_t district_candidates = 3, std::size_t region_candidates = 4);

}  // namespace vvote::election
