#include "vvote/election/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "vvote/crypto/drbg.hpp"
#include "vvote/crypto/hash.hpp"
#include "vvote/error.hpp"

namespace vvote::election {

using nlohmann::json;

std::string_view to_string(RaceKind kind) { return kind == RaceKind::District ? "district" : "region"; }

std::size_t Race::candidate_index(std::string_view cid) const {
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (candidates[i].id == cid) return i;
  fail(ErrorCode::NotFound, "candidate '" + std::string(cid) + "' not in race " + id);
}

std::uint64_t PackingRules::table_bound() const {
  std::uint64_t bound = 1;
  for (std::uint32_t i = 0; i < slots_per_plaintext; ++i) {
    require(bound <= UINT64_MAX / slot_base, ErrorCode::Parameter, "packing parameters overflow 64 bits");
    bound *= slot_base;
  }
  return bound;
}

const Race* ElectionManifest::find_race(std::string_view id) const {
  for (const auto& r : races)
    if (r.id == id) return &r;
  return nullptr;
}

const Race& ElectionManifest::race(std::string_view id) const {
  const auto* r = find_race(id);
  require(r != nullptr, ErrorCode::NotFound, "unknown race '" + std::string(id) + "'");
  return *r;
}

const District& ElectionManifest::district(std::string_view id) const {
  for (const auto& d : districts)
    if (d.id == id) return d;
  fail(ErrorCode::NotFound, "unknown district '" + std::string(id) + "'");
}

const Race& ElectionManifest::district_race(std::string_view district_id) const {
  for (const auto& r : races)
    if (r.kind == RaceKind::District && r.area == district_id) return r;
  fail(ErrorCode::NotFound, "no race for district '" + std::string(district_id) + "'");
}

const Race& ElectionManifest::region_race(std::string_view region_id) const {
  for (const auto& r : races)
    if (r.kind == RaceKind::Region && r.area == region_id) return r;
  fail(ErrorCode::NotFound, "no race for region '" + std::string(region_id) + "'");
}

std::string ElectionManifest::digest() const { return crypto::sha256_hex(to_json(*this).dump()); }

json to_json(const ElectionManifest& m) {
  json j;
  j["name"] = m.name;
  j["regions"] = json::array();
  for (const auto& r : m.regions) j["regions"].push_back({{"id", r.id}, {"name", r.name}});
  j["districts"] = json::array();
  for (const auto& d : m.districts) j["districts"].push_back({{"id", d.id}, {"name", d.name}, {"region", d.region}});
  j["races"] = json::array();
  for (const auto& r : m.races) {
    json race{{"id", r.id}, {"kind", std::string(to_string(r.kind))}, {"area", r.area}};
    race["candidates"] = json::array();
    for (const auto& c : r.candidates) race["candidates"].push_back({{"id", c.id}, {"name", c.name}});
    race["groups"] = json::array();
    for (const auto& g : r.groups) race["groups"].push_back({{"name", g.name}, {"ticket", g.ticket}});
    j["races"].push_back(std::move(race));
  }
  j["rules"] = {{"btl_minimum", m.formality.btl_minimum},
                {"slot_base", m.packing.slot_base},
                {"slots_per_plaintext", m.packing.slots_per_plaintext}};
  return j;
}

ElectionManifest manifest_from_json(const json& j) {
  try {
    ElectionManifest m;
    m.name = j.at("name").get<std::string>();
    for (const auto& r : j.at("regions")) m.regions.push_back({r.at("id"), r.at("name")});
    for (const auto& d : j.at("districts")) m.districts.push_back({d.at("id"), d.at("name"), d.at("region")});
    for (const auto& rj : j.at("races")) {
      Race r;
      r.id = rj.at("id");
      auto kind = rj.at("kind").get<std::string>();
      require(kind == "district" || kind == "region", ErrorCode::Format, "unknown race kind " + kind);
      r.kind = kind == "district" ? RaceKind::District : RaceKind::Region;
      r.area = rj.at("area");
      for (const auto& c : rj.at("candidates")) r.candidates.push_back({c.at("id"), c.at("name")});
      if (rj.contains("groups"))
        for (const auto& g : rj.at("groups"))
          r.groups.push_back({g.at("name"), g.at("ticket").get<std::vector<std::string>>()});
      m.races.push_back(std::move(r));
    }
    if (j.contains("rules")) {
      const auto& rules = j.at("rules");
      m.formality.btl_minimum = rules.value("btl_minimum", 5u);
      m.packing.slot_base = rules.value("slot_base", std::uint64_t{64});
      m.packing.slots_per_plaintext = rules.value("slots_per_plaintext", 3u);
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("manifest: ") + e.what());
  }
}

ElectionManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::NotFound, "cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("manifest: ") + e.what());
  }
  return manifest_from_json(j);
}

void save_manifest(const ElectionManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << to_json(m).dump(2) << '\n';
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}
}  // namespace

void load_candidates_csv(ElectionManifest& m, std::istream& csv) {
  std::map<std::string, std::vector<Candidate>> loaded;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty() || line.rfind("race_id", 0) == 0) continue;
    auto f = split_csv_line(line);
    require(f.size() == 3, ErrorCode::Format, "candidate csv line " + std::to_string(line_no) + " needs 3 fields");
    loaded[f[0]].push_back({f[1], f[2]});
  }
  for (auto& [race_id, cands] : loaded) {
    auto it = std::find_if(m.races.begin(), m.races.end(), [&](const Race& r) { return r.id == race_id; });
    require(it != m.races.end(), ErrorCode::NotFound, "csv names unknown race " + race_id);
    it->candidates = std::move(cands);
  }
}

std::vector<std::string> validate_manifest(const ElectionManifest& m) {
  std::vector<std::string> v;
  std::set<std::string> region_ids, district_ids, race_ids;
  for (const auto& r : m.regions)
    if (!region_ids.insert(r.id).second) v.push_back("duplicate region id " + r.id);
  for (const auto& d : m.districts) {
    if (!district_ids.insert(d.id).second) v.push_back("duplicate district id " + d.id);
    if (!region_ids.contains(d.region)) v.push_back("district " + d.id + " references unknown region " + d.region);
  }

  std::map<std::string, int> races_per_area;
  for (const auto& race : m.races) {
    if (!race_ids.insert(race.id).second) v.push_back("duplicate race id " + race.id);
    const auto& areas = race.kind == RaceKind::District ? district_ids : region_ids;
    if (!areas.contains(race.area))
      v.push_back("race " + race.id + " covers unknown " + std::string(to_string(race.kind)) + " " + race.area);
    races_per_area[std::string(to_string(race.kind)) + ":" + race.area]++;

    if (race.candidates.empty()) v.push_back("race " + race.id + " has no candidates");
    std::set<std::string> cids;
    for (const auto& c : race.candidates)
      if (!cids.insert(c.id).second) v.push_back("race " + race.id + " repeats candidate " + c.id);
    if (race.candidates.size() + 2 > m.packing.slot_base)
      v.push_back("race " + race.id + " has more candidates than the packing slot base allows");

    if (race.kind == RaceKind::District && !race.groups.empty())
      v.push_back("district race " + race.id + " has ATL groups");
    for (const auto& g : race.groups) {
      std::multiset<std::string> ticket(g.ticket.begin(), g.ticket.end());
      std::multiset<std::string> all(cids.begin(), cids.end());
      if (ticket != all || g.ticket.size() != race.candidates.size())
        v.push_back("ticket of group " + g.name + " in race " + race.id + " is not a permutation of its candidates");
    }
  }
  for (const auto& d : m.districts)
    if (races_per_area["district:" + d.id] != 1) v.push_back("district " + d.id + " needs exactly one race");
  for (const auto& r : m.regions)
    if (races_per_area["region:" + r.id] != 1) v.push_back("region " + r.id + " needs exactly one race");
  if (m.races.size() != m.regions.size() + m.districts.size())
    v.push_back("race count " + std::to_string(m.races.size()) + " != regions + districts");

  if (m.packing.slot_base < 2 || m.packing.slots_per_plaintext < 1) {
    v.push_back("packing parameters out of range");
  } else {
    try {
      m.packing.table_bound();
    } catch (const Error&) {
      v.push_back("packing parameters overflow 64 bits");
    }
  }
  if (m.formality.btl_minimum < 1) v.push_back("btl minimum must be at least 1");
  return v;
}

namespace {

std::string pad2(std::size_t i) { return (i < 10 ? "0" : "") + std::to_string(i); }

Race make_region_race(const std::string& region_id, std::size_t count, std::size_t groups, crypto::Drbg& rng) {
  Race race;
  race.id = "LC-" + region_id;
  race.kind = RaceKind::Region;
  race.area = region_id;
  for (std::size_t k = 1; k <= count; ++k)
    race.candidates.push_back({region_id + "-C" + pad2(k), "Council Candidate " + region_id + "-" + pad2(k)});
  const std::size_t per_group = std::max<std::size_t>(1, count / (groups + 1));
  for (std::size_t g = 0; g < groups; ++g) {
    AtlGroup group;
    group.name = "Group " + std::string(1, static_cast<char>('A' + g));
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < per_group; ++k) order.push_back(g * per_group + k);
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < count; ++k)
      if (k < g * per_group || k >= (g + 1) * per_group) rest.push_back(k);
    for (std::size_t i = rest.size(); i > 1; --i) std::swap(rest[i - 1], rest[rng.uniform(i)]);
    order.insert(order.end(), rest.begin(), rest.end());
    for (auto k : order) group.ticket.push_back(race.candidates[k].id);
    race.groups.push_back(std::move(group));
  }
  return race;
}

Race make_district_race(const std::string& district_id, std::size_t count) {
  Race race;
  race.id = "LA-" + district_id;
  race.kind = RaceKind::District;
  race.area = district_id;
  for (std::size_t k = 1; k <= count; ++k)
    race.candidates.push_back({district_id + "-C" + std::to_string(k), "Assembly Candidate " + district_id + "-" + std::to_string(k)});
  return race;
}

}  // namespace

ElectionManifest reference_manifest(std::uint64_t seed) {
  ElectionManifest m;
  m.name = "State General Election (reference fixture)";
  crypto::Drbg rng("reference-manifest/" + std::to_string(seed));
  std::size_t district_no = 0;
  for (std::size_t r = 1; r <= 8; ++r) {
    std::string rid = "R" + std::to_string(r);
    m.regions.push_back({rid, "Region " + std::to_string(r)});
    m.races.push_back(make_region_race(rid, 40, 8, rng));
    for (std::size_t d = 0; d < 11; ++d) {
      std::string did = "D" + pad2(++district_no);
      m.districts.push_back({did, "District " + std::to_string(district_no), rid});
      m.races.push_back(make_district_race(did, 3 + rng.uniform(6)));
    }
  }
  return m;
}

ElectionManifest small_manifest(std::size_t regions, std::size_t districts_per_region,
                                std::size_t district_candidates, std::size_t region_candidates) {
  ElectionManifest m;
  m.name = "Small test election";
  crypto::Drbg rng("small-manifest");
  std::size_t district_no = 0;
  for (std::size_t r = 1; r <= regions; ++r) {
    std::string rid = "R" + std::to_string(r);
    m.regions.push_back({rid, "Region " + std::to_string(r)});
    m.races.push_back(make_region_race(rid, region_candidates, 2, rng));
    for (std::size_t d = 0; d < districts_per_region; ++d) {
      std::string did = "D" + pad2(++district_no);
      m.districts.push_back({did, "District " + std::to_string(district_no), rid});
      m.races.push_back(make_district_race(did, district_candidates));
    }
  }
  return m;
}

}  // namespace vvote::election
