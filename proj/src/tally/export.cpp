#include "vvote/tally/export.hpp"

#include <algorithm>
#include <charconv>

#include "vvote/error.hpp"
#include "vvote/tally/mix_input.hpp"

namespace vvote::tally {

std::string VoteRecord::key() const {
  std::size_t last = prefs.size();
  while (last > 0 && prefs[last - 1].empty()) --last;
  std::string out;
  for (std::size_t i = 0; i < last; ++i) {
    if (i) out += ',';
    out += prefs[i];
  }
  return out;
}

VoteRecord decode_record(const election::Race& race, const std::vector<std::uint64_t>& plaintexts,
                         const election::PackingRules& packing) {
  const auto n = race.size();
  require(plaintexts.size() == row_width(n, packing), ErrorCode::Decode, "row width does not fit race " + race.id);
  VoteRecord v{race.id, {}};
  v.prefs.reserve(n);
  for (std::size_t i = 0; i < plaintexts.size(); ++i) {
    auto value = plaintexts[i];
    for (std::uint32_t s = 0; s < packing.slots_per_plaintext; ++s, value /= packing.slot_base) {
      const auto slot = value % packing.slot_base;
      if (v.prefs.size() == n) {
        require(slot == 0, ErrorCode::Decode, "non-zero padding slot in race " + race.id);
        continue;
      }
      if (slot == kBlankSlot) v.prefs.emplace_back();
      else if (slot == duplicate_slot(packing)) v.prefs.emplace_back(kDuplicateMark);
      else {
        require(slot <= n, ErrorCode::Decode, "slot value " + std::to_string(slot) + " names no candidate of " + race.id);
        v.prefs.push_back(race.candidates[slot - 1].id);
      }
    }
    require(value == 0, ErrorCode::Decode, "plaintext exceeds the packing range");
  }
  return v;
}

election::FormalityVerdict record_formality(const VoteRecord& v, const election::Race& race,
                                            const election::FormalityRules& rules) {
  using election::FormalityReason;
  auto informal = [](FormalityReason r) { return election::FormalityVerdict{false, r}; };
  const auto n = race.size();
  std::size_t singles = 0;
  bool duplicate = false;
  for (const auto& p : v.prefs) {
    if (p == kDuplicateMark) duplicate = true;
    else if (!p.empty()) ++singles;
  }
  if (singles == 0 && !duplicate) return informal(FormalityReason::Empty);
  const auto held = [&](std::size_t rank) { return rank <= v.prefs.size() && !v.prefs[rank - 1].empty() && v.prefs[rank - 1] != kDuplicateMark; };
  if (race.kind == election::RaceKind::District) {
    if (!duplicate && singles == 1 && n > 1 && held(1)) return informal(FormalityReason::SinglePreferenceDistrict);
    if (duplicate || singles != n) return informal(FormalityReason::GapOrDuplicate);
    return {};
  }
  if (duplicate) return informal(FormalityReason::GapOrDuplicate);
  for (std::size_t k = 1; k <= std::min<std::size_t>(rules.btl_minimum, n); ++k)
    if (!held(k)) return informal(FormalityReason::GapOrDuplicate);
  return {};
}

std::vector<std::string> preference_list(const VoteRecord& v) {
  std::vector<std::string> out;
  for (const auto& p : v.prefs) {
    if (p.empty()) break;
    if (p == kDuplicateMark) break;
    out.push_back(p);
  }
  return out;
}

std::string export_votes(const std::vector<VoteRecord>& records) {
  std::vector<std::pair<std::string, std::string>> keyed;  // (race, key)
  keyed.reserve(records.size());
  for (const auto& r : records) keyed.emplace_back(r.race, r.key());
  std::sort(keyed.begin(), keyed.end());
  std::string out;
  std::uint64_t line = 0;
  for (const auto& [race, key] : keyed) {
    out += std::to_string(++line);
    out += ',';
    out += race;
    if (!key.empty()) {
      out += ',';
      out += key;
    }
    out += '\n';
  }
  return out;
}

std::vector<ExportLine> parse_export(std::string_view csv) {
  std::vector<ExportLine> out;
  std::size_t pos = 0;
  std::size_t physical = 0;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    auto text = csv.substr(pos, end - pos);
    pos = end + 1;
    ++physical;
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = text.find(',', start);
      fields.emplace_back(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    require(fields.size() >= 2 && !fields[1].empty(), ErrorCode::Format,
            "export line " + std::to_string(physical) + " has no race");
    ExportLine e;
    auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), e.line);
    require(ec == std::errc() && p == fields[0].data() + fields[0].size(), ErrorCode::Format,
            "export line " + std::to_string(physical) + " has a bad line number");
    e.record.race = fields[1];
    e.record.prefs.assign(fields.begin() + 2, fields.end());
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace vvote::tally
