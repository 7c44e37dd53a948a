#include <algorithm>
#include <cmath>

#include "vvote/error.hpp"
#include "vvote/sim/harness.hpp"

namespace vvote::sim {

using nlohmann::json;

namespace {

void check_rate(double r, const char* name) {
  require(r >= 0 && r <= 1, ErrorCode::Parameter, std::string("rate ") + name + " must lie in [0, 1]");
}

}  // namespace

std::uint64_t ScenarioConfig::voters() const {
  std::uint64_t n = 0;
  for (const auto& s : sites) n += s.voters;
  return n;
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  try {
    c.manifest = j.value("manifest", c.manifest);
    c.group = j.value("group", c.group);
    if (j.contains("sites")) {
      for (const auto& s : j.at("sites")) {
        Site site;
        site.name = s.value("name", site.name);
        site.voters = s.at("voters").get<std::uint64_t>();
        site.latency_ms = s.value("latency_ms", 0.0);
        for (const auto& o : s.value("outages", json::array()))
          site.outages.push_back({o.at("start").get<double>(), o.at("end").get<double>()});
        c.sites.push_back(site);
      }
    } else if (j.contains("voters")) {
      c.sites.push_back({"local", j.at("voters").get<std::uint64_t>(), 0, {}});
    }
    const auto r = j.value("rates", json::object());
    c.rates.compare = r.value("compare", c.rates.compare);
    c.rates.lookup = r.value("lookup", c.rates.lookup);
    c.rates.audit = r.value("audit", c.rates.audit);
    c.rates.quarantine = r.value("quarantine", c.rates.quarantine);
    c.rates.informal_district = r.value("informal_district", c.rates.informal_district);
    c.rates.informal_region = r.value("informal_region", c.rates.informal_region);
    c.rates.atl = r.value("atl", c.rates.atl);
    if (j.contains("informal_district_votes")) c.informal_district_votes = j.at("informal_district_votes").get<std::uint64_t>();
    if (j.contains("informal_region_votes")) c.informal_region_votes = j.at("informal_region_votes").get<std::uint64_t>();
    for (const auto& f : j.value("peer_faults", json::array())) {
      PeerFault pf{f.at("peer").get<std::uint32_t>(), f.at("crash_at").get<std::uint64_t>(), std::nullopt};
      if (f.contains("restart_at")) pf.restart_at = f.at("restart_at").get<std::uint64_t>();
      c.peer_faults.push_back(pf);
    }
    const auto adv = j.value("adversary", json::object());
    c.adversary.alter = adv.value("alter", std::uint64_t{0});
    c.adversary.misprint = adv.value("misprint", std::uint64_t{0});
    c.peers = j.value("peers", c.peers);
    c.threshold = j.value("threshold", c.threshold);
    c.trustees = j.value("trustees", c.trustees);
    c.trustee_threshold = j.value("trustee_threshold", c.trustee_threshold);
    c.mix_stages = j.value("mix_stages", c.mix_stages);
    c.voting_hours = j.value("voting_hours", c.voting_hours);
    c.checkpoint_hours = j.value("checkpoint_hours", c.checkpoint_hours);
    c.seed = j.value("seed", c.seed);
    c.tally = j.value("tally", c.tally);
    c.keep_artifacts = j.value("keep_artifacts", c.keep_artifacts);
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("scenario: ") + e.what());
  }
  for (auto [r, name] : {std::pair{c.rates.compare, "compare"}, {c.rates.lookup, "lookup"}, {c.rates.audit, "audit"},
                         {c.rates.quarantine, "quarantine"}, {c.rates.informal_district, "informal_district"},
                         {c.rates.informal_region, "informal_region"}, {c.rates.atl, "atl"}})
    check_rate(r, name);
  require(c.voting_hours > 0 && c.checkpoint_hours > 0, ErrorCode::Parameter, "durations must be positive");
  require(c.adversary.alter <= c.voters() && c.adversary.misprint <= c.voters(), ErrorCode::Parameter,
          "adversary targets more voters than there are");
  return c;
}

json to_json(const ScenarioConfig& c) {
  json sites = json::array();
  for (const auto& s : c.sites) {
    json outages = json::array();
    for (const auto& o : s.outages) outages.push_back({{"start", o.start}, {"end", o.end}});
    sites.push_back({{"name", s.name}, {"voters", s.voters}, {"latency_ms", s.latency_ms}, {"outages", outages}});
  }
  json faults = json::array();
  for (const auto& f : c.peer_faults) {
    json jf = {{"peer", f.peer}, {"crash_at", f.crash_at}};
    if (f.restart_at) jf["restart_at"] = *f.restart_at;
    faults.push_back(jf);
  }
  json j = {{"manifest", c.manifest},
            {"group", c.group},
            {"sites", sites},
            {"rates",
             {{"compare", c.rates.compare},
              {"lookup", c.rates.lookup},
              {"audit", c.rates.audit},
              {"quarantine", c.rates.quarantine},
              {"informal_district", c.rates.informal_district},
              {"informal_region", c.rates.informal_region},
              {"atl", c.rates.atl}}},
            {"peer_faults", faults},
            {"adversary", {{"alter", c.adversary.alter}, {"misprint", c.adversary.misprint}}},
            {"peers", c.peers},
            {"threshold", c.threshold},
            {"trustees", c.trustees},
            {"trustee_threshold", c.trustee_threshold},
            {"mix_stages", c.mix_stages},
            {"voting_hours", c.voting_hours},
            {"checkpoint_hours", c.checkpoint_hours},
            {"seed", c.seed},
            {"tally", c.tally},
            {"keep_artifacts", c.keep_artifacts}};
  if (c.informal_district_votes) j["informal_district_votes"] = *c.informal_district_votes;
  if (c.informal_region_votes) j["informal_region_votes"] = *c.informal_region_votes;
  return j;
}

ScenarioConfig deployment_replica() {
  ScenarioConfig c;
  c.manifest = "reference";
  c.sites = {{"remote", 973, 250, {}}, {"local", 148, 20, {}}};
  c.informal_district_votes = 29;
  c.informal_region_votes = 13;
  c.rates.lookup = 0.134;
  c.seed = "deployment-replica";
  return c;
}

election::ElectionManifest load_scenario_manifest(const std::string& name) {
  if (name == "small") return election::small_manifest();
  if (name == "reference") return election::reference_manifest();
  return election::load_manifest(name);
}

Percentiles percentiles(std::vector<double> v) {
  Percentiles p;
  p.samples = v.size();
  if (v.empty()) return p;
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
  };
  p.p50 = at(0.5);
  p.p90 = at(0.9);
  p.p99 = at(0.99);
  p.max = v.back();
  return p;
}

std::vector<AppliedFault> inject_fault(wbb::BulletinBoard& board, const std::vector<PeerFault>& plan,
                                       std::uint64_t index) {
  std::vector<AppliedFault> applied;
  for (const auto& f : plan) {
    require(f.peer < board.peer_count(), ErrorCode::Parameter, "no peer " + std::to_string(f.peer));
    if (f.crash_at == index) {
      board.crash_peer(f.peer);
      applied.push_back({index, f.peer, true, board.live_peers()});
    }
    if (f.restart_at && *f.restart_at == index) {
      board.restart_peer(f.peer);
      applied.push_back({index, f.peer, false, board.live_peers()});
    }
  }
  return applied;
}

Deployment::Deployment(election::ElectionManifest manifest, const ScenarioConfig& cfg) {
  auto group = crypto::make_group(cfg.group);
  keys = crypto::keygen(group, cfg.trustees, cfg.trustee_threshold, as_bytes(cfg.seed + "/trustees"));
  params.manifest = std::move(manifest);
  params.group_name = cfg.group;
  params.group = group;
  params.keys = keys.public_keys;
  params.ballot_key = crypto::SigningKey::from_seed(cfg.seed + "/ballot-key").public_key();
  params.wbb_endpoint = "http://127.0.0.1/wbb";
  params.mix_stages = cfg.mix_stages;
  board = std::make_unique<wbb::BulletinBoard>(wbb::BoardConfig{cfg.peers, cfg.threshold, cfg.seed + "/wbb"});
  board->append(wbb::ItemKind::Manifest, "", protocol::encode_params(params));
  ballots = std::make_unique<ballot::BallotService>(params, *board, cfg.seed + "/ballot-key", cfg.seed + "/ballots");
  capture = std::make_unique<capture::CaptureService>(params, *board, cfg.seed + "/capture");
}

}  // namespace vvote::sim
