#include "vvote/protocol/payloads.hpp"

#include "vvote/election/preferences.hpp"
#include "vvote/error.hpp"

namespace vvote::protocol {

using nlohmann::json;

namespace {

template <typename F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string(what) + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Format) throw;
    fail(ErrorCode::Format, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json parse_json(std::string_view text, std::string_view what) {
  return guarded(what, [&] { return json::parse(text); });
}

crypto::ElGamal ElectionParams::elgamal() const { return crypto::ElGamal(group, keys.joint, table_bound()); }

json ciphertext_to_json(const crypto::Group& g, const crypto::Ciphertext& c) {
  return json::array({g.to_hex(c.a), g.to_hex(c.b)});
}

crypto::Ciphertext ciphertext_from_json(const crypto::Group& g, const json& j) {
  require(j.is_array() && j.size() == 2, ErrorCode::Format, "ciphertext must be a pair");
  return {g.element_from_hex(j[0].get<std::string>()), g.element_from_hex(j[1].get<std::string>())};
}

json public_keys_to_json(const crypto::Group& g, const crypto::PublicKeySet& k) {
  json trustees = json::array();
  for (const auto& e : k.trustee_keys) trustees.push_back(g.to_hex(e));
  return {{"joint", g.to_hex(k.joint)}, {"trustees", trustees}, {"threshold", k.threshold}};
}

crypto::PublicKeySet public_keys_from_json(const crypto::Group& g, const json& j) {
  crypto::PublicKeySet k;
  k.joint = g.element_from_hex(j.at("joint").get<std::string>());
  for (const auto& e : j.at("trustees")) k.trustee_keys.push_back(g.element_from_hex(e.get<std::string>()));
  k.threshold = j.at("threshold").get<std::uint32_t>();
  require(k.threshold >= 1 && k.threshold <= k.trustee_keys.size(), ErrorCode::Format, "bad trustee threshold");
  return k;
}

std::string encode_params(const ElectionParams& p) {
  json j = {{"manifest", election::to_json(p.manifest)},
            {"manifest_digest", p.manifest.digest()},
            {"group", p.group_name},
            {"keys", public_keys_to_json(*p.group, p.keys)},
            {"ballot_key", crypto::key_to_hex(p.ballot_key)},
            {"wbb", p.wbb_endpoint},
            {"mix_stages", p.mix_stages}};
  return j.dump();
}

ElectionParams decode_params(std::string_view payload) {
  auto j = parse_json(payload, "manifest item");
  return guarded("manifest item", [&] {
    ElectionParams p;
    p.manifest = election::manifest_from_json(j.at("manifest"));
    require(p.manifest.digest() == j.at("manifest_digest").get<std::string>(), ErrorCode::Format,
            "manifest digest does not match manifest");
    p.group_name = j.at("group").get<std::string>();
    p.group = crypto::make_group(p.group_name);
    p.keys = public_keys_from_json(*p.group, j.at("keys"));
    p.ballot_key = crypto::key_from_hex(j.at("ballot_key").get<std::string>());
    p.wbb_endpoint = j.at("wbb").get<std::string>();
    p.mix_stages = j.at("mix_stages").get<std::uint32_t>();
    return p;
  });
}

crypto::Digest onion_hash(const crypto::Group& g, const std::vector<crypto::Ciphertext>& onion) {
  crypto::Hasher h("vvote/onion");
  h.field(static_cast<std::uint64_t>(onion.size()));
  for (const auto& c : onion) h.field(g.encode(c.a)).field(g.encode(c.b));
  return h.finish();
}

std::string encode_commit(const crypto::Group& g, const CommitPayload& p) {
  json races = json::array();
  for (const auto& r : p.races) {
    json onion = json::array();
    for (const auto& c : r.onion) onion.push_back(ciphertext_to_json(g, c));
    races.push_back({{"race", r.race}, {"onion", onion}, {"onion_hash", crypto::hex(onion_hash(g, r.onion))}});
  }
  return json{{"serial", p.serial}, {"manifest_digest", p.manifest_digest}, {"races", races}}.dump();
}

CommitPayload decode_commit(const crypto::Group& g, std::string_view payload) {
  auto j = parse_json(payload, "commit payload");
  return guarded("commit payload", [&] {
    CommitPayload p;
    p.serial = j.at("serial").get<std::string>();
    p.manifest_digest = j.at("manifest_digest").get<std::string>();
    for (const auto& r : j.at("races")) {
      RaceOnion ro;
      ro.race = r.at("race").get<std::string>();
      for (const auto& c : r.at("onion")) ro.onion.push_back(ciphertext_from_json(g, c));
      require(crypto::hex(onion_hash(g, ro.onion)) == r.at("onion_hash").get<std::string>(), ErrorCode::Format,
              "onion hash mismatch for " + ro.race);
      p.races.push_back(std::move(ro));
    }
    return p;
  });
}

std::string encode_vote(const election::PackingRules& packing, const VotePayload& p) {
  json races = json::array();
  for (const auto& r : p.races) {
    auto packed = election::pack_preferences(r.ranks, packing.slots_per_plaintext, packing.slot_base);
    races.push_back({{"race", r.race}, {"positions", r.ranks.size()}, {"packed", packed}});
  }
  return json{{"serial", p.serial}, {"manifest_digest", p.manifest_digest}, {"session", p.session}, {"races", races}}
      .dump();
}

VotePayload decode_vote(const election::PackingRules& packing, std::string_view payload) {
  auto j = parse_json(payload, "vote payload");
  return guarded("vote payload", [&] {
    VotePayload p;
    p.serial = j.at("serial").get<std::string>();
    p.manifest_digest = j.at("manifest_digest").get<std::string>();
    p.session = j.at("session").get<std::string>();
    for (const auto& r : j.at("races")) {
      auto packed = r.at("packed").get<std::vector<std::uint64_t>>();
      auto n = r.at("positions").get<std::size_t>();
      p.races.push_back({r.at("race").get<std::string>(),
                         election::unpack_preferences(packed, n, packing.slots_per_plaintext, packing.slot_base)});
    }
    return p;
  });
}

std::string encode_audit(const crypto::Group& g, const AuditPayload& p) {
  json races = json::array();
  for (const auto& r : p.races) {
    json rand = json::array();
    for (const auto& s : r.randomness) rand.push_back(g.to_hex(s));
    races.push_back({{"race", r.race}, {"permutation", r.permutation}, {"randomness", rand}, {"printed", r.printed}});
  }
  return json{{"serial", p.serial}, {"manifest_digest", p.manifest_digest}, {"races", races}}.dump();
}

AuditPayload decode_audit(const crypto::Group& g, std::string_view payload) {
  auto j = parse_json(payload, "audit payload");
  return guarded("audit payload", [&] {
    AuditPayload p;
    p.serial = j.at("serial").get<std::string>();
    p.manifest_digest = j.at("manifest_digest").get<std::string>();
    for (const auto& r : j.at("races")) {
      RaceOpening o;
      o.race = r.at("race").get<std::string>();
      o.permutation = r.at("permutation").get<std::vector<std::uint32_t>>();
      for (const auto& s : r.at("randomness")) o.randomness.push_back(g.scalar_from_hex(s.get<std::string>()));
      o.printed = r.at("printed").get<std::vector<std::string>>();
      p.races.push_back(std::move(o));
    }
    return p;
  });
}

std::string encode_quarantine(const QuarantinePayload& p) {
  return json{{"serial", p.serial}, {"session", p.session}, {"reason", p.reason}}.dump();
}

QuarantinePayload decode_quarantine(std::string_view payload) {
  auto j = parse_json(payload, "quarantine payload");
  return guarded("quarantine payload", [&] {
    return QuarantinePayload{j.at("serial").get<std::string>(), j.at("session").get<std::string>(),
                             j.at("reason").get<std::string>()};
  });
}

}  // namespace vvote::protocol
