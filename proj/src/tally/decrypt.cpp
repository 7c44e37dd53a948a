#include "vvote/tally/decrypt.hpp"

#include <set>

#include "vvote/error.hpp"

namespace vvote::tally {

using nlohmann::json;

DecryptionRecord decrypt_batch(const crypto::Group& g, const std::string& race, const std::vector<Row>& rows,
                               std::span<const crypto::TrusteeShare> shares, std::uint32_t threshold,
                               const crypto::DecodeTable& table) {
  std::set<std::uint32_t> distinct;
  for (const auto& s : shares) distinct.insert(s.index);
  require(distinct.size() >= threshold, ErrorCode::Unavailable,
          std::to_string(distinct.size()) + " trustee shares present, " + std::to_string(threshold) + " required");
  std::vector<crypto::TrusteeShare> use;
  std::set<std::uint32_t> taken;
  for (const auto& s : shares)
    if (use.size() < threshold && taken.insert(s.index).second) use.push_back(s);

  DecryptionRecord rec{race, {}};
  rec.rows.reserve(rows.size());
  for (const auto& row : rows) {
    DecryptedRow out;
    for (const auto& c : row) {
      std::vector<crypto::DecryptionShare> ds;
      for (const auto& s : use) ds.push_back(crypto::partial_decrypt(g, s, c));
      out.plaintexts.push_back(crypto::combine(g, ds, c, table, threshold));
      out.shares.push_back(std::move(ds));
    }
    rec.rows.push_back(std::move(out));
  }
  return rec;
}

std::string check_decryption(const crypto::Group& g, const std::vector<Row>& rows, const DecryptionRecord& record,
                             const crypto::PublicKeySet& keys, const crypto::DecodeTable& table) {
  if (record.rows.size() != rows.size())
    return "decryption covers " + std::to_string(record.rows.size()) + " rows, mix output has " +
           std::to_string(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const auto& dr = record.rows[i];
    const auto at = "row " + std::to_string(i) + ": ";
    if (dr.plaintexts.size() != row.size() || dr.shares.size() != row.size()) return at + "wrong number of ciphertexts";
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::set<std::uint32_t> trustees;
      for (const auto& s : dr.shares[c]) {
        if (s.trustee < 1 || s.trustee > keys.trustees() || !trustees.insert(s.trustee).second)
          return at + "unknown or repeated trustee";
        if (!crypto::verify_decryption(g, s, row[c], keys.trustee_key(s.trustee)))
          return at + "decryption proof of trustee " + std::to_string(s.trustee) + " fails";
      }
      try {
        if (crypto::combine(g, dr.shares[c], row[c], table, keys.threshold) != dr.plaintexts[c])
          return at + "claimed plaintext does not follow from the shares";
      } catch (const Error& e) {
        return at + e.what();
      }
    }
  }
  return {};
}

json to_json(const crypto::Group& g, const DecryptionRecord& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json shares = json::array();
    for (const auto& per : row.shares) {
      json ps = json::array();
      for (const auto& s : per)
        ps.push_back({{"trustee", s.trustee},
                      {"factor", g.to_hex(s.factor)},
                      {"commit_g", g.to_hex(s.proof.commit_g)},
                      {"commit_a", g.to_hex(s.proof.commit_a)},
                      {"challenge", g.to_hex(s.proof.challenge)},
                      {"response", g.to_hex(s.proof.response)}});
      shares.push_back(ps);
    }
    rows.push_back({{"plaintexts", row.plaintexts}, {"shares", shares}});
  }
  return {{"race", r.race}, {"rows", rows}};
}

DecryptionRecord decryption_from_json(const crypto::Group& g, const json& j) {
  try {
    DecryptionRecord r;
    r.race = j.at("race").get<std::string>();
    for (const auto& rj : j.at("rows")) {
      DecryptedRow row;
      row.plaintexts = rj.at("plaintexts").get<std::vector<std::uint64_t>>();
      for (const auto& per : rj.at("shares")) {
        std::vector<crypto::DecryptionShare> ds;
        for (const auto& s : per) {
          crypto::DecryptionShare d;
          d.trustee = s.at("trustee").get<std::uint32_t>();
          d.factor = g.element_from_hex(s.at("factor").get<std::string>());
          d.proof.commit_g = g.element_from_hex(s.at("commit_g").get<std::string>());
          d.proof.commit_a = g.element_from_hex(s.at("commit_a").get<std::string>());
          d.proof.challenge = g.scalar_from_hex(s.at("challenge").get<std::string>());
          d.proof.response = g.scalar_from_hex(s.at("response").get<std::string>());
          ds.push_back(d);
        }
        row.shares.push_back(std::move(ds));
      }
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("decryption record: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::Format, std::string("decryption record: ") + e.what());
  }
}

json to_json(const crypto::Group& g, const crypto::TrusteeShare& s) {
  return {{"index", s.index}, {"share", g.to_hex(s.value)}};
}

crypto::TrusteeShare trustee_share_from_json(const crypto::Group& g, const json& j) {
  try {
    return {j.at("index").get<std::uint32_t>(), g.scalar_from_hex(j.at("share").get<std::string>())};
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("trustee share: ") + e.what());
  }
}

}  // namespace vvote::tally
