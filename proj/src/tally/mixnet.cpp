#include "vvote/tally/mixnet.hpp"

#include <algorithm>
#include <numeric>

#include "vvote/error.hpp"
#include "vvote/protocol/payloads.hpp"

namespace vvote::tally {

using nlohmann::json;

namespace {

crypto::Digest link_commitment(const std::string& race, std::size_t stage, std::uint64_t output, std::uint64_t source,
                               const crypto::Digest& salt) {
  crypto::Hasher h("vvote/mix-link");
  h.field(race).field(static_cast<std::uint64_t>(stage)).field(output).field(source).field(ByteView(salt));
  return h.finish();
}

crypto::Digest stage_commitment(const crypto::Group& g, const std::string& race, std::size_t stage,
                                const std::vector<Row>& in, const MixStage& s) {
  crypto::Hasher h("vvote/mix-stage");
  h.field(race).field(static_cast<std::uint64_t>(stage));
  h.field(ByteView(batch_hash(g, in))).field(ByteView(batch_hash(g, s.output)));
  for (const auto& c : s.link_commitments) h.update(c);
  return h.finish();
}

Row reencrypt_row(const crypto::ElGamal& eg, const Row& row, const std::vector<crypto::Scalar>& r) {
  Row out;
  out.reserve(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out.push_back(eg.reencrypt(row[i], r[i]));
  return out;
}

struct StageSecrets {
  std::vector<std::uint64_t> source;  // output index -> input index
  std::vector<std::vector<crypto::Scalar>> randomness;
  std::vector<crypto::Digest> salts;
};

LinkOpening open_link(const StageSecrets& s, std::uint64_t output) {
  return {output, s.source[output], s.randomness[output], s.salts[output]};
}

}  // namespace

std::vector<bool> challenge_bits(const MixTranscript& t, std::size_t pair) {
  crypto::Hasher h("vvote/rpc-challenge");
  h.field(t.race).field(ByteView(t.checkpoint));
  for (const auto& s : t.stages) h.update(s.commitment);
  const auto seed = h.finish();
  crypto::Drbg rng = crypto::Drbg(ByteView(seed)).fork("pair/" + std::to_string(pair));
  const auto n = t.stages.at(2 * pair).output.size();
  std::vector<bool> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = rng.next_u64() & 1;
  return bits;
}

MixTranscript mix(const RaceBatch& input, std::uint32_t stages, const crypto::ElGamal& eg,
                  const crypto::Digest& checkpoint, crypto::Drbg& rng, const std::vector<MixCheat>& cheats) {
  require(stages >= 2 && stages % 2 == 0, ErrorCode::Parameter, "mixing needs an even number of stages, at least 2");
  const auto& g = eg.group();
  const auto n = input.rows.size();
  MixTranscript t{input.race, input.width, checkpoint, {}};
  std::vector<StageSecrets> secrets(stages);

  const std::vector<Row>* in = &input.rows;
  for (std::uint32_t s = 0; s < stages; ++s) {
    auto& sec = secrets[s];
    sec.source.resize(n);
    std::iota(sec.source.begin(), sec.source.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(sec.source[i - 1], sec.source[rng.uniform(i)]);

    MixStage stage;
    stage.output.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<crypto::Scalar> r;
      for (std::size_t c = 0; c < input.width; ++c) r.push_back(g.random_scalar(rng));
      crypto::Digest salt;
      rng.fill(salt);
      stage.output.push_back(reencrypt_row(eg, (*in)[sec.source[j]], r));
      stage.link_commitments.push_back(link_commitment(t.race, s, j, sec.source[j], salt));
      sec.randomness.push_back(std::move(r));
      sec.salts.push_back(salt);
    }
    for (const auto& c : cheats)
      if (c.stage == s && c.row < n) stage.output[c.row] = c.replacement;
    stage.commitment = stage_commitment(g, t.race, s, *in, stage);
    t.stages.push_back(std::move(stage));
    in = &t.stages.back().output;
  }

  for (std::size_t p = 0; p < stages / 2; ++p) {
    const auto bits = challenge_bits(t, p);
    const auto& second = secrets[2 * p + 1];
    std::vector<std::uint64_t> consumer(n);  // middle row -> output of the second stage
    for (std::size_t j = 0; j < n; ++j) consumer[second.source[j]] = j;
    auto& first_open = t.stages[2 * p].openings;
    auto& second_open = t.stages[2 * p + 1].openings;
    for (std::size_t m = 0; m < n; ++m) {
      if (bits[m]) second_open.push_back(open_link(second, consumer[m]));
      else first_open.push_back(open_link(secrets[2 * p], m));
    }
    std::sort(second_open.begin(), second_open.end(), [](const auto& a, const auto& b) { return a.output < b.output; });
  }
  return t;
}

std::string check_mix(const RaceBatch& input, const MixTranscript& t, const crypto::ElGamal& eg,
                      const crypto::Digest& checkpoint) {
  const auto& g = eg.group();
  const auto n = input.rows.size();
  if (t.race != input.race) return "transcript is for race " + t.race;
  if (t.stages.size() < 2 || t.stages.size() % 2) return "transcript needs an even number of stages";
  if (t.checkpoint != checkpoint) return "transcript challenges are not bound to the final checkpoint";
  if (t.width != input.width) return "row width mismatch";

  const std::vector<Row>* in = &input.rows;
  for (std::size_t s = 0; s < t.stages.size(); ++s) {
    const auto& stage = t.stages[s];
    const auto at = "stage " + std::to_string(s) + ": ";
    if (stage.output.size() != n || stage.link_commitments.size() != n) return at + "batch size changed";
    for (const auto& row : stage.output)
      if (row.size() != t.width) return at + "row width changed";
    if (stage_commitment(g, t.race, s, *in, stage) != stage.commitment) return at + "stage commitment does not match";
    in = &stage.output;
  }

  for (std::size_t p = 0; p < t.stages.size() / 2; ++p) {
    const auto bits = challenge_bits(t, p);
    for (int half = 0; half < 2; ++half) {
      const auto s = 2 * p + half;
      const auto& stage = t.stages[s];
      const auto& from = s == 0 ? input.rows : t.stages[s - 1].output;
      const auto at = "stage " + std::to_string(s) + ": ";
      std::vector<bool> seen_out(n, false), seen_src(n, false);
      std::size_t expected = 0;
      for (std::size_t m = 0; m < n; ++m) expected += bits[m] == (half == 1);
      if (stage.openings.size() != expected) return at + "wrong number of opened links";
      for (const auto& o : stage.openings) {
        if (o.output >= n || o.source >= n || seen_out[o.output] || seen_src[o.source]) return at + "malformed opening";
        seen_out[o.output] = seen_src[o.source] = true;
        const auto middle = half == 0 ? o.output : o.source;
        if (bits[middle] != (half == 1)) return at + "opening does not follow the challenge";
        if (link_commitment(t.race, s, o.output, o.source, o.salt) != stage.link_commitments[o.output])
          return at + "opening contradicts link commitment " + std::to_string(o.output);
        if (o.randomness.size() != t.width) return at + "opening randomness has the wrong length";
        for (const auto& r : o.randomness)
          if (!g.is_canonical(r)) return at + "opening randomness out of range";
        if (reencrypt_row(eg, from[o.source], o.randomness) != stage.output[o.output])
          return at + "output row " + std::to_string(o.output) + " is not a re-encryption of its source";
      }
    }
  }
  return {};
}

json to_json(const crypto::Group& g, const MixTranscript& t) {
  auto rows_json = [&](const std::vector<Row>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
      json r = json::array();
      for (const auto& c : row) r.push_back(protocol::ciphertext_to_json(g, c));
      out.push_back(r);
    }
    return out;
  };
  json stages = json::array();
  for (const auto& s : t.stages) {
    json commits = json::array();
    for (const auto& c : s.link_commitments) commits.push_back(crypto::hex(c));
    json openings = json::array();
    for (const auto& o : s.openings) {
      json r = json::array();
      for (const auto& x : o.randomness) r.push_back(g.to_hex(x));
      openings.push_back({{"output", o.output}, {"source", o.source}, {"randomness", r}, {"salt", crypto::hex(o.salt)}});
    }
    stages.push_back({{"output", rows_json(s.output)},
                      {"link_commitments", commits},
                      {"commitment", crypto::hex(s.commitment)},
                      {"openings", openings}});
  }
  return {{"race", t.race}, {"width", t.width}, {"checkpoint", crypto::hex(t.checkpoint)}, {"stages", stages}};
}

MixTranscript mix_transcript_from_json(const crypto::Group& g, const json& j) {
  try {
    MixTranscript t;
    t.race = j.at("race").get<std::string>();
    t.width = j.at("width").get<std::size_t>();
    t.checkpoint = crypto::digest_from_hex(j.at("checkpoint").get<std::string>());
    for (const auto& sj : j.at("stages")) {
      MixStage s;
      for (const auto& rj : sj.at("output")) {
        Row row;
        for (const auto& c : rj) row.push_back(protocol::ciphertext_from_json(g, c));
        s.output.push_back(std::move(row));
      }
      for (const auto& c : sj.at("link_commitments")) s.link_commitments.push_back(crypto::digest_from_hex(c.get<std::string>()));
      s.commitment = crypto::digest_from_hex(sj.at("commitment").get<std::string>());
      for (const auto& oj : sj.at("openings")) {
        LinkOpening o;
        o.output = oj.at("output").get<std::uint64_t>();
        o.source = oj.at("source").get<std::uint64_t>();
        for (const auto& x : oj.at("randomness")) o.randomness.push_back(g.scalar_from_hex(x.get<std::string>()));
        o.salt = crypto::digest_from_hex(oj.at("salt").get<std::string>());
        s.openings.push_back(std::move(o));
      }
      t.stages.push_back(std::move(s));
    }
    return t;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("mix transcript: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::Format, std::string("mix transcript: ") + e.what());
  }
}

}  // namespace vvote::tally
