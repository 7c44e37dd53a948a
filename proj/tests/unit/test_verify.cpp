#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "vvote/error.hpp"
#include "vvote/sim/harness.hpp"
#include "vvote/verify/verifier.hpp"

using namespace vvote;
using namespace vvote::verify;

namespace {

// (1 - r)^k by repeated multiplication.
double non_detection_oracle(double r, std::uint64_t k) {
  double p = 1;
  for (std::uint64_t i = 0; i < k; ++i) p *= 1 - r;
  return p;
}

// Move votes one at a time from winner to loser until the loser leads.
std::uint64_t flips_by_enumeration(std::uint64_t margin) {
  std::int64_t winner = 100 + static_cast<std::int64_t>(margin), loser = 100;
  std::uint64_t moved = 0;
  while (!(loser > winner)) {
    --winner;
    ++loser;
    ++moved;
  }
  return moved;
}

sim::RunReport honest_run(const std::string& seed, std::uint64_t voters = 16) {
  sim::ScenarioConfig c;
  c.sites = {{"local", voters, 0, {}}};
  c.seed = seed;
  c.rates.audit = 0.25;
  c.rates.quarantine = 0.1;
  return sim::run_election(c);
}

std::shared_ptr<const wbb::WbbItem> with_payload(const wbb::WbbItem& it, std::string payload) {
  auto copy = std::make_shared<wbb::WbbItem>(it);
  copy->payload = std::move(payload);
  return copy;
}

}  // namespace

TEST_CASE("detection confidence closed form") {
  const double miss = 1 - detection_confidence({0.134, 21, std::nullopt});
  CHECK(std::abs(miss - 0.049) <= 0.001);
  CHECK(miss == doctest::Approx(non_detection_oracle(0.134, 21)).epsilon(1e-12));
  CHECK(detection_confidence({0.5, 21, std::nullopt}) > 0.999);
  CHECK(detection_confidence({0.3, 0, std::nullopt}) == 0);
  CHECK(detection_confidence({1, 1, std::nullopt}) == 1);
  CHECK(detection_confidence({1, 50, std::nullopt}) == 1);
  CHECK(detection_confidence({0, 50, std::nullopt}) == 0);
  CHECK(detection_confidence({0.5, 0, 41}) == doctest::Approx(1 - non_detection_oracle(0.5, 21)));
  CHECK_THROWS_AS(detection_confidence({1.2, 3, std::nullopt}), Error);
  CHECK_THROWS_AS(detection_confidence({-0.1, 3, std::nullopt}), Error);
}

TEST_CASE("detection confidence is monotone in rate and count") {
  crypto::Drbg rng(std::string_view("monotone"));
  for (int i = 0; i < 1000; ++i) {
    double r1 = rng.uniform01(), r2 = rng.uniform01();
    if (r1 > r2) std::swap(r1, r2);
    auto k1 = rng.uniform(60), k2 = rng.uniform(60);
    if (k1 > k2) std::swap(k1, k2);
    CHECK(detection_confidence({r1, k1, std::nullopt}) <= detection_confidence({r2, k1, std::nullopt}));
    CHECK(detection_confidence({r1, k1, std::nullopt}) <= detection_confidence({r1, k2, std::nullopt}));
  }
}

TEST_CASE("monte carlo agrees with the closed form") {
  crypto::Drbg rng(std::string_view("mc"));
  const std::uint64_t trials = 20000;
  const ConfidenceQuery q{0.134, 21, std::nullopt};
  const double p = detection_confidence(q);
  const double sigma = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(detection_monte_carlo(q, trials, rng) - p) < 3 * sigma);
}

TEST_CASE("minimum alterations to flip a margin") {
  CHECK(min_changes_to_flip(41) == 21);
  CHECK(min_changes_to_flip(1) == 1);
  CHECK(min_changes_to_flip(2) == 2);
  for (std::uint64_t m = 0; m < 200; ++m) CHECK(min_changes_to_flip(m) == flips_by_enumeration(m));
}

TEST_CASE("honest election passes every check") {
  auto r = honest_run("verify-honest");
  auto rep = verify_election(*r.artifacts, r.receipts);
  CHECK(rep.passed());
  for (const auto& c : rep.checks) CHECK(c.passed);
  auto j = to_json(rep);
  CHECK(j["passed"] == true);
  CHECK(j["checks"].size() == 6);
  CHECK(rep.render_text().find("verdict: PASS") != std::string::npos);
}

TEST_CASE("altered vote payload fails the chain check and names the item") {
  auto r = honest_run("verify-mutation");
  auto a = *r.artifacts;
  auto it = std::find_if(a.log.begin(), a.log.end(), [](const auto& i) { return i->kind == wbb::ItemKind::VoteCast; });
  REQUIRE(it != a.log.end());
  auto payload = (*it)->payload;
  payload[payload.size() / 2] ^= 1;
  const auto seq = (*it)->seq;
  *it = with_payload(**it, payload);
  auto rep = verify_election(a, r.receipts);
  CHECK_FALSE(rep.passed());
  const auto& chain = rep.check("chain");
  CHECK_FALSE(chain.passed);
  REQUIRE(chain.first_failure);
  CHECK(chain.first_failure->find("log line " + std::to_string(seq)) != std::string::npos);
  // later checks still ran
  CHECK(rep.check("export").checked == 2);
}

TEST_CASE("deleted log item fails the chain check") {
  auto r = honest_run("verify-delete");
  auto a = *r.artifacts;
  a.log.erase(a.log.begin() + 5);
  CHECK_FALSE(verify_election(a).check("chain").passed);
}

TEST_CASE("deleted export line is reported as a numbering gap") {
  auto r = honest_run("verify-export");
  auto a = *r.artifacts;
  auto& csv = a.exports.at("district");
  auto start = csv.find('\n') + 1;
  auto end = csv.find('\n', start) + 1;
  csv.erase(start, end - start);
  auto rep = verify_election(a);
  const auto& e = rep.check("export");
  CHECK_FALSE(e.passed);
  REQUIRE(e.first_failure);
  CHECK(e.first_failure->find("line 2 missing") != std::string::npos);
}

TEST_CASE("missing artifacts fail rather than pass") {
  auto r = honest_run("verify-missing");
  auto a = *r.artifacts;
  a.transcripts.clear();
  auto rep = verify_election(a);
  CHECK_FALSE(rep.check("mix").passed);
  auto b = *r.artifacts;
  b.exports.erase("region");
  CHECK_FALSE(verify_election(b).check("export").passed);
  auto c = *r.artifacts;
  c.decryptions.begin()->second.rows.at(0).plaintexts.at(0) ^= 1;
  CHECK_FALSE(verify_election(c).check("decryption").passed);
}

TEST_CASE("substituted mix output fails the mix check") {
  auto r = honest_run("verify-mix");
  auto a = *r.artifacts;
  auto& t = a.transcripts.begin()->second;
  REQUIRE(t.output().size() >= 2);
  auto& out = t.stages.back().output;
  std::swap(out[0], out[1]);
  CHECK_FALSE(verify_election(a).check("mix").passed);
}

TEST_CASE("receipt checks") {
  auto r = honest_run("verify-receipts");
  const auto& a = *r.artifacts;
  REQUIRE(!r.receipts.empty());
  auto pr = r.receipts.front();
  CHECK(check_receipt(pr, a.log, a.checkpoints).ok());

  auto edited = pr;
  auto& ranks = edited.races[0].ranks;
  std::swap(ranks[0], ranks[1]);
  CHECK(check_receipt(edited, a.log, a.checkpoints).status == ReceiptStatus::Mismatch);

  auto absent = pr;
  absent.serial = std::string(32, '0');
  absent.receipt.serial = absent.serial;
  CHECK(check_receipt(absent, a.log, a.checkpoints).status == ReceiptStatus::Missing);

  auto forged = pr;
  for (auto& s : forged.receipt.signatures) s.signature[0] ^= 1;
  CHECK(check_receipt(forged, a.log, a.checkpoints).status == ReceiptStatus::BadSignature);

  auto uncovered = a.checkpoints;
  uncovered.checkpoints.clear();
  CHECK(check_receipt(pr, a.log, uncovered).status == ReceiptStatus::NotIncluded);

  auto back = capture::preference_receipt_from_json(capture::to_json(pr));
  CHECK(check_receipt(back, a.log, a.checkpoints).ok());
}

TEST_CASE("load_artifacts rejects garbage") {
  auto dir = std::filesystem::temp_directory_path() / "vvote-garbage";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(load_artifacts(dir), Error);
  {
    std::ofstream(dir / "wbb_log.ndjson") << "{not json\n";
    std::ofstream(dir / "checkpoints.json") << "{}";
  }
  CHECK_THROWS_AS(load_artifacts(dir), Error);
  std::filesystem::remove_all(dir);
}
