#include <map>
#include <set>

#include "doctest.h"
#include "vvote/crypto/drbg.hpp"
#include "vvote/error.hpp"
#include "vvote/wbb/board.hpp"
#include "vvote/wbb/merkle.hpp"

using namespace vvote;
using namespace vvote::wbb;

namespace {

// Reference tree built by repeated pairwise reduction with odd nodes promoted.
// For the "largest power of two on the left" split this yields the same root.
Digest oracle_root(const std::vector<Digest>& items) {
  if (items.empty()) return crypto::sha256(std::string_view(""));
  std::vector<Digest> level;
  for (const auto& d : items) {
    Bytes b{0x00};
    b.insert(b.end(), d.begin(), d.end());
    level.push_back(crypto::sha256(ByteView(b)));
  }
  while (level.size() > 1) {
    std::vector<Digest> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      Bytes b{0x01};
      b.insert(b.end(), level[i].begin(), level[i].end());
      b.insert(b.end(), level[i + 1].begin(), level[i + 1].end());
      next.push_back(crypto::sha256(ByteView(b)));
    }
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0];
}

std::vector<Digest> leaves(std::size_t n, std::string_view tag = "leaf") {
  std::vector<Digest> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(crypto::sha256(std::string(tag) + std::to_string(i)));
  return out;
}

std::string serial(int i) { return "s" + std::to_string(i); }

void populate(BulletinBoard& b, int ballots, bool with_checkpoint = true) {
  b.append(ItemKind::Manifest, "", "{\"m\":1}");
  for (int i = 0; i < ballots; ++i) b.append(ItemKind::BallotCommit, serial(i), "commit" + std::to_string(i));
  for (int i = 0; i < ballots; i += 2) b.append(ItemKind::VoteCast, serial(i), "vote" + std::to_string(i));
  if (with_checkpoint) b.checkpoint();
}

std::vector<ItemPtr> clone(const std::vector<ItemPtr>& items) { return items; }

}  // namespace

TEST_CASE("merkle root of the empty tree is sha256 of nothing") {
  CHECK(crypto::hex(empty_root()) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(merkle_root({}) == empty_root());
}

TEST_CASE("merkle root of four items by hand") {
  auto d = leaves(4);
  auto l = [&](int i) { return leaf_hash(d[i]); };
  auto expected = node_hash(node_hash(l(0), l(1)), node_hash(l(2), l(3)));
  CHECK(merkle_root(d) == expected);
  CHECK(merkle_root(d) == oracle_root(d));
}

TEST_CASE("merkle root matches the pairwise oracle for every size up to 70") {
  for (std::size_t n = 0; n <= 70; ++n) {
    auto d = leaves(n);
    CHECK_MESSAGE(merkle_root(d) == oracle_root(d), "n=" << n);
  }
}

TEST_CASE("flipping any leaf changes the root") {
  auto d = leaves(13);
  auto root = merkle_root(d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto t = d;
    t[i][5] ^= 0x01;
    CHECK(merkle_root(t) != root);
  }
  auto swapped = d;
  std::swap(swapped[3], swapped[4]);
  CHECK(merkle_root(swapped) != root);
}

TEST_CASE("inclusion paths verify for every leaf and fail otherwise") {
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 17u, 33u}) {
    auto d = leaves(n);
    auto root = merkle_root(d);
    for (std::size_t i = 0; i < n; ++i) {
      auto path = inclusion_path(d, i);
      CHECK(verify_path(d[i], i, n, path, root));
      CHECK_FALSE(verify_path(crypto::sha256(std::string_view("other")), i, n, path, root));
      if (n > 1) CHECK_FALSE(verify_path(d[i], (i + 1) % n, n, path, root));
      CHECK_FALSE(verify_path(d[i], i, n, path, crypto::sha256(std::string_view("root"))));
      if (!path.empty()) {
        auto bad = path;
        bad[0][0] ^= 1;
        CHECK_FALSE(verify_path(d[i], i, n, bad, root));
      }
    }
  }
}

TEST_CASE("items link by hash and receipts carry threshold signatures") {
  BulletinBoard b;
  auto r1 = b.append(ItemKind::Manifest, "", "manifest");
  auto r2 = b.append(ItemKind::BallotCommit, "abc", "commit");
  CHECK(r1.seq == 1);
  CHECK(r2.seq == 2);
  auto items = b.items();
  CHECK(items[0]->prev_hash == Digest{});
  CHECK(items[1]->prev_hash == items[0]->hash);
  CHECK(r2.item_hash == items[1]->hash);
  CHECK(r2.payload_hash == crypto::sha256(std::string_view("commit")));
  CHECK(verify_receipt(r2, b.directory()));
  CHECK(r2.signatures.size() == 4);

  auto forged = r2;
  forged.seq = 3;
  CHECK_FALSE(verify_receipt(forged, b.directory()));
  auto weak = r2;
  weak.signatures.resize(2);
  CHECK_FALSE(verify_receipt(weak, b.directory()));
  auto dup = r2;
  dup.signatures = {r2.signatures[0], r2.signatures[0], r2.signatures[0]};
  CHECK_FALSE(verify_receipt(dup, b.directory()));
}

TEST_CASE("serial rules reject conflicting items") {
  BulletinBoard b;
  b.append(ItemKind::Manifest, "", "m");
  auto conflict = [&](ItemKind k, const std::string& s, const std::string& p) {
    try {
      b.append(k, s, p);
    } catch (const Error& e) {
      return e.code() == ErrorCode::Conflict;
    }
    return false;
  };
  CHECK(conflict(ItemKind::Manifest, "", "m2"));
  CHECK(conflict(ItemKind::VoteCast, "a", "vote"));
  b.append(ItemKind::BallotCommit, "a", "c");
  b.append(ItemKind::BallotCommit, "b", "c");
  b.append(ItemKind::BallotCommit, "c", "c");
  CHECK(conflict(ItemKind::BallotCommit, "a", "c2"));
  b.append(ItemKind::VoteCast, "a", "v1");
  CHECK(conflict(ItemKind::VoteCast, "a", "v2"));
  CHECK(conflict(ItemKind::BallotAudit, "a", "open"));
  b.append(ItemKind::BallotAudit, "b", "open");
  CHECK(conflict(ItemKind::VoteCast, "b", "v"));
  b.append(ItemKind::Quarantine, "c", "q");
  CHECK(conflict(ItemKind::VoteCast, "c", "v"));
  CHECK(b.serial_state("a")->voted);
  CHECK(b.serial_state("b")->audited);
  CHECK_FALSE(b.serial_state("zzz"));
}

TEST_CASE("exact replay returns a receipt for the original item") {
  BulletinBoard b;
  b.append(ItemKind::BallotCommit, "a", "c");
  auto first = b.append(ItemKind::VoteCast, "a", "v1");
  auto again = b.append(ItemKind::VoteCast, "a", "v1");
  CHECK(b.size() == 2);
  CHECK(again.seq == first.seq);
  CHECK(again.item_hash == first.item_hash);
  CHECK(verify_receipt(again, b.directory()));
  CHECK_THROWS_AS(b.append(ItemKind::VoteCast, "a", "v2"), Error);
}

TEST_CASE("unavailable below threshold, durable with n-t peers down") {
  BulletinBoard b;  // 4 peers, threshold 3
  b.append(ItemKind::BallotCommit, "a", "c");
  b.crash_peer(0);
  auto r = b.append(ItemKind::BallotCommit, "b", "c");
  CHECK(r.signatures.size() == 3);
  CHECK(verify_receipt(r, b.directory()));
  b.crash_peer(1);
  try {
    b.append(ItemKind::BallotCommit, "c", "c");
    FAIL("expected unavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unavailable);
  }
  CHECK(b.size() == 2);
  CHECK_THROWS_AS(b.checkpoint(), Error);
  b.restart_peer(0);
  CHECK(b.peer(0).size() == 2);
  b.restart_peer(1);
  auto cp = b.checkpoint();
  CHECK(cp.signatures.size() == 4);
  CHECK(b.append(ItemKind::BallotCommit, "c", "c").seq == 3);
  for (std::size_t i = 0; i < b.peer_count(); ++i) CHECK(b.peer(i).size() == 3);
}

TEST_CASE("peers refuse items that break the chain") {
  Peer p(0, "x");
  auto a = std::make_shared<WbbItem>();
  a->seq = 1;
  a->hash = a->compute_hash();
  p.accept(a);
  auto b = std::make_shared<WbbItem>();
  b->seq = 2;
  b->hash = b->compute_hash();  // prev_hash left zero
  CHECK_THROWS_AS(p.accept(b), Error);
  auto c = std::make_shared<WbbItem>();
  c->seq = 3;
  c->prev_hash = a->hash;
  c->hash = c->compute_hash();
  CHECK_THROWS_AS(p.accept(c), Error);
}

TEST_CASE("lookup returns inclusion proofs once a checkpoint covers the item") {
  BulletinBoard b;
  populate(b, 6, false);
  auto before = b.lookup(serial(2));
  REQUIRE(before.size() == 2);
  CHECK_FALSE(before[0].proof);
  auto cp = b.checkpoint();
  auto after = b.lookup(serial(2));
  for (const auto& e : after) {
    REQUIRE(e.proof);
    CHECK(verify_inclusion(*e.item, *e.proof, cp));
    WbbItem altered = *e.item;
    altered.payload_hash[0] ^= 1;
    altered.hash = altered.compute_hash();
    CHECK_FALSE(verify_inclusion(altered, *e.proof, cp));
  }
  b.append(ItemKind::BallotCommit, "late", "c");
  auto cp2 = b.checkpoint();
  CHECK(cp2.prev == cp.hash());
  CHECK(cp2.first_seq == cp.first_seq + cp.count);
  auto late = b.lookup("late");
  REQUIRE(late[0].proof);
  CHECK(verify_inclusion(*late[0].item, *late[0].proof, cp2));
  CHECK_FALSE(verify_inclusion(*late[0].item, *late[0].proof, cp));
  CHECK(b.lookup("nope").empty());
}

TEST_CASE("honest chain verifies; json round trip preserves it") {
  BulletinBoard b;
  populate(b, 10);
  auto report = verify_chain(b.items(), b.checkpoint_file());
  CHECK(report.ok);
  std::vector<ItemPtr> parsed;
  for (const auto& it : b.items())
    parsed.push_back(std::make_shared<WbbItem>(item_from_json(nlohmann::json::parse(to_ndjson_line(*it)))));
  auto file = checkpoint_file_from_json(nlohmann::json::parse(to_json(b.checkpoint_file()).dump()));
  CHECK(verify_chain(parsed, file).ok);
  auto line = to_ndjson_line(*b.items()[1]);
  CHECK(line.find("{\"seq\":2,\"kind\":\"BALLOT_COMMIT\"") == 0);
}

TEST_CASE("deleting, reordering or splicing any item is detected") {
  BulletinBoard b;
  populate(b, 8);
  const auto items = b.items();
  const auto file = b.checkpoint_file();
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto del = clone(items);
    del.erase(del.begin() + i);
    CHECK_FALSE(verify_chain(del, file).ok);

    if (i + 1 < items.size()) {
      auto swp = clone(items);
      std::swap(swp[i], swp[i + 1]);
      CHECK_FALSE(verify_chain(swp, file).ok);
    }

    // splice: replace the payload and recompute this item's own hashes
    auto spl = clone(items);
    auto edited = std::make_shared<WbbItem>(*items[i]);
    edited->payload += "x";
    edited->payload_hash = crypto::sha256(edited->payload);
    edited->hash = edited->compute_hash();
    spl[i] = edited;
    auto rep = verify_chain(spl, file);
    CHECK_FALSE(rep.ok);
    CHECK(rep.first_bad_seq.has_value());
  }
  auto extra = clone(items);
  auto tail = std::make_shared<WbbItem>();
  tail->seq = items.size() + 1;
  tail->kind = ItemKind::BallotCommit;
  tail->serial = "new";
  tail->payload_hash = crypto::sha256(std::string_view(""));
  tail->prev_hash = items.back()->hash;
  tail->hash = tail->compute_hash();
  extra.push_back(tail);
  CHECK_FALSE(verify_chain(extra, file).ok);
  CHECK(verify_chain(extra, file, false).ok);
}

TEST_CASE("checkpoint signatures and chaining are checked") {
  BulletinBoard b;
  populate(b, 4);
  b.append(ItemKind::BallotCommit, "z", "c");
  b.checkpoint();
  auto file = b.checkpoint_file();
  auto items = b.items();
  CHECK(verify_chain(items, file).ok);

  auto weak = file;
  weak.checkpoints[1].signatures.resize(2);
  CHECK_FALSE(verify_chain(items, weak).ok);

  auto foreign = file;
  foreign.peers.keys[0] = crypto::SigningKey::from_seed("mallory").public_key();
  foreign.peers.keys[1] = crypto::SigningKey::from_seed("mallory2").public_key();
  CHECK_FALSE(verify_chain(items, foreign).ok);

  auto unchained = file;
  unchained.checkpoints[1].prev[0] ^= 1;
  CHECK_FALSE(verify_chain(items, unchained).ok);
}

TEST_CASE("random operation sequences respect the serial rules") {
  crypto::Drbg rng(std::string_view("serial-sm"));
  const ItemKind kinds[] = {ItemKind::BallotCommit, ItemKind::VoteCast, ItemKind::BallotAudit, ItemKind::Quarantine};
  for (int trial = 0; trial < 50; ++trial) {
    BulletinBoard b;
    std::map<std::string, std::vector<ItemKind>> accepted;
    for (int op = 0; op < 60; ++op) {
      auto s = serial(static_cast<int>(rng.uniform(6)));
      auto k = kinds[rng.uniform(4)];
      try {
        b.append(k, s, "p" + std::to_string(op));
        accepted[s].push_back(k);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Conflict);
      }
    }
    for (const auto& [s, ks] : accepted) {
      std::multiset<ItemKind> m(ks.begin(), ks.end());
      CHECK(ks.front() == ItemKind::BallotCommit);
      for (auto k : kinds) CHECK(m.count(k) <= 1);
      CHECK_FALSE((m.count(ItemKind::VoteCast) && m.count(ItemKind::BallotAudit)));
    }
    CHECK(verify_chain(b.items(), b.checkpoint_file(), false).ok);
  }
}
