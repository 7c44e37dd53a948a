#include "vvote/wbb/board.hpp"

#include <algorithm>
#include <set>

#include "vvote/error.hpp"
#include "vvote/wbb/merkle.hpp"

namespace vvote::wbb {

namespace {

SignedReceipt receipt_for(const WbbItem& item) {
  SignedReceipt r;
  r.serial = item.serial;
  r.kind = item.kind;
  r.seq = item.seq;
  r.payload_hash = item.payload_hash;
  r.item_hash = item.hash;
  return r;
}

std::vector<Digest> hashes_of(const std::vector<ItemPtr>& items, std::uint64_t first_seq, std::uint64_t count) {
  std::vector<Digest> out;
  out.reserve(count);
  for (std::uint64_t s = first_seq; s < first_seq + count; ++s) out.push_back(items[s - 1]->hash);
  return out;
}

}  // namespace

Peer::Peer(std::uint32_t index, const std::string& seed)
    : index_(index), key_(crypto::SigningKey::from_seed(seed + "/peer/" + std::to_string(index))) {}

void Peer::store(const ItemPtr& item) {
  const Digest expected_prev = items_.empty() ? Digest{} : items_.back()->hash;
  require(item->seq == items_.size() + 1, ErrorCode::Conflict,
          "peer " + std::to_string(index_) + " expected seq " + std::to_string(items_.size() + 1));
  require(item->prev_hash == expected_prev, ErrorCode::Conflict, "hash link broken at seq " + std::to_string(item->seq));
  require(item->hash == item->compute_hash(), ErrorCode::Conflict, "item hash mismatch");
  items_.push_back(item);
}

PeerSignature Peer::accept(const ItemPtr& item) {
  require(alive_, ErrorCode::Unavailable, "peer " + std::to_string(index_) + " is down");
  std::lock_guard lock(mu_);
  store(item);
  return {index_, key_.sign(receipt_for(*item).receipt_bytes())};
}

PeerSignature Peer::countersign(const SignedReceipt& receipt) const {
  require(alive_, ErrorCode::Unavailable, "peer " + std::to_string(index_) + " is down");
  std::lock_guard lock(mu_);
  require(receipt.seq >= 1 && receipt.seq <= items_.size(), ErrorCode::NotFound, "peer does not hold the item");
  const auto& item = *items_[receipt.seq - 1];
  require(item.hash == receipt.item_hash && receipt_for(item).receipt_bytes() == receipt.receipt_bytes(),
          ErrorCode::Conflict, "receipt does not match the stored item");
  return {index_, key_.sign(receipt.receipt_bytes())};
}

PeerSignature Peer::sign_checkpoint(const Checkpoint& cp) const {
  require(alive_, ErrorCode::Unavailable, "peer " + std::to_string(index_) + " is down");
  std::lock_guard lock(mu_);
  require(cp.first_seq >= 1 && cp.first_seq + cp.count - 1 <= items_.size(), ErrorCode::Unavailable,
          "peer has not caught up with the checkpoint");
  auto root = merkle_root(hashes_of(items_, cp.first_seq, cp.count));
  require(root == cp.root, ErrorCode::Conflict, "checkpoint root does not match local items");
  return {index_, key_.sign(cp.signing_bytes())};
}

std::vector<ItemPtr> Peer::lookup(const std::string& serial) const {
  std::lock_guard lock(mu_);
  std::vector<ItemPtr> out;
  for (const auto& item : items_)
    if (item->serial == serial) out.push_back(item);
  return out;
}

std::uint64_t Peer::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

void Peer::restart(const std::vector<ItemPtr>& canonical) {
  std::lock_guard lock(mu_);
  for (std::size_t i = items_.size(); i < canonical.size(); ++i) store(canonical[i]);
  alive_ = true;
}

BulletinBoard::BulletinBoard(BoardConfig config) : config_(std::move(config)) {
  require(config_.peers >= 1 && config_.threshold >= 1 && config_.threshold <= config_.peers, ErrorCode::Parameter,
          "need 1 <= threshold <= peers");
  for (std::uint32_t i = 0; i < config_.peers; ++i) peers_.push_back(std::make_unique<Peer>(i, config_.seed));
}

SignedReceipt BulletinBoard::collect_signatures(SignedReceipt receipt, const ItemPtr& item, bool fresh) {
  for (auto& p : peers_) {
    if (!p->alive()) continue;
    try {
      receipt.signatures.push_back(fresh ? p->accept(item) : p->countersign(receipt));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unavailable && e.code() != ErrorCode::NotFound) throw;
    }
  }
  require(receipt.signatures.size() >= config_.threshold, ErrorCode::Unavailable,
          "only " + std::to_string(receipt.signatures.size()) + " of " + std::to_string(config_.threshold) +
              " required peer signatures");
  return receipt;
}

SignedReceipt BulletinBoard::append(ItemKind kind, const std::string& serial, std::string payload) {
  std::unique_lock lock(mu_);
  if (!serial.empty()) {
    if (auto it = by_serial_.find(serial); it != by_serial_.end()) {
      for (auto seq : it->second) {
        const auto& prior = items_[seq - 1];
        if (prior->kind == kind && prior->payload == payload)
          return collect_signatures(receipt_for(*prior), prior, false);
      }
    }
  }
  if (auto why = rules_.check(kind, serial)) fail(ErrorCode::Conflict, *why);
  require(live_peers() >= config_.threshold, ErrorCode::Unavailable,
          std::to_string(live_peers()) + " live peers, " + std::to_string(config_.threshold) + " required");

  auto item = std::make_shared<WbbItem>();
  item->seq = items_.size() + 1;
  item->kind = kind;
  item->serial = serial;
  item->timestamp = last_timestamp_ = std::max(last_timestamp_, now_.load());
  item->payload_hash = crypto::sha256(item->payload = std::move(payload));
  item->prev_hash = items_.empty() ? Digest{} : items_.back()->hash;
  item->hash = item->compute_hash();

  ItemPtr shared = item;
  SignedReceipt receipt = receipt_for(*shared);
  std::vector<PeerSignature> sigs;
  for (auto& p : peers_)
    if (p->alive()) sigs.push_back(p->accept(shared));

  // once any peer holds the item it is part of the log
  items_.push_back(shared);
  if (!serial.empty()) by_serial_[serial].push_back(shared->seq);
  rules_.apply(kind, serial);
  for (const auto& l : listeners_) l(*shared);

  receipt.signatures = std::move(sigs);
  require(receipt.signatures.size() >= config_.threshold, ErrorCode::Unavailable, "peer lost during replication");
  return receipt;
}

std::vector<LookupEntry> BulletinBoard::lookup(const std::string& serial) const {
  std::shared_lock lock(mu_);
  std::vector<LookupEntry> out;
  auto it = by_serial_.find(serial);
  if (it == by_serial_.end()) return out;
  for (auto seq : it->second) {
    LookupEntry e{items_[seq - 1], std::nullopt};
    auto cp = std::upper_bound(checkpoints_.begin(), checkpoints_.end(), seq,
                               [](std::uint64_t s, const Checkpoint& c) { return s < c.first_seq; });
    if (cp != checkpoints_.begin()) {
      --cp;
      if (cp->covers(seq)) {
        auto hashes = hashes_of(items_, cp->first_seq, cp->count);
        e.proof = InclusionProof{cp->period, seq - cp->first_seq, inclusion_path(hashes, seq - cp->first_seq)};
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

ItemPtr BulletinBoard::item(std::uint64_t seq) const {
  std::shared_lock lock(mu_);
  return seq >= 1 && seq <= items_.size() ? items_[seq - 1] : nullptr;
}

void BulletinBoard::subscribe(Listener listener) {
  std::unique_lock lock(mu_);
  listeners_.push_back(std::move(listener));
}

std::optional<SerialState> BulletinBoard::serial_state(const std::string& serial) const {
  std::shared_lock lock(mu_);
  return rules_.state(serial);
}

Checkpoint BulletinBoard::checkpoint() {
  std::unique_lock lock(mu_);
  require(live_peers() >= config_.threshold, ErrorCode::Unavailable, "not enough live peers to checkpoint");
  Checkpoint cp;
  cp.period = checkpoints_.size();
  cp.first_seq = checkpoints_.empty() ? 1 : checkpoints_.back().first_seq + checkpoints_.back().count;
  cp.count = items_.size() + 1 - cp.first_seq;
  cp.root = merkle_root(hashes_of(items_, cp.first_seq, cp.count));
  cp.prev = checkpoints_.empty() ? Digest{} : checkpoints_.back().hash();
  for (auto& p : peers_) {
    if (!p->alive()) continue;
    try {
      cp.signatures.push_back(p->sign_checkpoint(cp));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unavailable) throw;
    }
  }
  require(cp.signatures.size() >= config_.threshold, ErrorCode::Unavailable, "too few checkpoint signatures");
  checkpoints_.push_back(cp);
  return cp;
}

std::vector<ItemPtr> BulletinBoard::items() const {
  std::shared_lock lock(mu_);
  return items_;
}

std::vector<Checkpoint> BulletinBoard::checkpoints() const {
  std::shared_lock lock(mu_);
  return checkpoints_;
}

PeerDirectory BulletinBoard::directory() const {
  PeerDirectory d;
  d.threshold = config_.threshold;
  for (const auto& p : peers_) d.keys.push_back(p->public_key());
  return d;
}

std::uint64_t BulletinBoard::size() const {
  std::shared_lock lock(mu_);
  return items_.size();
}

void BulletinBoard::crash_peer(std::size_t i) {
  std::unique_lock lock(mu_);
  peers_.at(i)->crash();
}

void BulletinBoard::restart_peer(std::size_t i) {
  std::unique_lock lock(mu_);
  peers_.at(i)->restart(items_);
}

std::size_t BulletinBoard::live_peers() const {
  return std::count_if(peers_.begin(), peers_.end(), [](const auto& p) { return p->alive(); });
}

void ChainReport::add(std::string problem, std::optional<std::uint64_t> seq) {
  ok = false;
  if (seq && !first_bad_seq) first_bad_seq = seq;
  constexpr std::size_t kMaxProblems = 50;
  if (problems.size() < kMaxProblems) problems.push_back(std::move(problem));
  else if (problems.size() == kMaxProblems) problems.push_back("further problems omitted");
}

ChainReport verify_chain(const std::vector<ItemPtr>& items, const CheckpointFile& file, bool require_full_coverage) {
  ChainReport report;
  SerialStateMachine rules;
  Digest prev{};
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = *items[i];
    const auto pos = static_cast<std::uint64_t>(i + 1);
    const auto at = "log line " + std::to_string(pos) + ": ";
    if (it.seq != pos) report.add(at + "seq " + std::to_string(it.seq) + " out of order", pos);
    if (crypto::sha256(it.payload) != it.payload_hash) report.add(at + "payload hash mismatch", pos);
    if (it.prev_hash != prev) report.add(at + "prev_hash does not link to the previous item", pos);
    if (it.compute_hash() != it.hash) report.add(at + "item hash mismatch", pos);
    if (auto why = rules.check(it.kind, it.serial)) report.add(at + *why, pos);
    else rules.apply(it.kind, it.serial);
    prev = it.hash;
  }

  std::uint64_t next_first = 1;
  Digest prev_cp{};
  for (std::size_t k = 0; k < file.checkpoints.size(); ++k) {
    const auto& cp = file.checkpoints[k];
    const auto at = "checkpoint " + std::to_string(k) + ": ";
    if (cp.period != k) report.add(at + "period out of order");
    if (cp.first_seq != next_first) report.add(at + "does not start where the previous one ended");
    if (cp.prev != prev_cp) report.add(at + "does not chain to the previous checkpoint");
    if (cp.first_seq < 1 || cp.first_seq + cp.count - 1 > items.size()) {
      report.add(at + "covers items missing from the log", items.size() + 1);
    } else {
      std::vector<Digest> hashes;
      hashes.reserve(cp.count);
      for (std::uint64_t s = cp.first_seq; s < cp.first_seq + cp.count; ++s) hashes.push_back(items[s - 1]->hash);
      if (merkle_root(hashes) != cp.root) report.add(at + "root does not match the log", cp.first_seq);
    }
    auto valid = count_valid_signatures(cp.signing_bytes(), cp.signatures, file.peers);
    if (file.peers.threshold == 0 || valid < file.peers.threshold)
      report.add(at + std::to_string(valid) + " valid signatures, " + std::to_string(file.peers.threshold) +
                 " required");
    next_first = cp.first_seq + cp.count;
    prev_cp = cp.hash();
  }
  if (require_full_coverage && next_first != items.size() + 1)
    report.add("log has " + std::to_string(items.size()) + " items but checkpoints cover " +
                   std::to_string(next_first - 1),
               next_first);
  return report;
}

}  // namespace vvote::wbb
