#pragma once

#include <atomic>
#include <functional>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "vvote/wbb/checkpoint.hpp"
#include "vvote/wbb/item.hpp"
#include "vvote/wbb/serial_state.hpp"

namespace vvote::wbb {

/// A replica that stores items and countersigns receipts and checkpoints.
class Peer {
 public:
  Peer(std::uint32_t index, const std::string& seed);

  std::uint32_t index() const { return index_; }
  const crypto::PublicSigningKey& public_key() const { return key_.public_key(); }
  bool alive() const { return alive_; }

  /// Stores the next item after checking its position and hash links.
  /// Throws Unavailable when crashed, Conflict on a broken chain.
  PeerSignature accept(const ItemPtr& item);
  /// Re-signs the receipt for an item this peer already holds.
  PeerSignature countersign(const SignedReceipt& receipt) const;
  /// Signs a checkpoint after recomputing its root from local items.
  PeerSignature sign_checkpoint(const Checkpoint& cp) const;

  std::vector<ItemPtr> lookup(const std::string& serial) const;
  std::uint64_t size() const;

  void crash() { alive_ = false; }
  /// Comes back and copies whatever it missed from `canonical`.
  void restart(const std::vector<ItemPtr>& canonical);

 private:
  void store(const ItemPtr& item);

  std::uint32_t index_;
  crypto::SigningKey key_;
  std::atomic<bool> alive_ = true;
  mutable std::mutex mu_;
  std::vector<ItemPtr> items_;
};

struct BoardConfig {
  std::uint32_t peers = 4;
  std::uint32_t threshold = 3;
  std::string seed = "wbb";
};

struct LookupEntry {
  ItemPtr item;
  std::optional<InclusionProof> proof;  // absent until a checkpoint covers it
};

/// The sequencer: orders items, enforces the serial rules, replicates to the
/// peers, and returns a receipt only once `threshold` peers have signed.
class BulletinBoard {
 public:
  explicit BulletinBoard(BoardConfig config = {});

  /// Appends and returns a receipt. An exact replay of an item already in
  /// the log (same kind, serial, payload) returns that item's receipt.
  /// Errors: Conflict (serial rules), Unavailable (< threshold live peers).
  SignedReceipt append(ItemKind kind, const std::string& serial, std::string payload);

  std::vector<LookupEntry> lookup(const std::string& serial) const;
  ItemPtr item(std::uint64_t seq) const;  // nullptr if out of range
  std::optional<SerialState> serial_state(const std::string& serial) const;

  /// Closes the current period over every item since the last checkpoint.
  Checkpoint checkpoint();

  std::vector<ItemPtr> items() const;
  std::vector<Checkpoint> checkpoints() const;
  PeerDirectory directory() const;
  CheckpointFile checkpoint_file() const { return {directory(), checkpoints()}; }
  std::uint64_t size() const;

  /// Called for each newly sequenced item, under the board's write lock:
  /// listeners must not call back into the board.
  using Listener = std::function<void(const WbbItem&)>;
  void subscribe(Listener listener);

  void set_time(std::uint64_t t) { now_ = t; }
  std::uint64_t time() const { return now_; }

  std::size_t peer_count() const { return peers_.size(); }
  Peer& peer(std::size_t i) { return *peers_.at(i); }
  const Peer& peer(std::size_t i) const { return *peers_.at(i); }
  void crash_peer(std::size_t i);
  void restart_peer(std::size_t i);
  std::size_t live_peers() const;

 private:
  SignedReceipt collect_signatures(SignedReceipt receipt, const ItemPtr& item, bool fresh);

  BoardConfig config_;
  std::vector<std::unique_ptr<Peer>> peers_;
  std::atomic<std::uint64_t> now_ = 0;
  mutable std::shared_mutex mu_;
  std::vector<ItemPtr> items_;
  std::unordered_map<std::string, std::vector<std::uint64_t>> by_serial_;
  SerialStateMachine rules_;
  std::vector<Checkpoint> checkpoints_;
  std::uint64_t last_timestamp_ = 0;
  std::vector<Listener> listeners_;
};

/// Outcome of replaying a published log against its checkpoints.
struct ChainReport {
  bool ok = true;
  std::vector<std::string> problems;
  std::optional<std::uint64_t> first_bad_seq;

  void add(std::string problem, std::optional<std::uint64_t> seq = std::nullopt);
};

/// Checks dense sequencing, payload hashes, hash links, the serial rules,
/// checkpoint coverage, roots, chaining and signatures. With
/// `require_full_coverage`, every item must sit under some checkpoint.
ChainReport verify_chain(const std::vector<ItemPtr>& items, const CheckpointFile& checkpoints,
                         bool require_full_coverage = true);

}  // namespace vvote::wbb
