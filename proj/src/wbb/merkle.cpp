#include "vvote/wbb/merkle.hpp"

namespace vvote::wbb {

namespace {
std::uint64_t split_point(std::uint64_t n) {
  std::uint64_t k = 1;
  while (k * 2 < n) k *= 2;
  return k;
}

Digest subtree_root(std::span<const Digest> items) {
  if (items.size() == 1) return leaf_hash(items[0]);
  auto k = split_point(items.size());
  return node_hash(subtree_root(items.first(k)), subtree_root(items.subspan(k)));
}
}  // namespace

Digest empty_root() { return crypto::sha256(ByteView{}); }

Digest leaf_hash(const Digest& item_hash) {
  const std::uint8_t prefix = 0x00;
  return crypto::Hasher().update(ByteView(&prefix, 1)).update(item_hash).finish();
}

Digest node_hash(const Digest& left, const Digest& right) {
  const std::uint8_t prefix = 0x01;
  return crypto::Hasher().update(ByteView(&prefix, 1)).update(left).update(right).finish();
}

Digest merkle_root(std::span<const Digest> item_hashes) {
  if (item_hashes.empty()) return empty_root();
  return subtree_root(item_hashes);
}

std::vector<Digest> inclusion_path(std::span<const Digest> item_hashes, std::uint64_t index) {
  std::vector<Digest> path;
  while (item_hashes.size() > 1) {
    auto k = split_point(item_hashes.size());
    if (index < k) {
      path.push_back(subtree_root(item_hashes.subspan(k)));
      item_hashes = item_hashes.first(k);
    } else {
      path.push_back(subtree_root(item_hashes.first(k)));
      item_hashes = item_hashes.subspan(k);
      index -= k;
    }
  }
  // collected root-first; verification walks leaf-first
  return {path.rbegin(), path.rend()};
}

bool verify_path(const Digest& item_hash, std::uint64_t index, std::uint64_t size, std::span<const Digest> path,
                 const Digest& root) {
  if (index >= size) return false;
  std::uint64_t fn = index, sn = size - 1;
  Digest r = leaf_hash(item_hash);
  for (const auto& p : path) {
    if (sn == 0) return false;
    if ((fn & 1) || fn == sn) {
      r = node_hash(p, r);
      if (!(fn & 1)) {
        while (fn != 0 && !(fn & 1)) {
          fn >>= 1;
          sn >>= 1;
        }
      }
    } else {
      r = node_hash(r, p);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && r == root;
}

}  // namespace vvote::wbb
