#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vvote/crypto/hash.hpp"

namespace vvote::wbb {

using crypto::Digest;

/// Root of the empty tree: SHA-256 of the empty string.
Digest empty_root();
Digest leaf_hash(const Digest& item_hash);
Digest node_hash(const Digest& left, const Digest& right);

/// Binary Merkle tree over leaf_hash(items): the left subtree holds the
/// largest power of two strictly below the leaf count.
Digest merkle_root(std::span<const Digest> item_hashes);

/// Sibling hashes from leaf `index` up to the root.
std::vector<Digest> inclusion_path(std::span<const Digest> item_hashes, std::uint64_t index);

bool verify_path(const Digest& item_hash, std::uint64_t index, std::uint64_t size, std::span<const Digest> path,
                 const Digest& root);

}  // namespace vvote::wbb
