#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vvote/crypto/elgamal.hpp"
#include "vvote/election/manifest.hpp"
#include "vvote/protocol/payloads.hpp"
#include "vvote/wbb/item.hpp"

namespace vvote::tally {

using Row = std::vector<crypto::Ciphertext>;

/// Slot values inside a packed row: 0 for a rank nobody used, canonical
/// index + 1 for a rank held by one position, slot_base - 1 for a rank held
/// by several positions.
inline constexpr std::uint64_t kBlankSlot = 0;
inline std::uint64_t duplicate_slot(const election::PackingRules& p) { return p.slot_base - 1; }

/// Onion ciphertexts in preference order (rank 1 first), blanks dropped.
/// Positions sharing a rank appear in position order.
std::vector<crypto::Ciphertext> preference_ordered(const std::vector<crypto::Ciphertext>& onion,
                                                   const std::vector<std::uint32_t>& ranks);

/// Number of packed ciphertexts per row for an n-candidate race.
std::size_t row_width(std::size_t candidates, const election::PackingRules& p);

/// One fixed-width row: rank k's slot holds the onion entry of the position
/// ranked k (or a blank/duplicate marker), packed homomorphically.
Row encode_row(const crypto::ElGamal& eg, const election::PackingRules& p, const std::vector<crypto::Ciphertext>& onion,
               const std::vector<std::uint32_t>& ranks);

struct RaceBatch {
  std::string race;
  std::size_t width = 0;
  std::vector<Row> rows;
};

struct MixInputs {
  std::map<std::string, RaceBatch> races;  // every manifest race, possibly empty
  std::size_t votes = 0;
  std::size_t excluded = 0;  // quarantined after casting
};

/// Assembles per-race batches from the published log: every VOTE_CAST whose
/// serial was never quarantined, in log order. Throws Validation naming the
/// item for votes that do not match their commitment or the manifest.
MixInputs build_mix_input(const std::vector<wbb::ItemPtr>& log, const protocol::ElectionParams& params);

crypto::Digest batch_hash(const crypto::Group& g, const std::vector<Row>& rows);

}  // namespace vvote::tally
