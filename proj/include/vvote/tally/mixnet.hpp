#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vvote/crypto/drbg.hpp"
#include "vvote/crypto/elgamal.hpp"
#include "vvote/tally/mix_input.hpp"

namespace vvote::tally {

/// Reveals how one output row of a stage was produced.
struct LinkOpening {
  std::uint64_t output = 0;
  std::uint64_t source = 0;
  std::vector<crypto::Scalar> randomness;  // one per ciphertext in the row
  crypto::Digest salt{};
};

struct MixStage {
  std::vector<Row> output;
  std::vector<crypto::Digest> link_commitments;  // per output row
  crypto::Digest commitment{};
  std::vector<LinkOpening> openings;  // sorted by output index
};

/// Re-encryption shuffle in paired stages with randomized partial checking:
/// for every row between the two stages of a pair, exactly one of its two
/// links is opened, chosen by a challenge that hashes the final checkpoint
/// and every stage commitment.
struct MixTranscript {
  std::string race;
  std::size_t width = 0;
  crypto::Digest checkpoint{};
  std::vector<MixStage> stages;

  const std::vector<Row>& output() const { return stages.back().output; }
};

/// Test hook for a dishonest mixer: replaces one output row of a stage
/// before anything is committed.
struct MixCheat {
  std::size_t stage = 0;
  std::size_t row = 0;
  Row replacement;
};

/// Mixes through `stages` stages (even, >= 2). An empty batch gives stages
/// with empty outputs.
MixTranscript mix(const RaceBatch& input, std::uint32_t stages, const crypto::ElGamal& eg,
                  const crypto::Digest& checkpoint, crypto::Drbg& rng, const std::vector<MixCheat>& cheats = {});

/// Per middle row of pair `pair`: false opens its incoming link, true its outgoing one.
std::vector<bool> challenge_bits(const MixTranscript& t, std::size_t pair);

/// Empty string if the transcript checks out, else the first defect.
std::string check_mix(const RaceBatch& input, const MixTranscript& t, const crypto::ElGamal& eg,
                      const crypto::Digest& checkpoint);
inline bool verify_mix(const RaceBatch& input, const MixTranscript& t, const crypto::ElGamal& eg,
                       const crypto::Digest& checkpoint) {
  return check_mix(input, t, eg, checkpoint).empty();
}

nlohmann::json to_json(const crypto::Group& g, const MixTranscript& t);
MixTranscript mix_transcript_from_json(const crypto::Group& g, const nlohmann::json& j);

}  // namespace vvote::tally
