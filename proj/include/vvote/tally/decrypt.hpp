#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vvote/crypto/elgamal.hpp"
#include "vvote/tally/mix_input.hpp"

namespace vvote::tally {

struct DecryptedRow {
  std::vector<std::uint64_t> plaintexts;
  std::vector<std::vector<crypto::DecryptionShare>> shares;  // per ciphertext, one per participating trustee
};

struct DecryptionRecord {
  std::string race;
  std::vector<DecryptedRow> rows;  // aligned with the mix output
};

/// Decrypts every ciphertext with the first `threshold` shares given.
/// Fewer shares -> Unavailable.
DecryptionRecord decrypt_batch(const crypto::Group& g, const std::string& race, const std::vector<Row>& rows,
                               std::span<const crypto::TrusteeShare> shares, std::uint32_t threshold,
                               const crypto::DecodeTable& table);

/// Empty if every proof verifies against the trustee keys and every claimed
/// plaintext follows from the shares; else the first defect.
std::string check_decryption(const crypto::Group& g, const std::vector<Row>& rows, const DecryptionRecord& record,
                             const crypto::PublicKeySet& keys, const crypto::DecodeTable& table);

nlohmann::json to_json(const crypto::Group& g, const DecryptionRecord& r);
DecryptionRecord decryption_from_json(const crypto::Group& g, const nlohmann::json& j);

nlohmann::json to_json(const crypto::Group& g, const crypto::TrusteeShare& s);
crypto::TrusteeShare trustee_share_from_json(const crypto::Group& g, const nlohmann::json& j);

}  // namespace vvote::tally
