#pragma once

#include <memory>

#include "vvote/ballot/ballot_service.hpp"
#include "vvote/crypto/elgamal.hpp"
#include "vvote/election/manifest.hpp"
#include "vvote/protocol/payloads.hpp"
#include "vvote/wbb/board.hpp"

namespace fixture {

/// A small election wired up with a board, keys and a ballot service.
struct Election {
  vvote::crypto::KeyMaterial keys;
  vvote::protocol::ElectionParams params;
  std::unique_ptr<vvote::wbb::BulletinBoard> board;
  std::unique_ptr<vvote::ballot::BallotService> ballots;

  explicit Election(vvote::election::ElectionManifest m = vvote::election::small_manifest(),
                    std::string seed = "fixture", std::uint32_t stages = 2) {
    using namespace vvote;
    auto group = crypto::test_group();
    keys = crypto::keygen(group, 3, 2, as_bytes(seed));
    params.manifest = std::move(m);
    params.group_name = group->name();
    params.group = group;
    params.keys = keys.public_keys;
    params.ballot_key = crypto::SigningKey::from_seed(seed + "/ballot").public_key();
    params.wbb_endpoint = "http://localhost/wbb";
    params.mix_stages = stages;
    board = std::make_unique<wbb::BulletinBoard>(wbb::BoardConfig{4, 3, seed + "/wbb"});
    board->append(wbb::ItemKind::Manifest, "", protocol::encode_params(params));
    ballots = std::make_unique<ballot::BallotService>(params, *board, seed + "/ballot", seed + "/rng");
  }

  vvote::crypto::ElGamal elgamal() const { return params.elgamal(); }
  const std::string& first_district() const { return params.manifest.districts.front().id; }
};

}  // namespace fixture
