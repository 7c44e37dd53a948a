#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "json.hpp"
#include "vvote/ballot/ballot_service.hpp"
#include "vvote/capture/capture_service.hpp"
#include "vvote/error.hpp"
#include "vvote/protocol/payloads.hpp"
#include "vvote/wbb/board.hpp"

namespace httplib {
class Server;
}

namespace vvote::api {

/// Services behind the HTTP endpoints. Not owned.
struct Services {
  const protocol::ElectionParams* params = nullptr;
  wbb::BulletinBoard* board = nullptr;
  ballot::BallotService* ballots = nullptr;
  capture::CaptureService* capture = nullptr;
};

int http_status(ErrorCode code);
/// Upper-case token sent in error bodies, e.g. "CONFLICT".
std::string_view error_token(ErrorCode code);

nlohmann::json to_json(const ballot::IssuedBallot& b);
nlohmann::json lookup_json(const wbb::BulletinBoard& board, const std::string& serial);

/// JSON over HTTP for the bulletin board, ballot service and capture
/// service. Errors come back as {"error": token, "message": text}.
///
///   GET  /election                     election parameters
///   GET  /wbb/log                      NDJSON log
///   GET  /wbb/checkpoints              checkpoint file
///   POST /wbb/checkpoint               close the current period
///   GET  /wbb/items/{seq}
///   POST /wbb/items                    {kind, serial, payload} -> receipt
///   GET  /wbb/lookup/{serial}          items with inclusion proofs
///   POST /ballot                       {district} -> candidate list
///   POST /ballot/{serial}/audit
///   GET  /ballot/{serial}/status
///   POST /session                      {qr, mode}
///   PUT  /session/{id}/prefs           {district, region}
///   POST /session/{id}/submit          -> preference receipt
///   POST /session/{id}/quarantine      {reason}
///   GET  /session/{id}
class ApiServer {
 public:
  explicit ApiServer(Services services);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  void mount();

  Services s_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace vvote::api
