#include "vvote/api/server.hpp"

#include <functional>

#include "httplib.h"
#include "vvote/verify/verifier.hpp"

namespace vvote::api {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict:
    case ErrorCode::State: return 409;
    case ErrorCode::Unavailable: return 503;
    case ErrorCode::Signature: return 422;
    default: return 400;
  }
}

std::string_view error_token(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parameter: return "PARAMETER";
    case ErrorCode::Encoding: return "ENCODING";
    case ErrorCode::Decode: return "DECODE";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::Conflict: return "CONFLICT";
    case ErrorCode::Unavailable: return "UNAVAILABLE";
    case ErrorCode::Validation: return "VALIDATION";
    case ErrorCode::Signature: return "SIGNATURE";
    case ErrorCode::Format: return "FORMAT";
    case ErrorCode::State: return "STATE";
  }
  return "ERROR";
}

json to_json(const ballot::IssuedBallot& b) {
  json races = json::array();
  for (std::size_t r = 0; r < b.cl.races.size(); ++r)
    races.push_back({{"race", b.cl.races[r].race},
                     {"candidate_ids", b.cl.races[r].candidate_ids},
                     {"names", r < b.cl.names.size() ? b.cl.names[r] : std::vector<std::string>{}}});
  return {{"serial", b.cl.serial},
          {"races", races},
          {"qr", b.cl.qr},
          {"text", b.cl.render_text()},
          {"commitment", wbb::to_json(b.commitment)}};
}

json lookup_json(const wbb::BulletinBoard& board, const std::string& serial) {
  const auto checkpoints = board.checkpoints();
  json items = json::array();
  for (const auto& e : board.lookup(serial)) {
    json j = {{"item", json::parse(wbb::to_ndjson_line(*e.item))}, {"proof", nullptr}, {"checkpoint", nullptr}};
    if (e.proof) {
      j["proof"] = wbb::to_json(*e.proof);
      j["checkpoint"] = wbb::to_json(checkpoints.at(e.proof->period));
    }
    items.push_back(j);
  }
  return {{"serial", serial}, {"items", items}};
}

namespace {

using Handler = std::function<json(const httplib::Request&)>;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
  return [h = std::move(h), ok_status](const httplib::Request& req, httplib::Response& res) {
    try {
      reply(res, ok_status, h(req));
    } catch (const Error& e) {
      reply(res, http_status(e.code()), {{"error", error_token(e.code())}, {"message", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", "INTERNAL"}, {"message", e.what()}});
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = protocol::parse_json(req.body, "request body");
  require(j.is_object(), ErrorCode::Format, "request body must be a JSON object");
  return j;
}

std::string string_field(const json& j, const char* name) {
  require(j.contains(name) && j.at(name).is_string(), ErrorCode::Format, std::string("missing string field ") + name);
  return j.at(name).get<std::string>();
}

}  // namespace

ApiServer::ApiServer(Services services) : s_(services), server_(std::make_unique<httplib::Server>()) {
  require(s_.params && s_.board && s_.ballots && s_.capture, ErrorCode::Parameter, "every service is required");
  server_->set_tcp_nodelay(true);
  mount();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::mount() {
  auto& srv = *server_;
  auto s = s_;

  srv.Get("/election", wrap([s](const auto&) {
            auto j = json::parse(protocol::encode_params(*s.params));
            j["manifest_digest"] = s.params->manifest.digest();
            return j;
          }));

  srv.Get("/wbb/log", [s](const httplib::Request&, httplib::Response& res) {
    res.set_content(verify::log_to_ndjson(s.board->items()), "application/x-ndjson");
  });
  srv.Get("/wbb/checkpoints", wrap([s](const auto&) { return wbb::to_json(s.board->checkpoint_file()); }));
  srv.Post("/wbb/checkpoint", wrap([s](const auto&) { return wbb::to_json(s.board->checkpoint()); }, 201));
  srv.Get(R"(/wbb/items/(\d+))", wrap([s](const httplib::Request& req) {
            auto item = s.board->item(std::stoull(req.matches[1].str()));
            require(item != nullptr, ErrorCode::NotFound, "no item " + req.matches[1].str());
            return json::parse(wbb::to_ndjson_line(*item));
          }));
  srv.Post("/wbb/items", wrap(
                             [s](const httplib::Request& req) {
                               auto j = body_of(req);
                               auto kind = wbb::item_kind_from_string(string_field(j, "kind"));
                               auto serial = j.value("serial", std::string());
                               return wbb::to_json(s.board->append(kind, serial, string_field(j, "payload")));
                             },
                             201));
  srv.Get(R"(/wbb/lookup/([^/]+))",
          wrap([s](const httplib::Request& req) { return lookup_json(*s.board, req.matches[1].str()); }));

  srv.Post("/ballot", wrap(
                          [s](const httplib::Request& req) {
                            return to_json(s.ballots->issue(string_field(body_of(req), "district")));
                          },
                          201));
  srv.Post(R"(/ballot/([^/]+)/audit)", wrap([s](const httplib::Request& req) {
             return json::parse(protocol::encode_audit(*s.params->group, s.ballots->audit(req.matches[1].str())));
           }));
  srv.Get(R"(/ballot/([^/]+)/status)", wrap([s](const httplib::Request& req) {
            const auto serial = req.matches[1].str();
            return json{{"serial", serial}, {"status", ballot::to_string(s.ballots->status(serial))}};
          }));

  srv.Post("/session", wrap(
                           [s](const httplib::Request& req) {
                             auto j = body_of(req);
                             auto mode = capture::access_mode_from_string(j.value("mode", std::string("visual")));
                             return capture::to_json(s.capture->start_session(string_field(j, "qr"), mode));
                           },
                           201));
  srv.Put(R"(/session/([^/]+)/prefs)", wrap([s](const httplib::Request& req) {
            auto j = body_of(req);
            require(j.contains("district") && j.contains("region"), ErrorCode::Format,
                    "body needs district and region preferences");
            auto d = election::preference_vector_from_json(j.at("district"));
            auto r = election::preference_vector_from_json(j.at("region"));
            return capture::to_json(s.capture->record_preferences(req.matches[1].str(), d, r));
          }));
  srv.Post(R"(/session/([^/]+)/submit)", wrap([s](const httplib::Request& req) {
             auto pr = s.capture->submit(req.matches[1].str());
             return json{{"receipt", capture::to_json(pr)}, {"text", pr.render_text()}};
           }));
  srv.Post(R"(/session/([^/]+)/quarantine)", wrap([s](const httplib::Request& req) {
             auto reason = body_of(req).value("reason", std::string("voter request"));
             return capture::to_json(s.capture->quarantine(req.matches[1].str(), reason));
           }));
  srv.Get(R"(/session/([^/]+))", wrap([s](const httplib::Request& req) {
            return capture::to_json(s.capture->get(req.matches[1].str()));
          }));
}

int ApiServer::start(const std::string& host, int port) {
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  require(port_ > 0, ErrorCode::Unavailable, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ApiServer::listen(const std::string& host, int port) {
  port_ = port;
  require(server_->listen(host, port), ErrorCode::Unavailable, "cannot listen on " + host + ":" + std::to_string(port));
}

void ApiServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace vvote::api
