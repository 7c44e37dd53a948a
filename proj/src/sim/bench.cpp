#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "vvote/api/server.hpp"
#include "vvote/error.hpp"
#include "vvote/sim/harness.hpp"

namespace vvote::sim {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Marks {
  election::PreferenceVector district;
  election::PreferenceVector region;
};

Marks marks_for(const ballot::PrintedCandidateList& cl) {
  std::vector<std::uint32_t> d(cl.races[0].candidate_ids.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<std::uint32_t>(i + 1);
  return {election::PreferenceVector::district(cl.races[0].race, d),
          election::PreferenceVector::atl(cl.races[1].race, 0)};
}

json post(httplib::Client& c, const std::string& path, const json& body, bool put = false) {
  auto res = put ? c.Put(path, body.dump(), "application/json") : c.Post(path, body.dump(), "application/json");
  require(bool(res), ErrorCode::Unavailable, "no response from " + path);
  auto j = json::parse(res->body);
  if (res->status >= 300) fail(ErrorCode::Unavailable, path + ": " + j.value("message", res->body));
  return j;
}

}  // namespace

json to_json(const BenchResult& b) {
  return {{"accepted", b.accepted},
          {"seconds", b.seconds},
          {"windows", b.windows},
          {"per_10s", b.per_10s},
          {"append_ms",
           {{"samples", b.append_ms.samples},
            {"p50", b.append_ms.p50},
            {"p90", b.append_ms.p90},
            {"p99", b.append_ms.p99},
            {"max", b.append_ms.max}}}};
}

BenchResult benchmark_throughput(const BenchConfig& cfg) {
  require(cfg.seconds > 0 && cfg.concurrency >= 1, ErrorCode::Parameter, "need a positive duration and concurrency");
  ScenarioConfig sc;
  sc.manifest = cfg.manifest;
  sc.seed = cfg.seed;
  Deployment d(load_scenario_manifest(cfg.manifest), sc);
  const auto& m = d.params.manifest;

  std::unique_ptr<api::ApiServer> server;
  int port = 0;
  if (cfg.http) {
    server = std::make_unique<api::ApiServer>(api::Services{&d.params, d.board.get(), d.ballots.get(), d.capture.get()});
    port = server->start();
  }

  std::mutex mu;
  std::vector<double> latencies;
  std::vector<double> accepted_at;
  std::atomic<bool> failed = false;
  std::string failure;
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.seconds));

  auto worker = [&](unsigned w) {
    std::unique_ptr<httplib::Client> client;
    if (cfg.http) {
      client = std::make_unique<httplib::Client>("127.0.0.1", port);
      client->set_keep_alive(true);
      client->set_tcp_nodelay(true);
    }
    std::size_t k = w;
    try {
      while (Clock::now() < deadline && !failed) {
        const auto& district = m.districts[k++ % m.districts.size()].id;
        double ms = 0;
        if (cfg.http) {
          auto cl = post(*client, "/ballot", {{"district", district}});
          auto s = post(*client, "/session", {{"qr", cl.at("qr")}});
          const auto id = s.at("id").get<std::string>();
          std::vector<std::uint32_t> ranks(cl.at("races")[0].at("candidate_ids").size());
          for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = static_cast<std::uint32_t>(i + 1);
          post(*client, "/session/" + id + "/prefs",
               {{"district", election::to_json(election::PreferenceVector::district(cl.at("races")[0].at("race"), ranks))},
                {"region", election::to_json(election::PreferenceVector::atl(cl.at("races")[1].at("race"), 0))}},
               true);
          auto t0 = Clock::now();
          post(*client, "/session/" + id + "/submit", json::object());
          ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        } else {
          auto b = d.ballots->issue(district);
          auto s = d.capture->start_session(b.cl.qr);
          auto marks = marks_for(b.cl);
          d.capture->record_preferences(s.id, marks.district, marks.region);
          auto t0 = Clock::now();
          d.capture->submit(s.id);
          ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
          d.capture->close(s.id);
        }
        const auto now = Clock::now();
        if (now > deadline) break;
        std::lock_guard lock(mu);
        latencies.push_back(ms);
        accepted_at.push_back(std::chrono::duration<double>(now - start).count());
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      if (!failed.exchange(true)) failure = e.what();
    }
  };

  std::vector<std::thread> threads;
  for (unsigned w = 0; w < cfg.concurrency; ++w) threads.emplace_back(worker, w);
  for (auto& t : threads) t.join();
  if (server) server->stop();
  require(!failed, ErrorCode::Unavailable, "benchmark worker failed: " + failure);

  BenchResult r;
  r.accepted = accepted_at.size();
  r.seconds = cfg.seconds;
  r.windows.assign(static_cast<std::size_t>(cfg.seconds / 10), 0);
  for (double t : accepted_at) {
    auto w = static_cast<std::size_t>(t / 10);
    if (w < r.windows.size()) ++r.windows[w];
  }
  r.per_10s = static_cast<double>(r.accepted) / cfg.seconds * 10;
  r.append_ms = percentiles(std::move(latencies));
  return r;
}

}  // namespace vvote::sim
