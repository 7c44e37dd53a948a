#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vvote/api/server.hpp"
#include "vvote/error.hpp"
#include "vvote/sim/harness.hpp"
#include "vvote/tally/decrypt.hpp"
#include "vvote/tally/irv.hpp"
#include "vvote/verify/verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vvote;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(bool(in), ErrorCode::NotFound, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  require(bool(out), ErrorCode::Parameter, "cannot write " + p.string());
  out << text;
}

std::vector<crypto::TrusteeShare> load_shares(const std::vector<std::string>& files, const crypto::Group& g) {
  std::vector<crypto::TrusteeShare> out;
  for (const auto& f : files) {
    auto j = protocol::parse_json(slurp(f), f);
    if (j.contains("shares"))
      for (const auto& s : j.at("shares")) out.push_back(tally::trustee_share_from_json(g, s));
    else
      out.push_back(tally::trustee_share_from_json(g, j));
  }
  return out;
}

int sim_run(const std::string& config, bool replica, const std::string& out) {
  auto cfg = replica ? sim::deployment_replica() : sim::scenario_from_json(protocol::parse_json(slurp(config), config));
  auto report = sim::run_election(cfg);
  std::cout << report.render_text();
  if (!out.empty()) {
    sim::write_run(report, out);
    std::cout << "written to " << out << "\n";
  }
  return !report.verification || report.verification->passed() ? 0 : 1;
}

int mix_run(const std::string& log_file, std::string checkpoint_file, const std::vector<std::string>& share_files,
            const std::string& out, const std::string& seed) {
  if (checkpoint_file.empty()) checkpoint_file = (fs::path(log_file).parent_path() / "checkpoints.json").string();
  verify::PublishedArtifacts a;
  a.log = verify::load_log(log_file);
  a.checkpoints = wbb::checkpoint_file_from_json(protocol::parse_json(slurp(checkpoint_file), checkpoint_file));
  require(!a.checkpoints.checkpoints.empty(), ErrorCode::State, "no checkpoint: close voting before mixing");
  const auto params = verify::params_from_log(a.log);
  const auto& g = *params.group;
  const auto& m = params.manifest;
  const auto shares = load_shares(share_files, g);
  const auto eg = params.elgamal();
  crypto::DecodeTable table(g, params.table_bound());
  const auto checkpoint = a.checkpoints.checkpoints.back().hash();

  auto inputs = tally::build_mix_input(a.log, params);
  crypto::Drbg rng{std::string_view(seed)};
  std::map<std::string, std::vector<tally::VoteRecord>> houses = {{verify::kDistrictHouse, {}},
                                                                  {verify::kRegionHouse, {}}};
  std::vector<tally::VoteRecord> all;
  for (const auto& race : m.races) {
    const auto& batch = inputs.races.at(race.id);
    auto t = tally::mix(batch, params.mix_stages, eg, checkpoint, rng);
    auto rec = tally::decrypt_batch(g, race.id, t.output(), shares, params.keys.threshold, table);
    for (const auto& row : rec.rows) {
      auto v = tally::decode_record(race, row.plaintexts, m.packing);
      houses[verify::house_of(race)].push_back(v);
      all.push_back(std::move(v));
    }
    a.transcripts[race.id] = std::move(t);
    a.decryptions[race.id] = std::move(rec);
  }
  for (auto& [house, records] : houses) a.exports[house] = tally::export_votes(std::move(records));
  verify::save_artifacts(a, out);
  auto result = tally::tally(m, all);
  spit(fs::path(out) / "tally.json", tally::to_json(result).dump(1));
  std::cout << inputs.votes << " votes mixed (" << inputs.excluded << " quarantined excluded), formal "
            << result.formal << ", informal " << result.informal << "\n";
  for (const auto& r : result.races)
    if (r.winner) std::cout << r.race << ": " << *r.winner << " by " << r.margin << "\n";
  return 0;
}

int verify_all(const std::string& dir, const std::string& receipts_dir, const std::string& json_out) {
  auto a = verify::load_artifacts(dir);
  std::vector<capture::PreferenceReceipt> receipts;
  if (!receipts_dir.empty())
    for (const auto& e : fs::directory_iterator(receipts_dir))
      if (e.path().extension() == ".json")
        receipts.push_back(capture::preference_receipt_from_json(protocol::parse_json(slurp(e.path()), e.path().string())));
  auto report = verify::verify_election(a, receipts);
  std::cout << report.render_text();
  if (!json_out.empty()) spit(json_out, verify::to_json(report).dump(1));
  return report.passed() ? 0 : 1;
}

int verify_receipt(const std::string& file, const std::string& dir) {
  auto pr = capture::preference_receipt_from_json(protocol::parse_json(slurp(file), file));
  auto log = verify::load_log(fs::path(dir) / "wbb_log.ndjson");
  auto cps = wbb::checkpoint_file_from_json(protocol::parse_json(slurp(fs::path(dir) / "checkpoints.json"), "checkpoints"));
  auto r = verify::check_receipt(pr, log, cps);
  std::cout << pr.serial << ": " << verify::to_string(r.status) << (r.detail.empty() ? "" : " (" + r.detail + ")")
            << "\n";
  return r.ok() ? 0 : 1;
}

int verify_stats(double rate, std::uint64_t changes, std::optional<std::uint64_t> margin, std::uint64_t trials,
                 const std::string& seed) {
  verify::ConfidenceQuery q{rate, changes, margin};
  const double p = verify::detection_confidence(q);
  std::cout << std::setprecision(6);
  if (margin) std::cout << "margin " << *margin << " needs " << verify::min_changes_to_flip(*margin) << " alterations\n";
  std::cout << "detection " << p << ", non-detection " << 1 - p << "\n";
  if (trials > 0) {
    crypto::Drbg rng{std::string_view(seed)};
    std::cout << "monte carlo (" << trials << " trials) " << verify::detection_monte_carlo(q, trials, rng) << "\n";
  }
  return 0;
}

api::ApiServer* g_server = nullptr;

int serve(int port, const std::string& manifest, const std::string& seed) {
  sim::ScenarioConfig cfg;
  cfg.manifest = manifest;
  cfg.seed = seed;
  sim::Deployment d(sim::load_scenario_manifest(manifest), cfg);
  api::ApiServer server({&d.params, d.board.get(), d.ballots.get(), d.capture.get()});
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "serving election " << d.params.manifest.name << " on 127.0.0.1:" << port << "\n";
  for (const auto& dist : d.params.manifest.districts) std::cout << "  district " << dist.id << "\n";
  std::cout.flush();
  server.listen("127.0.0.1", port);
  g_server = nullptr;
  return 0;
}

int bench(double seconds, unsigned concurrency, bool http, const std::string& json_out) {
  auto r = sim::benchmark_throughput({seconds, concurrency, http});
  std::cout << std::fixed << std::setprecision(1) << r.accepted << " votes in " << r.seconds << " s, " << r.per_10s
            << " per 10 s window";
  for (std::size_t i = 0; i < r.windows.size(); ++i) std::cout << (i ? ", " : " [") << r.windows[i];
  std::cout << (r.windows.empty() ? "" : "]") << "\n";
  std::cout << std::setprecision(3) << "append latency ms p50 " << r.append_ms.p50 << " p90 " << r.append_ms.p90
            << " p99 " << r.append_ms.p99 << " (reference 300)\n";
  if (!json_out.empty()) spit(json_out, sim::to_json(r).dump(1));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vvote: verifiable supervised voting toolkit"};
  app.require_subcommand(1);

  auto* sim_cmd = app.add_subcommand("sim", "simulated elections");
  sim_cmd->require_subcommand(1);
  auto* sim_run_cmd = sim_cmd->add_subcommand("run", "run a scenario end to end");
  std::string config, out;
  bool replica = false;
  sim_run_cmd->add_option("--config", config, "scenario JSON");
  sim_run_cmd->add_flag("--replica", replica, "use the built-in 1121-voter deployment replica");
  sim_run_cmd->add_option("--out", out, "output directory");

  auto* mix_cmd = app.add_subcommand("mix", "post-election mixing and decryption");
  mix_cmd->require_subcommand(1);
  auto* mix_run_cmd = mix_cmd->add_subcommand("run", "mix, decrypt, export and tally a closed log");
  std::string log_file, checkpoint_file, mix_seed = "mix";
  std::vector<std::string> share_files;
  mix_run_cmd->add_option("--wbb-log", log_file, "NDJSON log")->required();
  mix_run_cmd->add_option("--checkpoints", checkpoint_file, "checkpoint file (default: next to the log)");
  mix_run_cmd->add_option("--shares", share_files, "trustee share files")->required();
  mix_run_cmd->add_option("--out", out, "published directory to write")->required();
  mix_run_cmd->add_option("--seed", mix_seed, "mixer randomness seed");

  auto* verify_cmd = app.add_subcommand("verify", "public verification");
  verify_cmd->require_subcommand(1);
  auto* verify_all_cmd = verify_cmd->add_subcommand("all", "verify a published directory");
  std::string dir, receipts_dir, json_out;
  verify_all_cmd->add_option("--dir", dir, "published directory")->required();
  verify_all_cmd->add_option("--receipts", receipts_dir, "directory of voter receipts");
  verify_all_cmd->add_option("--json", json_out, "write the report as JSON");
  auto* verify_receipt_cmd = verify_cmd->add_subcommand("receipt", "check one preference receipt");
  std::string receipt_file;
  verify_receipt_cmd->add_option("--file", receipt_file, "receipt JSON")->required();
  verify_receipt_cmd->add_option("--dir", dir, "published directory")->required();
  auto* verify_stats_cmd = verify_cmd->add_subcommand("stats", "detection probability calculator");
  double rate = 0;
  std::uint64_t changes = 0, trials = 0;
  std::optional<std::uint64_t> margin;
  std::string stats_seed = "stats";
  verify_stats_cmd->add_option("--rate", rate, "fraction of receipts checked")->required()->check(CLI::Range(0.0, 1.0));
  verify_stats_cmd->add_option("--changes", changes, "altered votes");
  verify_stats_cmd->add_option("--margin", margin, "final-round margin");
  verify_stats_cmd->add_option("--monte-carlo", trials, "also estimate by simulation");
  verify_stats_cmd->add_option("--seed", stats_seed, "simulation seed");

  auto* serve_cmd = app.add_subcommand("serve", "serve the HTTP API for a fresh election");
  int port = 8080;
  std::string manifest = "small", serve_seed = "serve";
  serve_cmd->add_option("--port", port, "TCP port");
  serve_cmd->add_option("--manifest", manifest, "small, reference, or a manifest JSON path");
  serve_cmd->add_option("--seed", serve_seed, "key and randomness seed");

  auto* bench_cmd = app.add_subcommand("bench", "vote-casting throughput");
  double seconds = 10;
  unsigned concurrency = 1;
  bool http = false;
  bench_cmd->add_option("--seconds", seconds, "duration");
  bench_cmd->add_option("--concurrency", concurrency, "parallel voters");
  bench_cmd->add_flag("--http", http, "go through the HTTP API");
  bench_cmd->add_option("--json", json_out, "write results as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_run_cmd->parsed()) {
      if (config.empty() && !replica) throw CLI::RequiredError("--config or --replica");
      return sim_run(config, replica, out);
    }
    if (mix_run_cmd->parsed()) return mix_run(log_file, checkpoint_file, share_files, out, mix_seed);
    if (verify_all_cmd->parsed()) return verify_all(dir, receipts_dir, json_out);
    if (verify_receipt_cmd->parsed()) return verify_receipt(receipt_file, dir);
    if (verify_stats_cmd->parsed()) {
      if (changes == 0 && !margin) throw CLI::RequiredError("--changes or --margin");
      return verify_stats(rate, changes, margin, trials, stats_seed);
    }
    if (serve_cmd->parsed()) return serve(port, manifest, serve_seed);
    if (bench_cmd->parsed()) return bench(seconds, concurrency, http, json_out);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
