// pack3d: dataset generation, experiment runs, stability benchmarking and
// the HTTP service.

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "pack3d/error.hpp"
#include "pack3d/runner.hpp"
#include "pack3d/search.hpp"
#include "pack3d/stability_bench.hpp"
#include "service.hpp"

namespace fs = std::filesystem;
using namespace pack3d;

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

std::vector<ItemSequence> load_dir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ItemSequence> seqs;
  seqs.reserve(files.size());
  for (const auto& f : files) seqs.push_back(load_sequence(f.string()));
  return seqs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online 3D bin packing engine"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate item sequences");
  std::string dist = "rs";
  std::uint64_t gen_seed = 1;
  int count = 1;
  std::string gen_bin = "100x100x100";
  std::string out_dir = ".";
  gen->add_option("--dist", dist, "rs, cut1 or cut2")
      ->check(CLI::IsMember({"rs", "cut1", "cut2"}));
  gen->add_option("--seed", gen_seed, "First seed; file i uses seed + i");
  gen->add_option("--count", count)->check(CLI::NonNegativeNumber);
  gen->add_option("--bin", gen_bin, "LxWxH");
  gen->add_option("--out", out_dir)->required();

  // run
  auto* run = app.add_subcommand("run", "Run a policy over a directory of sequences");
  RunOptions ro;
  std::string stability = "full";
  std::string seqs_dir;
  std::string report_path;
  run->add_option("--policy", ro.policy)->check(CLI::IsMember(policy_names()));
  run->add_option("--k", ro.k)->check(CLI::PositiveNumber);
  run->add_option("--stability", stability)->check(CLI::IsMember({"full", "current-only"}));
  run->add_option("--mcts-m", ro.policy_options.mcts_m)->check(CLI::PositiveNumber);
  run->add_option("--mcts-clones", ro.policy_options.mcts_clones)->check(CLI::PositiveNumber);
  run->add_option("--sampler", ro.policy_options.sampler)
      ->check(CLI::IsMember({"normal", "random", "invx", "geom5", "geomfifth", "fixed"}));
  run->add_option("--seed", ro.policy_options.seed, "Policy seed");
  run->add_option("--audit-rate", ro.oracle_audit_rate,
                  "Fraction of placements re-checked by the equilibrium oracle")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--workers", ro.workers, "Episodes run concurrently")
      ->check(CLI::PositiveNumber);
  run->add_option("--seqs", seqs_dir)->required()->check(CLI::ExistingDirectory);
  run->add_option("--report", report_path)->required();

  // stability-bench
  auto* sb = app.add_subcommand("stability-bench", "Compare stability verdicts with the oracle");
  StabilityBenchOptions so;
  std::string sb_bin = "100x100x100";
  std::string sb_report;
  sb->add_option("--stacks", so.stacks)->check(CLI::PositiveNumber);
  sb->add_option("--items", so.items)->check(CLI::PositiveNumber);
  sb->add_option("--seed", so.seed);
  sb->add_option("--bin", sb_bin, "LxWxH");
  sb->add_option("--report", sb_report, "Write the JSON report here");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the episode HTTP API");
  service::ServiceConfig sc;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string serve_bin = "10x10x10";
  std::string serve_stability = "full";
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);
  serve->add_option("--policy", sc.policy)->check(CLI::IsMember(policy_names()));
  serve->add_option("--k", sc.k)->check(CLI::PositiveNumber);
  serve->add_option("--bin", serve_bin, "Default bin for new episodes");
  serve->add_option("--stability", serve_stability)
      ->check(CLI::IsMember({"full", "current-only"}));
  serve->add_option("--mcts-m", sc.policy_options.mcts_m)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const BinConfig bin = parse_bin(gen_bin);
      const Provenance p = provenance_from_string(dist);
      const ItemRegistry reg = ItemRegistry::default_for(bin);
      fs::create_directories(out_dir);
      for (int i = 0; i < count; ++i) {
        const std::uint64_t seed = gen_seed + static_cast<std::uint64_t>(i);
        const ItemSequence seq = generate(reg, bin, seed, p);
        save_sequence((fs::path(out_dir) / (dist + "_" + std::to_string(seed) + ".jsonl")).string(),
                      seq);
      }
      std::cout << "wrote " << count << " sequence(s) to " << out_dir << "\n";
      return 0;
    }
    if (*run) {
      ro.mode = stability_mode_from_string(stability);
      const RunReport report = run_sequences(load_dir(seqs_dir), ro);
      std::ofstream out(report_path);
      if (!out) throw Error("cannot write " + report_path);
      out << report_json(report) << "\n";
      print_report_table(std::cout, report);
      return 0;
    }
    if (*sb) {
      so.bin = parse_bin(sb_bin);
      const StabilityBenchReport r = run_stability_bench(so);
      const std::string text = bench_report_json(r);
      if (!sb_report.empty()) {
        std::ofstream out(sb_report);
        if (!out) throw Error("cannot write " + sb_report);
        out << text << "\n";
      }
      std::cout << text << "\n";
      return 0;
    }
    if (*serve) {
      sc.bin = parse_bin(serve_bin);
      sc.mode = stability_mode_from_string(serve_stability);
      service::Service svc(sc);
      httplib::Server server;
      svc.mount(server);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      if (!server.bind_to_port(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 3;
      }
      std::cout << "listening on " << host << ":" << port << std::endl;
      server.listen_after_bind();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
