// Command-line front end: `run` executes an experiment config, `summarize`
// reduces a result table to quartile rows, `paths` inspects routing on a
// topology, and `oracle` exposes the brute-force reference implementations.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "anonsim/experiment.hpp"
#include "anonsim/synth.hpp"
#include "anonsim/t6_reference.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw anonsim::Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

anonsim::topology::AsGraph load_topology(const std::string& path) {
  return anonsim::topology::AsGraph::parse_serial2(slurp(path));
}

void print_path(const std::optional<anonsim::AsPath>& p) {
  if (!p) {
    std::cout << "unreachable\n";
    return;
  }
  std::cout << anonsim::path_to_string(*p) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace anonsim;

  CLI::App app{"AS-level routing and anonymity-attack simulation lab"};
  app.require_subcommand(1);

  // --- run ---
  std::string run_config;
  std::string run_out_dir = ".";
  unsigned run_threads = 1;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", run_config, "experiment config (JSON)")->required();
  run->add_option("--out-dir", run_out_dir, "output directory (default .)");
  run->add_option("--threads", run_threads, "worker threads for trials (default 1)");

  // --- summarize ---
  std::string sum_results;
  std::string sum_group_by;
  auto* summarize = app.add_subcommand("summarize", "quartile summaries of a result table");
  summarize->add_option("results", sum_results, "results CSV")->required();
  summarize->add_option("--group-by", sum_group_by, "column to group by")->required();

  // --- paths ---
  std::string paths_topo;
  AsId paths_src = 0, paths_dst = 0;
  std::size_t paths_max_peer = 1, paths_max_len = 8;
  bool paths_enumerate = false;
  auto* paths = app.add_subcommand("paths", "best path (or all routable paths) between two ASes");
  paths->add_option("topology", paths_topo, "serial-2 relationship file")->required();
  paths->add_option("src", paths_src, "source AS")->required();
  paths->add_option("dst", paths_dst, "destination AS")->required();
  paths->add_flag("--enumerate", paths_enumerate, "list all routable paths");
  paths->add_option("--max-peer", paths_max_peer, "peer-link budget (default 1)");
  paths->add_option("--max-len", paths_max_len, "max path length in ASes (default 8)");

  // --- oracle ---
  auto* oracle = app.add_subcommand("oracle", "brute-force reference implementations");
  oracle->require_subcommand(1);

  std::string obp_topo;
  AsId obp_src = 0, obp_dst = 0;
  auto* obp = oracle->add_subcommand("best-path", "fixed-point route selection");
  obp->add_option("topology", obp_topo)->required();
  obp->add_option("src", obp_src)->required();
  obp->add_option("dst", obp_dst)->required();

  std::string oen_topo;
  AsId oen_src = 0, oen_dst = 0;
  std::size_t oen_max_peer = 1, oen_max_len = 8;
  auto* oen = oracle->add_subcommand("enumerate", "exhaustive valley-free path enumeration");
  oen->add_option("topology", oen_topo)->required();
  oen->add_option("src", oen_src)->required();
  oen->add_option("dst", oen_dst)->required();
  oen->add_option("--max-peer", oen_max_peer);
  oen->add_option("--max-len", oen_max_len);

  std::string ohj_topo;
  AsId ohj_origin = 0, ohj_attacker = 0;
  auto* ohj = oracle->add_subcommand("hijack", "per-AS verdicts of an origin hijack");
  ohj->add_option("topology", ohj_topo)->required();
  ohj->add_option("origin", ohj_origin)->required();
  ohj->add_option("attacker", ohj_attacker)->required();

  std::string ore_topo;
  AsId ore_client = 0, ore_guard = 0;
  auto* ore = oracle->add_subcommand("resilience", "per-attacker brute-force resilience");
  ore->add_option("topology", ore_topo)->required();
  ore->add_option("client", ore_client)->required();
  ore->add_option("guard_as", ore_guard)->required();

  std::string t6_topo = "fixtures/t6.txt";
  std::string t6_out;
  auto* t6cmd = oracle->add_subcommand("t6-table", "oracle-derived reference table for the T6 fixture");
  t6cmd->add_option("--topology", t6_topo, "fixture path (default fixtures/t6.txt)");
  t6cmd->add_option("--out", t6_out, "write JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      experiment::RunOptions opts;
      opts.out_dir = run_out_dir;
      opts.threads = run_threads;
      auto result = experiment::run_experiment(run_config, opts);
      std::cout << "wrote " << result.csv_path.string() << "\n";
      std::cout << "wrote " << result.meta_path.string() << "\n";
    } else if (*summarize) {
      std::cout << experiment::summarize_csv(slurp(sum_results), sum_group_by);
    } else if (*paths) {
      auto g = load_topology(paths_topo);
      if (paths_enumerate) {
        for (const auto& p :
             topology::routable_paths(g, paths_src, paths_dst, paths_max_peer, paths_max_len))
          std::cout << path_to_string(p) << "\n";
      } else {
        print_path(topology::best_path(g, paths_src, paths_dst));
      }
    } else if (*obp) {
      auto g = load_topology(obp_topo);
      print_path(synth::oracle_best_path(g, obp_src, obp_dst));
    } else if (*oen) {
      auto g = load_topology(oen_topo);
      for (const auto& p :
           synth::oracle_enumerate_paths(g, oen_src, oen_dst, oen_max_peer, oen_max_len))
        std::cout << path_to_string(p) << "\n";
    } else if (*ohj) {
      auto g = load_topology(ohj_topo);
      for (const auto& [as, hit] : synth::oracle_hijack(g, ohj_origin, ohj_attacker))
        std::cout << as << (hit ? " hijacked" : " safe") << "\n";
    } else if (*ore) {
      auto g = load_topology(ore_topo);
      auto rc = synth::oracle_resilience(g, ore_client, ore_guard);
      std::cout << rc.safe << "/" << rc.candidates << " = "
                << csv::format_double(rc.value()) << "\n";
    } else if (*t6cmd) {
      auto g = load_topology(t6_topo);
      auto table = t6::t6_reference(g);
      if (t6_out.empty()) {
        std::cout << table.dump(2) << "\n";
      } else {
        std::ofstream out(t6_out, std::ios::binary);
        out << table.dump(2) << "\n";
        std::cout << "wrote " << t6_out << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
