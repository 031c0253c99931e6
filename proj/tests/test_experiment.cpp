#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "anonsim/experiment.hpp"

using namespace anonsim;
using namespace anonsim::experiment;
namespace fs = std::filesystem;

namespace {

fs::path test_out() {
  auto p = fs::path("build") / "test_out";
  fs::create_directories(p);
  return p;
}

fs::path write_config(const std::string& name, const nlohmann::json& config) {
  auto dir = test_out();
  auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << config.dump(2);
  return path;
}

// rows of a result CSV as (trial, step, metric) -> value
std::map<std::tuple<int, int, std::string>, double> parse_rows(const std::string& csv_text) {
  std::map<std::tuple<int, int, std::string>, double> rows;
  auto lines = csv::split_lines(csv_text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = csv::split_fields(lines[i], ',');
    double v = 0;
    csv::parse_double(f[3], v);
    int trial = 0, step = 0;
    csv::parse_int(f[0], trial);
    csv::parse_int(f[1], step);
    rows[{trial, step, std::string(f[2])}] = v;
  }
  return rows;
}

}  // namespace

TEST(Config, MissingSeedAndUnknownKind) {
  auto no_seed = write_config("no_seed.json", {{"kind", "dovetail"}});
  try {
    run_experiment(no_seed, {test_out(), 1});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }

  auto bad_kind = write_config("bad_kind.json", {{"kind", "nope"}, {"seed", 1}});
  EXPECT_THROW(run_experiment(bad_kind, {test_out(), 1}), ConfigError);

  auto bad_json = test_out() / "bad.json";
  std::ofstream(bad_json) << "{not json";
  EXPECT_THROW(run_experiment(bad_json, {test_out(), 1}), ConfigError);
}

TEST(Config, EveryKindIsCoveredByAShippedConfig) {
  std::map<std::string, int> seen;
  for (const auto& entry : fs::directory_iterator("configs")) {
    if (entry.path().extension() != ".json") continue;
    auto config = nlohmann::json::parse(read_file(entry.path()));
    seen[config.at("kind").get<std::string>()]++;
  }
  for (const auto& kind : experiment_kinds())
    EXPECT_GE(seen[kind], 1) << "no shipped config exercises " << kind;
  int total = 0;
  for (const auto& [kind, n] : seen) total += n;
  EXPECT_EQ(total, 12);
}

TEST(RunExperiment, DenasaInferenceT6CollapsesOnExcludingGuard) {
  auto result = run_experiment("configs/denasa_inference_t6.json", {test_out(), 1});
  auto rows = parse_rows(result.csv);

  auto config = nlohmann::json::parse(read_file("configs/denasa_inference_t6.json"));
  const int n_obs = config.at("n_observations").get<int>();
  const int trials = config.at("trials").get<int>();

  bool any_collapse = false;
  for (int t = 0; t < trials; ++t) {
    double final_p = rows.at({t, n_obs, "true_prob"});
    // once the excluding guard is seen the posterior pins the truth forever
    bool saw_collapse = false;
    for (int k = 0; k <= n_obs; ++k) {
      double p = rows.at({t, k, "true_prob"});
      if (saw_collapse) EXPECT_DOUBLE_EQ(p, 1.0);
      if (p == 1.0) saw_collapse = true;
      EXPECT_GT(p, 0.0);  // the true client never vanishes
    }
    if (final_p == 1.0) any_collapse = true;
  }
  EXPECT_TRUE(any_collapse);
  // the shipped seed makes the very first trial observe g3
  EXPECT_DOUBLE_EQ(rows.at({0, n_obs, "true_prob"}), 1.0);
  EXPECT_DOUBLE_EQ(rows.at({0, n_obs, "entropy_bits"}), 0.0);
}

TEST(RunExperiment, DeterministicBytesAcrossThreadCounts) {
  auto serial = run_experiment("configs/dovetail_t6.json", {test_out() / "s", 1});
  auto parallel = run_experiment("configs/dovetail_t6.json", {test_out() / "p", 4});
  EXPECT_EQ(serial.csv, parallel.csv);
  EXPECT_EQ(serial.meta, parallel.meta);

  auto again = run_experiment("configs/dovetail_t6.json", {test_out() / "s2", 1});
  EXPECT_EQ(serial.csv, again.csv);

  // written files match the in-memory result byte for byte
  EXPECT_EQ(read_file(serial.csv_path), serial.csv);
}

TEST(RunExperiment, DovetailRowsAreMonotone) {
  auto result = run_experiment("configs/dovetail_t6.json", {test_out(), 1});
  auto rows = parse_rows(result.csv);
  auto config = nlohmann::json::parse(read_file("configs/dovetail_t6.json"));
  const int n_conn = config.at("n_connections").get<int>();
  const int trials = config.at("trials").get<int>();
  for (int t = 0; t < trials; ++t)
    for (int k = 2; k <= n_conn; ++k)
      EXPECT_LE(rows.at({t, k, "anonymity_set_size"}),
                rows.at({t, k - 1, "anonymity_set_size"}));
}

TEST(Summarize, ExamplesAndErrors) {
  std::string csv_text =
      "trial,step,metric,value\n"
      "0,1,m,1\n"
      "1,1,m,2\n"
      "2,1,m,3\n"
      "3,1,m,4\n"
      "4,1,m,100\n"
      "0,2,m,7\n";
  auto out = summarize_csv(csv_text, "step");
  EXPECT_NE(out.find("m,1,5,2,3,4,-1,7\n"), std::string::npos);
  EXPECT_NE(out.find("m,2,1,7,7,7,7,7\n"), std::string::npos);  // group of one

  // permuting rows changes nothing
  std::string shuffled =
      "trial,step,metric,value\n"
      "0,2,m,7\n"
      "4,1,m,100\n"
      "2,1,m,3\n"
      "0,1,m,1\n"
      "3,1,m,4\n"
      "1,1,m,2\n";
  EXPECT_EQ(summarize_csv(shuffled, "step"), out);

  EXPECT_THROW(summarize_csv(csv_text, "nonexistent"), ValidationError);
}
