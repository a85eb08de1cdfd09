#include "doctest.h"

#include <stdexcept>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pfbart/cli.hpp"
#include "pfbart/data.hpp"
#include "pfbart/rng.hpp"
#include "pfbart/trace_io.hpp"

using namespace pfbart;

namespace {

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string tiny_csv() {
  std::ostringstream out;
  out << "lon,lat,year,price\n";
  Rng rng = Rng(314, 0);
  for (int i = 0; i < 24; ++i) {
    const double lon = rng.uniform(), lat = rng.uniform(), year = rng.uniform();
    out << lon << "," << lat << "," << year << "," << (lon + 2 * lat + rng.normal(0, 0.1))
        << "\n";
  }
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("parse_config: policy flags land in the config") {
  const RunConfig cfg = parse_config({"train", "--data", "d.csv", "--response", "price",
                                      "--fix", "lon,lat,year", "--swap", "--no-prune",
                                      "--cp"});
  CHECK(cfg.command == "train");
  CHECK(cfg.data_path == "d.csv");
  CHECK(cfg.response == "price");
  CHECK(cfg.fix == "lon,lat,year");
  CHECK(cfg.swap_flag);
  CHECK_FALSE(cfg.allow_prune);
  CHECK(cfg.change_prior);
}

TEST_CASE("parse_config: documented defaults hold with no flags") {
  const RunConfig cfg = parse_config({"train"});
  CHECK(cfg.trees == 200);
  CHECK(cfg.burn_in == 500);
  CHECK(cfg.draws == 1000);
  CHECK(cfg.seed == 0);
  CHECK(cfg.n_cut == 100);
  CHECK(cfg.alpha == 0.95);
  CHECK(cfg.beta == 2.0);
  CHECK(cfg.k == 2.0);
  CHECK(cfg.nu == 3.0);
  CHECK(cfg.q == 0.90);
  CHECK(cfg.move_probs == "0.25,0.25,0.10,0.40");
  CHECK(cfg.allow_prune);
  CHECK_FALSE(cfg.swap_flag);
  CHECK_FALSE(cfg.change_prior);
  CHECK(cfg.format == "csv");
}

TEST_CASE("parse_config: unknown flags and commands are errors") {
  CHECK_THROWS_AS(parse_config({"train", "--bogus-flag", "3"}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config({"transmogrify"}), std::invalid_argument);
}

TEST_CASE("config file values apply only where flags are absent") {
  TempFile conf("pfbart_test_conf.txt",
                "trees = 7\nburn-in = 3\nswap = true\nseed = 99\n");
  const RunConfig cfg = parse_config({"train", "--config", conf.path, "--trees", "11"});
  CHECK(cfg.trees == 11);   // flag wins
  CHECK(cfg.burn_in == 3);  // file value
  CHECK(cfg.seed == 99);
  CHECK(cfg.swap_flag);

  TempFile bad("pfbart_test_conf_bad.txt", "no_such_key = 1\n");
  CHECK_THROWS_AS(parse_config({"train", "--config", bad.path}), std::runtime_error);
}

TEST_CASE("manifest is a loadable config that reproduces the run config") {
  RunConfig cfg = parse_config({"train", "--data", "d.csv", "--out", "t.txt", "--fix", "a,b",
                                "--no-prune", "--trees", "13", "--seed", "5"});
  const std::string manifest = manifest_text(cfg);
  CHECK(manifest.find("command = train\n") == 0);
  CHECK(manifest.find("config_hash = ") != std::string::npos);

  TempFile mf("pfbart_test_manifest.txt", manifest);
  const RunConfig back = parse_config({"train", "--config", mf.path});
  CHECK(manifest_text(back) == manifest);
  CHECK(back.trees == 13);
  CHECK(back.fix == "a,b");
  CHECK_FALSE(back.allow_prune);
}

TEST_CASE("an unresolvable fixed column name fails with its name") {
  TempFile csv("pfbart_cli_data.csv", tiny_csv());
  const RunConfig cfg = parse_config({"train", "--data", csv.path, "--response", "price",
                                      "--fix", "bogus_col", "--out", "pfbart_cli_trace.txt",
                                      "--trees", "2", "--burn-in", "1", "--draws", "1"});
  CHECK_THROWS_WITH_AS(dispatch(cfg), doctest::Contains("bogus_col"), std::invalid_argument);
}

TEST_CASE("train, predict and freq run end to end in process") {
  TempFile csv("pfbart_cli_data2.csv", tiny_csv());
  const std::string trace_path = "pfbart_cli_trace2.txt";
  const std::string pred_path = "pfbart_cli_pred2.csv";

  const RunConfig train = parse_config(
      {"train", "--data", csv.path, "--response", "price", "--fix", "lon", "--out",
       trace_path, "--trees", "4", "--burn-in", "5", "--draws", "6", "--n-cut", "10",
       "--seed", "3"});
  CHECK(dispatch(train) == 0);
  const Trace trace = load_trace(trace_path);
  CHECK(trace.n_draws() == 6);
  CHECK(trace.config.policy.fixed_vars == std::vector<int>{0});

  const RunConfig pred = parse_config(
      {"predict", "--trace", trace_path, "--data", csv.path, "--out", pred_path});
  CHECK(dispatch(pred) == 0);
  std::ifstream in(pred_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "row,mean,q05,q95");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 24);

  // Mismatched covariates fail loudly.
  TempFile bad_csv("pfbart_cli_bad.csv", "a,b\n1,2\n3,4\n");
  const RunConfig bad = parse_config(
      {"predict", "--trace", trace_path, "--data", bad_csv.path, "--out", "nope.csv"});
  CHECK_THROWS_AS(dispatch(bad), std::invalid_argument);

  const std::string freq_path = "pfbart_cli_freq2.csv";
  const RunConfig freq = parse_config(
      {"freq", "--trace", trace_path, "--out", freq_path});
  CHECK(dispatch(freq) == 0);
  std::ifstream fin(freq_path);
  std::getline(fin, header);
  CHECK(header == "variable,proportion");
  double total = 0.0;
  for (std::string line; std::getline(fin, line);) {
    if (line.empty()) continue;
    total += std::stod(line.substr(line.find(',') + 1));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  // Re-running train from its manifest reproduces the trace bytes.
  const std::string first = read_file(trace_path);
  const RunConfig replay = parse_config({"train", "--config", trace_path + ".manifest"});
  CHECK(dispatch(replay) == 0);
  CHECK(read_file(trace_path) == first);

  std::remove(trace_path.c_str());
  std::remove((trace_path + ".manifest").c_str());
  std::remove(pred_path.c_str());
  std::remove((pred_path + ".manifest").c_str());
  std::remove(freq_path.c_str());
  std::remove((freq_path + ".manifest").c_str());
}
