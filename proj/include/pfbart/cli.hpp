#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pfbart {

// Fully resolved invocation: flags override config-file values override the
// documented defaults. Fixed variables are carried by column name here and
// resolved to indices against the data header before any compute.
struct RunConfig {
  std::string command;

  std::string data_path;
  std::string response;       // empty: last column
  std::string trace_path;
  std::string out_path;
  std::string fix;            // comma-separated column names; empty: none
  bool swap_flag = false;
  bool allow_prune = true;
  bool change_prior = false;

  int trees = 200;
  int burn_in = 500;
  int draws = 1000;
  std::uint64_t seed = 0;
  int n_cut = 100;
  double alpha = 0.95;
  double beta = 2.0;
  double k = 2.0;
  double nu = 3.0;
  double q = 0.90;
  std::string move_probs = "0.25,0.25,0.10,0.40";

  std::string fn = "F1";
  int reps = 20;
  int n = 1000;
  double noise_sd = 1.0;
  std::string grid = "set1";  // set1 | table1 | table3

  int folds = 10;
  int shuffles = 10;
  int jobs = 1;
  std::string format = "csv";
};

// Parses argv (argv[0] is the sub-command), overlays --config file values for
// flags not given on the command line, and validates flag syntax. Throws
// std::runtime_error / std::invalid_argument with a usage message.
RunConfig parse_config(const std::vector<std::string>& args);

// Runs the parsed sub-command. Returns the process exit status.
int dispatch(const RunConfig& config);

// Resolved-config echo in the config-file format; re-running a sub-command
// with `--config <manifest>` reproduces the run.
std::string manifest_text(const RunConfig& config);

int cli_main(int argc, const char* const* argv);

}  // namespace pfbart
