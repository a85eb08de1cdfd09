#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pfbart/data.hpp"
#include "pfbart/sampler.hpp"

namespace pfbart {

// One named combination of the policy switches.
struct Setting {
  std::string name;
  bool change_prior = false;
  bool allow_prune = true;
  bool swap_flag = false;
};

// The four-setting grid over (change prior) x (prune) used for the synthetic
// comparison, and the eight-setting grid that adds the swap switch for
// multi-layer fixing.
std::vector<Setting> table1_settings();
std::vector<Setting> table3_settings();

double rmse(std::span<const double> predicted, std::span<const double> truth);

struct BenchResult {
  std::string setting;
  int replication = 0;
  double rmse = 0.0;
  double relative_rmse = 0.0;  // setting RMSE / plain-BART RMSE, same data
  std::uint64_t seed = 0;      // chain seed actually used for this cell
  double seconds = 0.0;        // wall time; persisted outputs pin this to 0
};

enum class ResultFormat { Csv, Json };

// Stable column order: setting, replication, rmse, relative_rmse, seed,
// seconds. The seconds column is written as 0 so re-runs are byte-identical;
// live timings go to stderr. Throws on an empty table or unwritable path.
void emit_results(const std::vector<BenchResult>& table, ResultFormat format,
                  const std::string& path);

struct SynthBenchSpec {
  SyntheticFn fn = SyntheticFn::F1;
  int n_reps = 20;
  int n = 1000;              // per replication; split 50/50 train/test
  double noise_sd = 1.0;
  std::vector<int> fixed_vars = {0};  // the variables pinned for PFBART runs
  std::vector<Setting> settings;      // defaults to table1 SET1 when empty
  int jobs = 1;
};

// Per replication: fresh data, one shared train/test split, plain BART plus
// every setting on the same training rows with distinct RNG substreams. Test
// RMSE is measured against the noiseless surface. Rows come back ordered by
// (replication, BART first then settings).
std::vector<BenchResult> synthetic_experiment(const SynthBenchSpec& spec,
                                              const SamplerConfig& base);

struct SweepSpec {
  int k = 10;          // folds
  int n_shuffles = 10;
  int jobs = 1;
};

// For each shuffle: k-fold CV of plain BART, then of PFBART with each
// covariate singly fixed at the root (SET1 switches). Per covariate and
// shuffle one relative RMSE from the CV-pooled predictions; plain-BART rows
// are included with relative RMSE 1. Rows with more shuffles than the data
// can fold are the caller's concern; n is trimmed to a multiple of k here.
std::vector<BenchResult> covariate_sweep(const Dataset& data, const SweepSpec& spec,
                                         const SamplerConfig& base);

// Orchestration helper: run tasks 0..n_tasks-1 on up to `jobs` threads.
// Tasks must write only to their own slots. Exceptions are rethrown on the
// caller's thread after all workers join.
void parallel_for(int jobs, int n_tasks, const std::function<void(int)>& task);

}  // namespace pfbart
