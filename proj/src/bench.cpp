#include "pfbart/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "pfbart/rng.hpp"
#include "pfbart/text.hpp"

namespace pfbart {

namespace {

std::string fmt(double v) { return format_double(v); }

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = rng.uniform_int(static_cast<std::size_t>(i) + 1);
    std::swap(idx[i], idx[static_cast<int>(j)]);
  }
  return idx;
}

FixedLayerPolicy policy_for(const Setting& s, const std::vector<int>& fixed_vars) {
  FixedLayerPolicy policy;
  policy.fixed_vars = fixed_vars;
  policy.swap_flag = s.swap_flag;
  policy.allow_prune = s.allow_prune;
  policy.change_prior = s.change_prior;
  return policy;
}

}  // namespace

std::vector<Setting> table1_settings() {
  return {
      {"SET1", false, true, false},
      {"SET2", false, false, false},
      {"SET3", true, true, false},
      {"SET4", true, false, false},
  };
}

std::vector<Setting> table3_settings() {
  return {
      {"SET1", true, true, false},
      {"SET2", true, true, true},
      {"SET3", false, false, false},
      {"SET4", false, false, true},
      {"SET5", true, false, false},
      {"SET6", true, false, true},
      {"SET7", false, true, false},
      {"SET8", false, true, true},
  };
}

double rmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("rmse: length mismatch (" + std::to_string(predicted.size()) +
                                " vs " + std::to_string(truth.size()) + ")");
  if (predicted.empty()) throw std::invalid_argument("rmse: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(predicted.size()));
}

void emit_results(const std::vector<BenchResult>& table, ResultFormat format,
                  const std::string& path) {
  if (table.empty()) throw std::invalid_argument("emit_results: empty table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_results: cannot write '" + path + "'");
  if (format == ResultFormat::Csv) {
    out << "setting,replication,rmse,relative_rmse,seed,seconds\n";
    for (const BenchResult& r : table)
      out << r.setting << "," << r.replication << "," << fmt(r.rmse) << ","
          << fmt(r.relative_rmse) << "," << r.seed << ",0\n";
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const BenchResult& r : table)
      arr.push_back({{"setting", r.setting},
                     {"replication", r.replication},
                     {"rmse", r.rmse},
                     {"relative_rmse", r.relative_rmse},
                     {"seed", r.seed},
                     {"seconds", 0.0}});
    out << arr.dump(2) << "\n";
  }
}

void parallel_for(int jobs, int n_tasks, const std::function<void(int)>& task) {
  jobs = std::max(1, std::min(jobs, n_tasks));
  if (jobs <= 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mtx;
  std::exception_ptr error;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(mtx);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::vector<BenchResult> synthetic_experiment(const SynthBenchSpec& spec,
                                              const SamplerConfig& base) {
  if (spec.n_reps < 1) throw std::invalid_argument("synthetic_experiment: need n_reps >= 1");
  if (spec.n < 4) throw std::invalid_argument("synthetic_experiment: need n >= 4");
  const std::vector<Setting> settings =
      spec.settings.empty() ? std::vector<Setting>{table1_settings().front()} : spec.settings;
  const int n_models = 1 + static_cast<int>(settings.size());

  struct Cell {
    double rmse = 0.0;
    std::uint64_t seed = 0;
    double seconds = 0.0;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(spec.n_reps) * n_models);

  parallel_for(spec.jobs, spec.n_reps * n_models, [&](int t) {
    const auto t0 = std::chrono::steady_clock::now();
    const int rep = t / n_models;
    const int mi = t % n_models;

    const Dataset data = gen_synthetic(spec.fn, spec.n, spec.noise_sd,
                                       mix_seed(base.seed, 1, static_cast<std::uint64_t>(rep)));
    const SplitIndices split =
        holdout_split(spec.n, 0.5, mix_seed(base.seed, 2, static_cast<std::uint64_t>(rep)));
    const Dataset train = subset(data, split.train);

    Matrix x_test(static_cast<int>(split.test.size()), data.p());
    std::vector<double> f_test(split.test.size());
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      for (int j = 0; j < data.p(); ++j) x_test(static_cast<int>(i), j) = data.X(split.test[i], j);
      f_test[i] = synthetic_truth(spec.fn, x_test.row(static_cast<int>(i)));
    }

    SamplerConfig cfg = base;
    if (mi > 0) cfg.policy = policy_for(settings[mi - 1], spec.fixed_vars);
    else cfg.policy = FixedLayerPolicy{};
    cfg.seed = mix_seed(base.seed, 3, static_cast<std::uint64_t>(rep) * 256 + mi);
    cfg.stream = 0;

    const Trace trace = run_chain(train, cfg);
    const PredictionSummary pred = predict(trace, x_test);
    cells[t] = Cell{rmse(pred.mean, f_test), cfg.seed, elapsed_seconds(t0)};
  });

  std::vector<BenchResult> table;
  table.reserve(cells.size());
  for (int rep = 0; rep < spec.n_reps; ++rep) {
    const double bart_rmse = cells[static_cast<std::size_t>(rep) * n_models].rmse;
    for (int mi = 0; mi < n_models; ++mi) {
      const Cell& c = cells[static_cast<std::size_t>(rep) * n_models + mi];
      BenchResult r;
      r.setting = mi == 0 ? "BART" : settings[mi - 1].name;
      r.replication = rep;
      r.rmse = c.rmse;
      r.relative_rmse = c.rmse / bart_rmse;
      r.seed = c.seed;
      r.seconds = c.seconds;
      table.push_back(std::move(r));
    }
  }
  return table;
}

std::vector<BenchResult> covariate_sweep(const Dataset& data, const SweepSpec& spec,
                                         const SamplerConfig& base) {
  if (spec.k < 2) throw std::invalid_argument("covariate_sweep: need k >= 2 folds");
  if (spec.n_shuffles < 1) throw std::invalid_argument("covariate_sweep: need n_shuffles >= 1");

  // Trim to a multiple of k by deleting random rows, as the CV protocol asks.
  Dataset work = data;
  const int n_trim = data.n() - data.n() % spec.k;
  if (n_trim != data.n()) {
    Rng rng(mix_seed(base.seed, 10, 0), 0);
    auto idx = shuffled_indices(data.n(), rng);
    idx.resize(n_trim);
    std::sort(idx.begin(), idx.end());
    work = subset(data, idx);
  }
  const int n = work.n();
  const int p = work.p();
  const int n_models = 1 + p;  // plain BART, then each covariate fixed at the root
  const Setting set1 = table1_settings().front();

  // Pooled CV predictions per (shuffle, model); each fold task fills its rows.
  std::vector<std::vector<std::vector<double>>> pooled(
      spec.n_shuffles,
      std::vector<std::vector<double>>(n_models, std::vector<double>(n, 0.0)));
  std::vector<std::uint64_t> chain_seed(static_cast<std::size_t>(spec.n_shuffles) * n_models);

  parallel_for(spec.jobs, spec.n_shuffles * n_models * spec.k, [&](int t) {
    const int s = t / (n_models * spec.k);
    const int mi = (t / spec.k) % n_models;
    const int fold = t % spec.k;

    const auto folds = kfold_split(n, spec.k, mix_seed(base.seed, 11, static_cast<std::uint64_t>(s)));
    const Dataset train = subset(work, folds[fold].train);
    Matrix x_test(static_cast<int>(folds[fold].test.size()), p);
    for (std::size_t i = 0; i < folds[fold].test.size(); ++i)
      for (int j = 0; j < p; ++j)
        x_test(static_cast<int>(i), j) = work.X(folds[fold].test[i], j);

    SamplerConfig cfg = base;
    if (mi > 0) cfg.policy = policy_for(set1, {mi - 1});
    else cfg.policy = FixedLayerPolicy{};
    cfg.seed = mix_seed(base.seed, 12,
                        (static_cast<std::uint64_t>(s) * n_models + mi) * spec.k + fold);
    cfg.stream = 0;
    if (fold == 0) chain_seed[static_cast<std::size_t>(s) * n_models + mi] = cfg.seed;

    const Trace trace = run_chain(train, cfg);
    const PredictionSummary pred = predict(trace, x_test);
    for (std::size_t i = 0; i < folds[fold].test.size(); ++i)
      pooled[s][mi][folds[fold].test[i]] = pred.mean[i];
  });

  std::vector<BenchResult> table;
  for (int s = 0; s < spec.n_shuffles; ++s) {
    const double bart_rmse = rmse(pooled[s][0], work.y);
    for (int mi = 0; mi < n_models; ++mi) {
      BenchResult r;
      r.setting = mi == 0 ? "BART" : "fix_" + work.names[mi - 1];
      r.replication = s;
      r.rmse = rmse(pooled[s][mi], work.y);
      r.relative_rmse = r.rmse / bart_rmse;
      r.seed = chain_seed[static_cast<std::size_t>(s) * n_models + mi];
      table.push_back(std::move(r));
    }
  }
  return table;
}

}  // namespace pfbart
