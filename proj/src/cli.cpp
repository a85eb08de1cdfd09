#include "pfbart/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "pfbart/bench.hpp"
#include "pfbart/data.hpp"
#include "pfbart/sampler.hpp"
#include "pfbart/text.hpp"
#include "pfbart/trace_io.hpp"

namespace pfbart {

namespace {

struct HelpRequest {
  std::string text;
};

std::string fmtd(double v) { return format_double(v); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("config: boolean must be true/false, got '" + s + "'");
}

// One entry per flag: manifest emission, config-file loading, and the
// command relevance mask all come from this table.
enum : unsigned {
  kTrain = 1u,
  kPredict = 2u,
  kBench = 4u,
  kSweep = 8u,
  kFreq = 16u,
};

struct Field {
  const char* key;
  unsigned commands;
  std::string (*get)(const RunConfig&);
  void (*set)(RunConfig&, const std::string&);
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"data", kTrain | kPredict | kSweep,
       [](const RunConfig& c) { return c.data_path; },
       [](RunConfig& c, const std::string& v) { c.data_path = v; }},
      {"response", kTrain | kSweep,
       [](const RunConfig& c) { return c.response; },
       [](RunConfig& c, const std::string& v) { c.response = v; }},
      {"trace", kPredict | kFreq,
       [](const RunConfig& c) { return c.trace_path; },
       [](RunConfig& c, const std::string& v) { c.trace_path = v; }},
      {"out", kTrain | kPredict | kBench | kSweep | kFreq,
       [](const RunConfig& c) { return c.out_path; },
       [](RunConfig& c, const std::string& v) { c.out_path = v; }},
      {"fix", kTrain | kBench,
       [](const RunConfig& c) { return c.fix; },
       [](RunConfig& c, const std::string& v) { c.fix = v; }},
      {"swap", kTrain,
       [](const RunConfig& c) { return std::string(c.swap_flag ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.swap_flag = parse_bool(v); }},
      {"prune", kTrain,
       [](const RunConfig& c) { return std::string(c.allow_prune ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.allow_prune = parse_bool(v); }},
      {"cp", kTrain,
       [](const RunConfig& c) { return std::string(c.change_prior ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.change_prior = parse_bool(v); }},
      {"trees", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return std::to_string(c.trees); },
       [](RunConfig& c, const std::string& v) { c.trees = std::stoi(v); }},
      {"burn-in", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return std::to_string(c.burn_in); },
       [](RunConfig& c, const std::string& v) { c.burn_in = std::stoi(v); }},
      {"draws", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return std::to_string(c.draws); },
       [](RunConfig& c, const std::string& v) { c.draws = std::stoi(v); }},
      {"seed", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
      {"n-cut", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return std::to_string(c.n_cut); },
       [](RunConfig& c, const std::string& v) { c.n_cut = std::stoi(v); }},
      {"alpha", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return fmtd(c.alpha); },
       [](RunConfig& c, const std::string& v) { c.alpha = std::stod(v); }},
      {"beta", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return fmtd(c.beta); },
       [](RunConfig& c, const std::string& v) { c.beta = std::stod(v); }},
      {"k", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return fmtd(c.k); },
       [](RunConfig& c, const std::string& v) { c.k = std::stod(v); }},
      {"nu", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return fmtd(c.nu); },
       [](RunConfig& c, const std::string& v) { c.nu = std::stod(v); }},
      {"q", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return fmtd(c.q); },
       [](RunConfig& c, const std::string& v) { c.q = std::stod(v); }},
      {"move-probs", kTrain | kBench | kSweep,
       [](const RunConfig& c) { return c.move_probs; },
       [](RunConfig& c, const std::string& v) { c.move_probs = v; }},
      {"fn", kBench,
       [](const RunConfig& c) { return c.fn; },
       [](RunConfig& c, const std::string& v) { c.fn = v; }},
      {"reps", kBench,
       [](const RunConfig& c) { return std::to_string(c.reps); },
       [](RunConfig& c, const std::string& v) { c.reps = std::stoi(v); }},
      {"n", kBench,
       [](const RunConfig& c) { return std::to_string(c.n); },
       [](RunConfig& c, const std::string& v) { c.n = std::stoi(v); }},
      {"noise-sd", kBench,
       [](const RunConfig& c) { return fmtd(c.noise_sd); },
       [](RunConfig& c, const std::string& v) { c.noise_sd = std::stod(v); }},
      {"grid", kBench,
       [](const RunConfig& c) { return c.grid; },
       [](RunConfig& c, const std::string& v) { c.grid = v; }},
      {"folds", kSweep,
       [](const RunConfig& c) { return std::to_string(c.folds); },
       [](RunConfig& c, const std::string& v) { c.folds = std::stoi(v); }},
      {"shuffles", kSweep,
       [](const RunConfig& c) { return std::to_string(c.shuffles); },
       [](RunConfig& c, const std::string& v) { c.shuffles = std::stoi(v); }},
      {"jobs", kBench | kSweep,
       [](const RunConfig& c) { return std::to_string(c.jobs); },
       [](RunConfig& c, const std::string& v) { c.jobs = std::stoi(v); }},
      {"format", kBench | kSweep,
       [](const RunConfig& c) { return c.format; },
       [](RunConfig& c, const std::string& v) { c.format = v; }},
  };
  return table;
}

unsigned command_bit(const std::string& command) {
  if (command == "train") return kTrain;
  if (command == "predict") return kPredict;
  if (command == "synth-bench") return kBench;
  if (command == "sweep") return kSweep;
  if (command == "freq") return kFreq;
  throw std::invalid_argument("unknown sub-command '" + command +
                              "' (use train, predict, synth-bench, sweep, freq)");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void apply_config_file(RunConfig& cfg, const std::string& path, unsigned bit,
                       const std::map<std::string, bool>& provided) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key == "config_hash") continue;
    if (key == "command") {
      if (command_bit(value) != bit)
        throw std::runtime_error("config: file is for sub-command '" + value + "'");
      continue;
    }
    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const Field& f) { return key == f.key; });
    if (it == fields().end())
      throw std::runtime_error("config: unknown key '" + key + "' at line " +
                               std::to_string(line_no));
    const auto pit = provided.find(key);
    if (pit != provided.end() && pit->second) continue;  // flags win on conflict
    it->set(cfg, value);
  }
}

MoveProbs parse_move_probs(const std::string& text) {
  MoveProbs mp;
  double vals[4];
  std::stringstream ss(text);
  std::string cell;
  int i = 0;
  while (std::getline(ss, cell, ',')) {
    if (i >= 4) throw std::invalid_argument("move-probs: need exactly 4 values");
    vals[i++] = std::stod(trim(cell));
  }
  if (i != 4) throw std::invalid_argument("move-probs: need exactly 4 values");
  mp.grow = vals[0];
  mp.prune = vals[1];
  mp.swap = vals[2];
  mp.change = vals[3];
  return mp;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const std::string name = trim(cell);
    if (!name.empty()) out.push_back(name);
  }
  return out;
}

std::vector<int> resolve_names(const std::string& fix, const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const std::string& name : split_names(fix)) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
      throw std::invalid_argument("--fix: column '" + name + "' not found in the data header");
    out.push_back(static_cast<int>(it - names.begin()));
  }
  return out;
}

SamplerConfig sampler_config_from(const RunConfig& cfg) {
  SamplerConfig sc;
  sc.hp.m = cfg.trees;
  sc.hp.alpha = cfg.alpha;
  sc.hp.beta = cfg.beta;
  sc.hp.k = cfg.k;
  sc.hp.nu = cfg.nu;
  sc.hp.q = cfg.q;
  sc.burn_in = cfg.burn_in;
  sc.n_draws = cfg.draws;
  sc.seed = cfg.seed;
  sc.n_cutpoints = cfg.n_cut;
  sc.move_probs = parse_move_probs(cfg.move_probs);
  return sc;
}

void require(const RunConfig& cfg, const std::string& flag, const std::string& value) {
  if (value.empty())
    throw std::invalid_argument(cfg.command + ": --" + flag + " is required");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

void write_manifest(const RunConfig& cfg) {
  if (cfg.out_path.empty()) return;
  write_text_file(cfg.out_path + ".manifest", manifest_text(cfg));
}

ResultFormat parse_format(const std::string& format) {
  if (format == "csv") return ResultFormat::Csv;
  if (format == "json") return ResultFormat::Json;
  throw std::invalid_argument("--format must be csv or json");
}

std::vector<Setting> settings_for(const std::string& grid) {
  if (grid == "set1") return {table1_settings().front()};
  if (grid == "table1") return table1_settings();
  if (grid == "table3") return table3_settings();
  throw std::invalid_argument("--grid must be set1, table1 or table3");
}

void print_relative_summary(const std::vector<BenchResult>& table) {
  std::map<std::string, std::vector<double>> by_setting;
  for (const BenchResult& r : table)
    if (r.setting != "BART") by_setting[r.setting].push_back(r.relative_rmse);
  for (auto& [name, vals] : by_setting) {
    std::sort(vals.begin(), vals.end());
    const double median = vals.size() % 2 ? vals[vals.size() / 2]
                                          : 0.5 * (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]);
    std::cerr << "  " << name << ": median relative RMSE " << median << " over " << vals.size()
              << " values\n";
  }
}

int run_train(const RunConfig& cfg) {
  require(cfg, "data", cfg.data_path);
  require(cfg, "out", cfg.out_path);
  const Dataset data = load_csv(cfg.data_path, cfg.response);
  SamplerConfig sc = sampler_config_from(cfg);
  sc.policy.fixed_vars = resolve_names(cfg.fix, data.names);
  sc.policy.swap_flag = cfg.swap_flag;
  sc.policy.allow_prune = cfg.allow_prune;
  sc.policy.change_prior = cfg.change_prior;
  sc.validate(data.p());
  write_manifest(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const Trace trace = run_chain(data, sc);
  save_trace(trace, cfg.out_path);
  std::cerr << "train: " << trace.n_draws() << " draws kept, n=" << data.n()
            << ", p=" << data.p() << " ("
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << " s)\n";
  return 0;
}

int run_predict(const RunConfig& cfg) {
  require(cfg, "trace", cfg.trace_path);
  require(cfg, "data", cfg.data_path);
  require(cfg, "out", cfg.out_path);
  const Trace trace = load_trace(cfg.trace_path);
  const RawTable table = load_csv_table(cfg.data_path);

  // Select the training covariates by name; order follows the model.
  std::vector<int> cols;
  for (const std::string& name : trace.names) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
      throw std::invalid_argument("predict: column '" + name + "' missing from '" +
                                  cfg.data_path + "'");
    cols.push_back(static_cast<int>(it - table.header.begin()));
  }
  Matrix x_new(table.values.rows(), static_cast<int>(cols.size()));
  for (int i = 0; i < table.values.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      x_new(i, static_cast<int>(j)) = table.values(i, cols[j]);

  write_manifest(cfg);
  const PredictionSummary pred = predict(trace, x_new);
  std::ostringstream out;
  out << "row,mean,q05,q95\n";
  for (int i = 0; i < x_new.rows(); ++i)
    out << i << "," << fmtd(pred.mean[i]) << "," << fmtd(pred.q05[i]) << ","
        << fmtd(pred.q95[i]) << "\n";
  write_text_file(cfg.out_path, out.str());
  return 0;
}

int run_synth_bench(const RunConfig& cfg) {
  require(cfg, "out", cfg.out_path);
  SynthBenchSpec spec;
  spec.fn = synthetic_fn_from_name(cfg.fn);
  spec.n_reps = cfg.reps;
  spec.n = cfg.n;
  spec.noise_sd = cfg.noise_sd;
  spec.settings = settings_for(cfg.grid);
  spec.jobs = cfg.jobs;

  const int p = spec.fn == SyntheticFn::F4 ? 5 : 10;
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  spec.fixed_vars = cfg.fix.empty() ? std::vector<int>{0} : resolve_names(cfg.fix, names);

  const SamplerConfig base = sampler_config_from(cfg);
  write_manifest(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const auto table = synthetic_experiment(spec, base);
  emit_results(table, parse_format(cfg.format), cfg.out_path);
  std::cerr << "synth-bench: " << cfg.fn << ", " << spec.n_reps << " replications ("
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << " s)\n";
  print_relative_summary(table);
  return 0;
}

int run_sweep(const RunConfig& cfg) {
  require(cfg, "data", cfg.data_path);
  require(cfg, "out", cfg.out_path);
  const Dataset data = load_csv(cfg.data_path, cfg.response);
  SweepSpec spec;
  spec.k = cfg.folds;
  spec.n_shuffles = cfg.shuffles;
  spec.jobs = cfg.jobs;
  const SamplerConfig base = sampler_config_from(cfg);
  write_manifest(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const auto table = covariate_sweep(data, spec, base);
  emit_results(table, parse_format(cfg.format), cfg.out_path);
  std::cerr << "sweep: " << data.p() << " covariates, " << spec.n_shuffles << " shuffles, "
            << spec.k << "-fold CV ("
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << " s)\n";
  print_relative_summary(table);
  return 0;
}

int run_freq(const RunConfig& cfg) {
  require(cfg, "trace", cfg.trace_path);
  const Trace trace = load_trace(cfg.trace_path);
  const VariableFrequency vf = variable_frequency(trace);
  if (vf.total_splits == 0)
    std::cerr << "freq: warning: the trace contains no splits; all proportions are zero\n";
  std::ostringstream out;
  out << "variable,proportion\n";
  for (int v = 0; v < trace.p; ++v)
    out << trace.names[v] << "," << fmtd(vf.proportion[v]) << "\n";
  if (cfg.out_path.empty()) {
    std::cout << out.str();
  } else {
    write_manifest(cfg);
    write_text_file(cfg.out_path, out.str());
  }
  return 0;
}

}  // namespace

std::string manifest_text(const RunConfig& cfg) {
  const unsigned bit = command_bit(cfg.command);
  std::ostringstream out;
  out << "command = " << cfg.command << "\n";
  for (const Field& f : fields())
    if (f.commands & bit) out << f.key << " = " << f.get(cfg) << "\n";
  std::ostringstream full;
  full << out.str() << "config_hash = " << std::hex << fnv1a(out.str()) << "\n";
  return full.str();
}

RunConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty()) throw std::invalid_argument("usage: pfbart <sub-command> [flags]");
  RunConfig cfg;
  cfg.command = args[0];
  const unsigned bit = command_bit(cfg.command);

  CLI::App app{"Partially-fixed Bayesian additive regression trees"};
  app.name("pfbart " + cfg.command);
  std::string config_path;

  app.add_option("--config", config_path,
                 "Key = value file; command-line flags win on conflict");
  app.add_option("--data", cfg.data_path, "Input CSV with a header row");
  app.add_option("--response", cfg.response,
                 "Response column name (default: last column)")
      ->capture_default_str();
  app.add_option("--trace", cfg.trace_path, "Trace file written by train");
  app.add_option("--out", cfg.out_path, "Output file path");
  app.add_option("--fix", cfg.fix,
                 "Comma-separated covariate names pinned to the top tree levels");
  app.add_flag("--swap,!--no-swap", cfg.swap_flag,
               "Let fixed variables appear at any fixed layer")
      ->capture_default_str();
  app.add_flag("--prune,!--no-prune", cfg.allow_prune,
               "Allow prune proposals inside the fixed layers")
      ->capture_default_str();
  app.add_flag("--cp,!--no-cp", cfg.change_prior,
               "Restart the depth-split prior below the fixed layers")
      ->capture_default_str();
  app.add_option("--trees", cfg.trees, "Number of trees")->capture_default_str();
  app.add_option("--burn-in", cfg.burn_in, "Discarded sweeps")->capture_default_str();
  app.add_option("--draws", cfg.draws, "Kept sweeps")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Root RNG seed")->capture_default_str();
  app.add_option("--n-cut", cfg.n_cut, "Cutpoints per covariate")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "Split-prior base")->capture_default_str();
  app.add_option("--beta", cfg.beta, "Split-prior decay")->capture_default_str();
  app.add_option("--k", cfg.k, "Leaf-shrinkage multiple")->capture_default_str();
  app.add_option("--nu", cfg.nu, "Sigma-prior degrees of freedom")->capture_default_str();
  app.add_option("--q", cfg.q, "Sigma-prior calibration quantile")->capture_default_str();
  app.add_option("--move-probs", cfg.move_probs,
                 "Grow,prune,swap,change proposal probabilities")
      ->capture_default_str();
  app.add_option("--fn", cfg.fn, "Synthetic surface F1..F4")->capture_default_str();
  app.add_option("--reps", cfg.reps, "Benchmark replications")->capture_default_str();
  app.add_option("--n", cfg.n, "Synthetic sample size per replication")
      ->capture_default_str();
  app.add_option("--noise-sd", cfg.noise_sd, "Synthetic noise sd")->capture_default_str();
  app.add_option("--grid", cfg.grid, "Setting grid: set1, table1 or table3")
      ->capture_default_str();
  app.add_option("--folds", cfg.folds, "Cross-validation folds")->capture_default_str();
  app.add_option("--shuffles", cfg.shuffles, "Cross-validation shuffles")
      ->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "Concurrent benchmark cells")->capture_default_str();
  app.add_option("--format", cfg.format, "Result format: csv or json")
      ->capture_default_str();

  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());  // CLI11 consumes right-to-left
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequest{app.help()};
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(std::string("argument error: ") + e.what());
  }

  if (!config_path.empty()) {
    std::map<std::string, bool> provided;
    for (const Field& f : fields())
      provided[f.key] = app.count(std::string("--") + f.key) > 0;
    apply_config_file(cfg, config_path, bit, provided);
  }
  return cfg;
}

int dispatch(const RunConfig& cfg) {
  if (cfg.command == "train") return run_train(cfg);
  if (cfg.command == "predict") return run_predict(cfg);
  if (cfg.command == "synth-bench") return run_synth_bench(cfg);
  if (cfg.command == "sweep") return run_sweep(cfg);
  if (cfg.command == "freq") return run_freq(cfg);
  throw std::invalid_argument("unknown sub-command '" + cfg.command + "'");
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << "usage: pfbart <train|predict|synth-bench|sweep|freq> [flags]\n"
                 "Run 'pfbart <sub-command> --help' for the flag list.\n";
    return args.empty() ? 1 : 0;
  }
  try {
    return dispatch(parse_config(args));
  } catch (const HelpRequest& h) {
    std::cout << h.text;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "pfbart: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pfbart
