#include "pfbart/trace_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pfbart/text.hpp"

namespace pfbart {

namespace {

constexpr const char* kMagic = "pfbart-trace v1";

std::string fmt(double v) { return format_double(v); }

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) throw std::runtime_error("trace: unexpected end of file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // "key rest-of-line"; throws when the key does not match.
  std::string expect(const std::string& key) {
    const std::string line = next();
    if (line.compare(0, key.size(), key) != 0 ||
        (line.size() > key.size() && line[key.size()] != ' '))
      throw std::runtime_error("trace: expected '" + key + "', got '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
  }

 private:
  std::istringstream in_;
};

void write_tree(std::ostream& out, const Tree& tree) {
  out << "tree " << tree.num_nodes() << "\n";
  tree.for_each([&](NodeId, int, bool leaf, const SplitRule* rule, double mu) {
    if (leaf)
      out << "L " << fmt(mu) << "\n";
    else
      out << "I " << rule->variable << " " << fmt(rule->cutpoint) << "\n";
  });
}

Tree read_tree(LineReader& reader) {
  std::istringstream head(reader.expect("tree"));
  int n_nodes = 0;
  head >> n_nodes;
  if (n_nodes < 1) throw std::runtime_error("trace: bad tree node count");

  // Rebuild by replaying grows in preorder.
  struct Rec {
    bool leaf;
    SplitRule rule;
    double mu;
  };
  std::vector<Rec> recs(n_nodes);
  for (auto& r : recs) {
    std::istringstream line(reader.next());
    char tag = 0;
    line >> tag;
    if (tag == 'L') {
      r.leaf = true;
      line >> r.mu;
    } else if (tag == 'I') {
      r.leaf = false;
      line >> r.rule.variable >> r.rule.cutpoint;
    } else {
      throw std::runtime_error("trace: bad node tag");
    }
    if (!line) throw std::runtime_error("trace: malformed node record");
  }

  Tree tree;
  int next = 0;
  auto build = [&](auto&& self, NodeId id) -> void {
    const Rec& r = recs[next++];
    if (r.leaf) {
      tree.set_leaf_value(id, r.mu);
      return;
    }
    tree = apply_move(tree, Move{MoveType::Grow, id, 0, r.rule});
    self(self, Tree::left_of(id));
    self(self, Tree::right_of(id));
  };
  build(build, kRootId);
  if (next != n_nodes) throw std::runtime_error("trace: tree record count mismatch");
  return tree;
}

}  // namespace

std::string serialize_trace(const Trace& trace) {
  std::ostringstream out;
  const SamplerConfig& c = trace.config;
  out << kMagic << "\n";
  out << "p " << trace.p << "\n";
  out << "n_train " << trace.n_train << "\n";
  out << "response " << trace.response_name << "\n";
  for (int j = 0; j < trace.p; ++j) out << "name " << j << " " << trace.names[j] << "\n";
  out << "y_min " << fmt(trace.ystd.y_min) << "\n";
  out << "y_range " << fmt(trace.ystd.y_range) << "\n";
  out << "trees " << c.hp.m << "\n";
  out << "burn_in " << c.burn_in << "\n";
  out << "draws " << c.n_draws << "\n";
  out << "seed " << c.seed << "\n";
  out << "stream " << c.stream << "\n";
  out << "n_cutpoints " << c.n_cutpoints << "\n";
  out << "alpha " << fmt(c.hp.alpha) << "\n";
  out << "beta " << fmt(c.hp.beta) << "\n";
  out << "k " << fmt(c.hp.k) << "\n";
  out << "nu " << fmt(c.hp.nu) << "\n";
  out << "q " << fmt(c.hp.q) << "\n";
  out << "mu_mu " << fmt(c.hp.mu_mu) << "\n";
  out << "sigma_mu " << fmt(c.hp.sigma_mu) << "\n";
  out << "lambda " << fmt(c.hp.lambda) << "\n";
  out << "move_probs " << fmt(c.move_probs.grow) << " " << fmt(c.move_probs.prune) << " "
      << fmt(c.move_probs.swap) << " " << fmt(c.move_probs.change) << "\n";
  out << "policy_fixed " << c.policy.fixed_vars.size();
  for (int v : c.policy.fixed_vars) out << " " << v;
  out << "\n";
  out << "policy_swap " << (c.policy.swap_flag ? 1 : 0) << "\n";
  out << "policy_prune " << (c.policy.allow_prune ? 1 : 0) << "\n";
  out << "policy_cp " << (c.policy.change_prior ? 1 : 0) << "\n";
  out << "kept " << trace.n_draws() << "\n";

  out << "begin sigma\n";
  for (double s : trace.sigma) out << fmt(s) << "\n";
  out << "begin split_counts\n";
  for (const auto& row : trace.split_counts) {
    for (int v = 0; v < trace.p; ++v) out << (v ? " " : "") << row[v];
    out << "\n";
  }
  out << "begin fitted_sums\n";
  for (const auto& row : trace.fitted_sums) {
    for (int i = 0; i < trace.n_train; ++i) out << (i ? " " : "") << fmt(row[i]);
    out << "\n";
  }
  out << "begin forests\n";
  for (int d = 0; d < trace.n_draws(); ++d) {
    out << "draw " << d << "\n";
    for (const Tree& t : trace.forests[d]) write_tree(out, t);
  }
  out << "end\n";
  return out.str();
}

Trace parse_trace(const std::string& text) {
  LineReader reader(text);
  if (reader.next() != kMagic) throw std::runtime_error("trace: bad magic line");

  Trace trace;
  SamplerConfig& c = trace.config;
  auto geti = [&](const std::string& key) { return std::stoll(reader.expect(key)); };
  auto getd = [&](const std::string& key) { return std::stod(reader.expect(key)); };

  trace.p = static_cast<int>(geti("p"));
  trace.n_train = static_cast<int>(geti("n_train"));
  trace.response_name = reader.expect("response");
  trace.names.resize(trace.p);
  for (int j = 0; j < trace.p; ++j) {
    std::string rest = reader.expect("name");
    const auto sp = rest.find(' ');
    if (sp == std::string::npos) throw std::runtime_error("trace: bad name line");
    trace.names[std::stoi(rest.substr(0, sp))] = rest.substr(sp + 1);
  }
  trace.ystd.y_min = getd("y_min");
  trace.ystd.y_range = getd("y_range");
  c.hp.m = static_cast<int>(geti("trees"));
  c.burn_in = static_cast<int>(geti("burn_in"));
  c.n_draws = static_cast<int>(geti("draws"));
  c.seed = static_cast<std::uint64_t>(geti("seed"));
  c.stream = static_cast<std::uint64_t>(geti("stream"));
  c.n_cutpoints = static_cast<int>(geti("n_cutpoints"));
  c.hp.alpha = getd("alpha");
  c.hp.beta = getd("beta");
  c.hp.k = getd("k");
  c.hp.nu = getd("nu");
  c.hp.q = getd("q");
  c.hp.mu_mu = getd("mu_mu");
  c.hp.sigma_mu = getd("sigma_mu");
  c.hp.lambda = getd("lambda");
  {
    std::istringstream mp(reader.expect("move_probs"));
    mp >> c.move_probs.grow >> c.move_probs.prune >> c.move_probs.swap >> c.move_probs.change;
  }
  {
    std::istringstream pf(reader.expect("policy_fixed"));
    std::size_t h = 0;
    pf >> h;
    c.policy.fixed_vars.resize(h);
    for (auto& v : c.policy.fixed_vars) pf >> v;
  }
  c.policy.swap_flag = geti("policy_swap") != 0;
  c.policy.allow_prune = geti("policy_prune") != 0;
  c.policy.change_prior = geti("policy_cp") != 0;
  const int kept = static_cast<int>(geti("kept"));

  reader.expect("begin sigma");
  trace.sigma.resize(kept);
  for (int d = 0; d < kept; ++d) trace.sigma[d] = std::stod(reader.next());

  reader.expect("begin split_counts");
  trace.split_counts.assign(kept, std::vector<std::int64_t>(trace.p));
  for (int d = 0; d < kept; ++d) {
    std::istringstream line(reader.next());
    for (int v = 0; v < trace.p; ++v) line >> trace.split_counts[d][v];
    if (!line) throw std::runtime_error("trace: malformed split_counts row");
  }

  reader.expect("begin fitted_sums");
  trace.fitted_sums.assign(kept, std::vector<double>(trace.n_train));
  for (int d = 0; d < kept; ++d) {
    std::istringstream line(reader.next());
    for (int i = 0; i < trace.n_train; ++i) line >> trace.fitted_sums[d][i];
    if (!line) throw std::runtime_error("trace: malformed fitted_sums row");
  }

  reader.expect("begin forests");
  trace.forests.resize(kept);
  for (int d = 0; d < kept; ++d) {
    reader.expect("draw");
    trace.forests[d].reserve(c.hp.m);
    for (int j = 0; j < c.hp.m; ++j) trace.forests[d].push_back(read_tree(reader));
  }
  reader.expect("end");
  return trace;
}

void save_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trace: cannot write '" + path + "'");
  out << serialize_trace(trace);
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("trace: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

}  // namespace pfbart
