#include "mlpsel/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mlpsel/errors.hpp"

namespace mlpsel {

namespace {

using json = nlohmann::ordered_json;

/// 1-based line of the key at `path`, found by scanning for each quoted key
/// in turn after the previous one; 0 when not located.
std::size_t line_of(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t found = text.find(quoted, pos);
    while (found != std::string::npos) {
      std::size_t after = found + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      found = text.find(quoted, found + 1);
    }
    if (found == std::string::npos) return 0;
    pos = found + quoted.size();
  }
  std::size_t line = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class Section {
 public:
  Section(const json& node, std::vector<std::string> path, const std::string& text)
      : node_(node), path_(std::move(path)), text_(text) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string dotted;
    for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
    const std::size_t line = line_of(text_, path);
    std::string where = line ? "config line " + std::to_string(line) + ": " : "config: ";
    throw ConfigError(where + (dotted.empty() ? "<root>" : dotted) + ": " + msg);
  }

  std::vector<std::string> at(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

  const json* find(const std::string& key) {
    if (!node_.contains(key)) return nullptr;
    used_.insert(key);
    return &node_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned() || v->get<long long>() >= 0)
          out = v->get<Int>();
        else
          fail(at(key), "expected a nonnegative integer");
      } else {
        out = v->get<Int>();
      }
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <class T>
  bool list(const std::string& key, std::vector<T>& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_array()) fail(at(key), "expected an array");
    std::vector<T> tmp;
    for (const auto& item : *v) {
      if constexpr (std::is_integral_v<T>) {
        if (!item.is_number_integer()) fail(at(key), "expected an array of integers");
      } else {
        if (!item.is_number()) fail(at(key), "expected an array of numbers");
      }
      tmp.push_back(item.get<T>());
    }
    out = std::move(tmp);
    return true;
  }
  bool matrix(const std::string& key, std::vector<std::vector<double>>& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_array()) fail(at(key), "expected an array of arrays");
    std::vector<std::vector<double>> tmp;
    for (const auto& row : *v) {
      if (!row.is_array()) fail(at(key), "expected an array of arrays");
      std::vector<double> r;
      for (const auto& item : row) {
        if (!item.is_number()) fail(at(key), "expected numbers");
        r.push_back(item.get<double>());
      }
      tmp.push_back(std::move(r));
    }
    out = std::move(tmp);
    return true;
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  Section child(const std::string& key) {
    used_.insert(key);
    return Section(node_.at(key), at(key), text_);
  }
  const json& raw(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }
  const std::string& text() const { return text_; }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& node_;
  std::vector<std::string> path_;
  const std::string& text_;
  std::set<std::string> used_;
};

PenaltySpec parse_penalty(Section s) {
  std::string kind = "bic";
  s.string("kind", kind);
  PenaltySpec spec;
  if (kind == "bic") {
    spec = PenaltySpec::bic();
  } else if (kind == "aic_like") {
    spec = PenaltySpec::aic_like();
  } else if (kind == "custom") {
    spec = PenaltySpec::custom(1.0, 0.5);
    s.number("c", spec.c);
    s.number("alpha", spec.alpha);
  } else {
    s.fail(s.at("kind"), "unknown penalty kind '" + kind + "' (bic, aic_like, custom)");
  }
  s.finish();
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    s.fail(s.at("kind"), e.what());
  }
  return spec;
}

}  // namespace

void RunConfig::validate() const {
  const int d = theta0.d();
  if (!(sigma2 > 0.0)) throw ConfigError("model.sigma2 must be > 0");
  input.validate();
  if (input.d() != d) throw ConfigError("input dimension differs from model dimension");
  space_for(1).validate();
  ThetaSpace s0 = space_for(theta0.k());
  if (!s0.contains(theta0, 1e-12))
    throw ConfigError("model.theta0 lies outside the constraint set defined by 'space'");
  opt.validate();
  if (max_units < 1) throw ConfigError("selection.max_units must be >= 1");
  if (penalties.empty()) throw ConfigError("selection.penalties must not be empty");
  for (const auto& p : penalties) p.validate();
  if (data_n < 1) throw ConfigError("data.n must be >= 1");
  if (delta_grid.size() < 3) throw ConfigError("lemma.delta_grid needs at least 3 values");
  for (std::size_t i = 1; i < delta_grid.size(); ++i)
    if (!(delta_grid[i] < delta_grid[i - 1]))
      throw ConfigError("lemma.delta_grid must be strictly decreasing");
  if (lemma_n_mc < 1) throw ConfigError("lemma.n_mc must be >= 1");
  if (witness.proportions.size() != static_cast<std::size_t>(theta0.k()))
    throw ConfigError("lemma.witness.proportions needs one list per true unit");
  for (const auto& w : witness.surplus_w)
    if (w.size() != static_cast<std::size_t>(d))
      throw ConfigError("lemma.witness.surplus_w rows must have the model dimension");
  if (gram.n_nodes < 1) throw ConfigError("ident.n_nodes must be >= 1");
  if (gram.n_mc < 2) throw ConfigError("ident.n_mc must be >= 2");
  if (!(gram.tolerance >= 0.0)) throw ConfigError("ident.tolerance must be >= 0");
  if (max_units < theta0.k())
    throw ConfigError("selection.max_units must be >= the number of true units");
  experiment().validate();
}

ThetaSpace RunConfig::space_for(int k) const {
  ThetaSpace s = space;
  s.k = k;
  s.d = theta0.d();
  return s;
}

std::vector<ThetaSpace> RunConfig::spaces() const {
  std::vector<ThetaSpace> out;
  for (int k = 1; k <= max_units; ++k) out.push_back(space_for(k));
  return out;
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.theta0 = theta0;
  e.sigma2 = sigma2;
  e.phi = phi;
  e.input = input;
  e.n_grid = n_grid;
  e.replications = replications;
  e.max_units = max_units;
  e.penalties = penalties;
  e.opt = opt;
  e.space = space_for(1);
  e.base_seed = experiment_seed;
  return e;
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  Section root(doc, {}, text);

  if (root.has("model")) {
    Section m = root.child("model");
    std::string transfer = cfg.phi.name();
    m.string("transfer", transfer);
    try {
      cfg.phi = TransferFunction::parse(transfer);
    } catch (const InvalidInput& e) {
      m.fail(m.at("transfer"), e.what());
    }
    m.number("sigma2", cfg.sigma2);
    if (m.has("theta0")) {
      Section t = m.child("theta0");
      double beta = 0.0;
      std::vector<double> a;
      std::vector<double> b;
      std::vector<std::vector<double>> w;
      t.number("beta", beta);
      if (!t.list("a", a) || !t.list("b", b) || !t.matrix("w", w))
        t.fail(m.at("theta0"), "needs keys a, b and w");
      t.finish();
      try {
        cfg.theta0 = Theta::from_parts(beta, a, b, w);
      } catch (const InvalidInput& e) {
        t.fail(m.at("theta0"), e.what());
      }
    }
    m.finish();
    // Default witness: split the first unit, add one surplus unit.
    cfg.witness.proportions.assign(static_cast<std::size_t>(cfg.theta0.k()), {1.0});
    cfg.witness.proportions[0] = {0.35, 0.65};
    cfg.witness.surplus_w.assign(1, std::vector<double>(static_cast<std::size_t>(cfg.theta0.d()), 0.0));
    cfg.witness.surplus_w[0][0] = -1.0;
  }

  {
    // Input defaults follow the model dimension unless given explicitly.
    cfg.input = InputDist::standard_normal(cfg.theta0.d());
    if (root.has("input")) {
      Section s = root.child("input");
      std::string kind = "gaussian";
      s.string("kind", kind);
      if (kind == "gaussian") {
        cfg.input.kind = InputKind::gaussian;
        s.list("mean", cfg.input.p1);
        s.list("sd", cfg.input.p2);
      } else if (kind == "uniform") {
        cfg.input.kind = InputKind::uniform;
        cfg.input.p1.assign(static_cast<std::size_t>(cfg.theta0.d()), -1.0);
        cfg.input.p2.assign(static_cast<std::size_t>(cfg.theta0.d()), 1.0);
        s.list("lo", cfg.input.p1);
        s.list("hi", cfg.input.p2);
      } else {
        s.fail(s.at("kind"), "unknown input kind '" + kind + "' (gaussian, uniform)");
      }
      s.finish();
    }
  }

  if (root.has("space")) {
    Section s = root.child("space");
    s.number("bound", cfg.space.bound);
    s.number("eta", cfg.space.eta);
    s.boolean("sign_convention", cfg.space.sign_convention);
    s.finish();
  }

  if (root.has("optimizer")) {
    Section s = root.child("optimizer");
    s.integer("n_starts", cfg.opt.n_starts);
    s.integer("max_iters", cfg.opt.max_iters);
    s.number("grad_tol", cfg.opt.grad_tol);
    s.number("step_tol", cfg.opt.step_tol);
    s.integer("base_seed", cfg.opt.base_seed);
    s.number("init_bound", cfg.opt.init_bound);
    s.finish();
  }

  if (root.has("selection")) {
    Section s = root.child("selection");
    s.integer("max_units", cfg.max_units);
    if (s.has("penalties")) {
      const json& list = s.raw("penalties");
      if (!list.is_array()) s.fail(s.at("penalties"), "expected an array of penalty objects");
      cfg.penalties.clear();
      for (std::size_t i = 0; i < list.size(); ++i)
        cfg.penalties.push_back(parse_penalty(Section(list[i], s.at("penalties"), text)));
    }
    s.finish();
  }

  if (root.has("data")) {
    Section s = root.child("data");
    s.integer("n", cfg.data_n);
    s.integer("seed", cfg.data_seed);
    s.finish();
  }

  if (root.has("experiment")) {
    Section s = root.child("experiment");
    s.list("n_grid", cfg.n_grid);
    s.integer("replications", cfg.replications);
    s.integer("base_seed", cfg.experiment_seed);
    s.finish();
  }

  if (root.has("lemma")) {
    Section s = root.child("lemma");
    if (s.has("witness")) {
      Section w = s.child("witness");
      SplitPlan plan;
      if (!w.matrix("proportions", plan.proportions))
        w.fail(s.at("witness"), "needs key proportions");
      w.list("surplus_b", plan.surplus_b);
      w.matrix("surplus_w", plan.surplus_w);
      w.finish();
      cfg.witness = std::move(plan);
    }
    s.list("delta_grid", cfg.delta_grid);
    s.integer("n_mc", cfg.lemma_n_mc);
    s.integer("seed", cfg.lemma_seed);
    s.finish();
  }

  cfg.gram.input = cfg.input;
  if (root.has("ident")) {
    Section s = root.child("ident");
    std::string method = "quadrature";
    s.string("method", method);
    if (method == "quadrature")
      cfg.gram.method = GramMethod::quadrature;
    else if (method == "monte_carlo")
      cfg.gram.method = GramMethod::monte_carlo;
    else
      s.fail(s.at("method"), "unknown method '" + method + "' (quadrature, monte_carlo)");
    s.integer("n_nodes", cfg.gram.n_nodes);
    s.integer("n_mc", cfg.gram.n_mc);
    s.integer("seed", cfg.gram.seed);
    s.number("tolerance", cfg.gram.tolerance);
    s.finish();
  }

  if (root.has("penalty_check")) {
    Section s = root.child("penalty_check");
    s.list("n_grid", cfg.h4_n_grid);
    std::vector<std::vector<double>> pairs;
    if (s.matrix("k_pairs", pairs)) {
      cfg.h4_k_pairs.clear();
      for (const auto& p : pairs) {
        if (p.size() != 2) s.fail(s.at("k_pairs"), "each pair must be [k1, k2]");
        cfg.h4_k_pairs.emplace_back(static_cast<int>(p[0]), static_cast<int>(p[1]));
      }
    }
    s.number("gap_threshold", cfg.h4.gap_threshold);
    s.number("ratio_shrink", cfg.h4.ratio_shrink);
    s.finish();
  }

  root.finish();
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

}  // namespace mlpsel
