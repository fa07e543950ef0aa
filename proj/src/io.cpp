#include "mlpsel/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mlpsel/errors.hpp"

namespace mlpsel::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw InvalidInput("line " + std::to_string(line) + ": cannot parse number '" +
                       std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (int l = 0; l < data.d(); ++l) out += "x" + std::to_string(l + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (double v : data.x(i)) out += format_double(v) + ",";
    out += format_double(data.y(i)) + "\n";
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  write_text(path, dataset_csv(data));
}

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw InvalidInput("line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1 || header.back() != "y") throw InvalidInput("line 1: header must be x1,...,xd,y");
  for (int l = 0; l < d; ++l)
    if (header[static_cast<std::size_t>(l)] != "x" + std::to_string(l + 1))
      throw InvalidInput("line 1: header must be x1,...,xd,y");

  std::vector<double> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (static_cast<int>(fields.size()) != d + 1)
      throw InvalidInput("line " + std::to_string(lineno) + ": expected " + std::to_string(d + 1) +
                         " fields, found " + std::to_string(fields.size()));
    for (int l = 0; l < d; ++l) xs.push_back(parse_double(fields[static_cast<std::size_t>(l)], lineno));
    ys.push_back(parse_double(fields.back(), lineno));
  }
  if (ys.empty()) throw InvalidInput("dataset has no observations");
  RowMatrix X(static_cast<Eigen::Index>(ys.size()), d);
  std::copy(xs.begin(), xs.end(), X.data());
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return Dataset(std::move(X), std::move(y));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str());
}

json to_json(const Theta& theta) {
  json w = json::array();
  for (int i = 0; i < theta.k(); ++i) w.push_back(std::vector<double>(theta.w_row(i).begin(), theta.w_row(i).end()));
  std::vector<double> a;
  std::vector<double> b;
  for (int i = 0; i < theta.k(); ++i) {
    a.push_back(theta.a(i));
    b.push_back(theta.b(i));
  }
  return json{{"k", theta.k()}, {"d", theta.d()}, {"beta", theta.beta()}, {"a", a}, {"b", b}, {"w", w}};
}

Theta theta_from_json(const json& j) {
  try {
    return Theta::from_parts(j.at("beta").get<double>(), j.at("a").get<std::vector<double>>(),
                             j.at("b").get<std::vector<double>>(),
                             j.at("w").get<std::vector<std::vector<double>>>());
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed parameter: ") + e.what());
  }
}

json to_json(const FitResult& fit) {
  json starts = json::array();
  for (const auto& s : fit.starts)
    starts.push_back({{"seed", s.seed},
                      {"warm", s.warm},
                      {"converged", s.converged},
                      {"failed", s.failed},
                      {"iterations", s.iterations},
                      {"loglik", s.loglik}});
  return json{{"k", fit.k},
              {"loglik", fit.loglik},
              {"theta_hat", to_json(fit.theta_hat)},
              {"n_starts_used", fit.n_starts_used},
              {"best_start", fit.best_start},
              {"starts", starts}};
}

FitResult fit_from_json(const json& j) {
  try {
    FitResult fit;
    fit.k = j.at("k").get<int>();
    fit.loglik = j.at("loglik").get<double>();
    fit.theta_hat = theta_from_json(j.at("theta_hat"));
    fit.n_starts_used = j.value("n_starts_used", 0);
    fit.best_start = j.value("best_start", 0);
    if (j.contains("starts")) {
      for (const auto& s : j.at("starts")) {
        StartRecord rec;
        rec.seed = s.value("seed", std::uint64_t{0});
        rec.warm = s.value("warm", false);
        rec.converged = s.value("converged", false);
        rec.failed = s.value("failed", false);
        rec.iterations = s.value("iterations", 0);
        rec.loglik = s.at("loglik").is_null() ? std::nan("") : s.at("loglik").get<double>();
        fit.starts.push_back(rec);
      }
    }
    if (fit.theta_hat.k() != fit.k) throw InvalidInput("fit record: k does not match theta_hat");
    return fit;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed fit record: ") + e.what());
  }
}

json to_json(const std::vector<FitResult>& profile) {
  json out = json::array();
  for (const auto& f : profile) out.push_back(to_json(f));
  return out;
}

std::vector<FitResult> profile_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("fit file must hold a JSON array of fit records");
  std::vector<FitResult> out;
  for (const auto& item : j) out.push_back(fit_from_json(item));
  return out;
}

json to_json(const SelectionResult& sel) {
  json table = json::array();
  for (const auto& row : sel.table)
    table.push_back({{"k", row.k},
                     {"loglik", row.loglik},
                     {"penalty", row.penalty},
                     {"criterion", row.criterion}});
  return json{{"k_hat", sel.k_hat},
              {"penalty", sel.penalty.name()},
              {"n", sel.n},
              {"d", sel.d},
              {"table", table}};
}

std::string selection_table_csv(const SelectionResult& sel) {
  std::string out = "k,loglik,penalty,criterion\n";
  for (const auto& row : sel.table)
    out += std::to_string(row.k) + "," + format_double(row.loglik) + "," +
           format_double(row.penalty) + "," + format_double(row.criterion) + "\n";
  return out;
}

json to_json(const H4Report& rep) {
  auto cond = [](const ConditionCheck& c) {
    return json{{"name", c.name},
                {"passed", c.passed},
                {"heuristic", c.heuristic},
                {"detail", c.detail}};
  };
  return json{{"penalty", rep.penalty},
              {"verdict", rep.passed ? "pass" : "fail"},
              {"conditions", json::array({cond(rep.monotone), cond(rep.divergence), cond(rep.sublinear)})}};
}

json to_json(const ExperimentResult& result) {
  json cells = json::array();
  for (const auto& c : result.cells)
    cells.push_back({{"penalty", c.penalty}, {"n", c.n}, {"counts", c.counts}, {"failures", c.failures}});
  json records = json::array();
  for (const auto& r : result.records) {
    json rec{{"n", r.n}, {"replication", r.replication}, {"seed", r.data_seed}, {"failed", r.failed}};
    if (r.failed) rec["error"] = r.error;
    rec["logliks"] = r.logliks;
    rec["k_hat"] = r.k_hat;
    records.push_back(std::move(rec));
  }
  return json{{"k0", result.k0},
              {"max_units", result.max_units},
              {"replications", result.replications},
              {"penalties", result.penalties},
              {"n_grid", result.n_grid},
              {"cells", cells},
              {"records", records}};
}

std::string frequency_csv(const FrequencyTable& table) {
  std::string out = "penalty,n,k,frequency\n";
  for (const auto& r : table.rows)
    out += r.penalty + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," +
           format_double(r.frequency) + "\n";
  return out;
}

std::string consistency_curve_csv(const FrequencyTable& table) {
  std::string out = "penalty,n,p_correct,p_over,failure_rate\n";
  for (const auto& c : table.correct)
    out += c.penalty + "," + std::to_string(c.n) + "," + format_double(c.p_correct) + "," +
           format_double(c.p_over) + "," + format_double(c.failure_rate) + "\n";
  return out;
}

std::string remainder_csv(
    const std::vector<std::pair<std::string, std::vector<RemainderRow>>>& study) {
  std::string out = "direction,delta,D,R,R_over_D,flagged\n";
  for (const auto& [name, rows] : study)
    for (const auto& r : rows)
      out += name + "," + format_double(r.delta) + "," + format_double(r.D) + "," +
             format_double(r.R) + "," + format_double(r.R_over_D) + "," +
             (r.flagged ? "1" : "0") + "\n";
  return out;
}

std::string gram_csv(const GramReport& rep) {
  std::string out = "row,col,value\n";
  for (Eigen::Index r = 0; r < rep.gram.rows(); ++r)
    for (Eigen::Index c = 0; c < rep.gram.cols(); ++c)
      out += std::to_string(r) + "," + std::to_string(c) + "," + format_double(rep.gram(r, c)) + "\n";
  return out;
}

json to_json(const GramReport& rep) {
  return json{{"size", rep.gram.rows()},
              {"labels", rep.labels},
              {"min_eigenvalue", rep.min_eigenvalue},
              {"verdict", rep.independent ? "independent" : "dependent"}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path.string() + "': " + e.what());
  }
}

}  // namespace mlpsel::io
