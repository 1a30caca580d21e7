#include "pdc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace pdc {

using Json = nlohmann::ordered_json;

namespace {

std::string pair_str(int i, int j) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

int one_based_index(const Json& v, int n, const char* what) {
  if (!v.is_number_integer()) throw StructuralError(std::string(what) + " index is not an integer");
  const int i = v.get<int>();
  if (i < 1 || (n > 0 && i > n)) {
    throw StructuralError(std::string(what) + " index " + std::to_string(i) + " outside 1.." +
                          std::to_string(n));
  }
  return i - 1;
}

std::vector<IndexSet> parse_sets(const Json& j, int n, const char* what) {
  if (!j.is_array()) throw StructuralError(std::string(what) + " must be an array of index lists");
  std::vector<IndexSet> out;
  for (const auto& set : j) {
    if (!set.is_array()) throw StructuralError(std::string(what) + " entries must be index lists");
    IndexSet s;
    for (const auto& v : set) s.push_back(one_based_index(v, n, what));
    out.push_back(std::move(s));
  }
  return out;
}

Json sets_json(const std::vector<IndexSet>& sets) {
  Json out = Json::array();
  for (const auto& s : sets) {
    Json row = Json::array();
    for (int i : s) row.push_back(i + 1);
    out.push_back(std::move(row));
  }
  return out;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

KernelSpec parse_spec(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw StructuralError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw StructuralError("kernel file must be a JSON object");

  KernelSpec spec;
  try {
    spec.version = j.value("version", std::string(kSpecVersion));
    spec.n = j.value("n", 0);
    if (spec.n < 0) throw StructuralError("n must be non-negative");
    if (j.contains("labels")) {
      spec.labels = j.at("labels").get<std::vector<std::string>>();
      if (static_cast<int>(spec.labels.size()) != spec.n) {
        throw StructuralError("label count does not match n");
      }
    }
    if (j.contains("entries")) {
      for (const auto& e : j.at("entries")) {
        if (!e.is_array() || e.size() != 3 || !e[2].is_number()) {
          throw StructuralError("entries must be [i, j, value] triples");
        }
        spec.entries.push_back(
            {one_based_index(e[0], spec.n, "entry"), one_based_index(e[1], spec.n, "entry"),
             e[2].get<double>()});
      }
    }
    if (j.contains("cover")) spec.cover = parse_sets(j.at("cover"), spec.n, "cover");
    if (j.contains("tree")) {
      const Json& t = j.at("tree");
      KernelSpec::Tree tree;
      tree.bags = parse_sets(t.at("bags"), spec.n, "bag");
      for (const auto& e : t.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw StructuralError("tree edges must be pairs");
        const int m = static_cast<int>(tree.bags.size());
        tree.edges.emplace_back(one_based_index(e[0], m, "edge"), one_based_index(e[1], m, "edge"));
      }
      spec.tree = std::move(tree);
    }
    if (j.contains("stationary")) {
      const Json& s = j.at("stationary");
      spec.stationary = KernelSpec::Stationary{s.at("samples").get<std::vector<double>>(),
                                               s.at("delta").get<double>()};
    }
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("invalid kernel file: ") + e.what());
  }
  return spec;
}

std::string write_spec(const KernelSpec& spec) {
  Json j;
  j["version"] = spec.version;
  j["n"] = spec.n;
  if (!spec.labels.empty()) j["labels"] = spec.labels;
  Json entries = Json::array();
  for (const auto& e : spec.entries) entries.push_back(Json::array({e.i + 1, e.j + 1, e.value}));
  j["entries"] = std::move(entries);
  if (spec.cover) j["cover"] = sets_json(*spec.cover);
  if (spec.tree) {
    Json edges = Json::array();
    for (const auto& [a, b] : spec.tree->edges) edges.push_back(Json::array({a + 1, b + 1}));
    j["tree"] = {{"bags", sets_json(spec.tree->bags)}, {"edges", std::move(edges)}};
  }
  if (spec.stationary) {
    j["stationary"] = {{"samples", spec.stationary->samples}, {"delta", spec.stationary->delta}};
  }
  return j.dump(2) + "\n";
}

PartialKernel to_partial_kernel(const KernelSpec& spec, Tolerances tol) {
  const int n = spec.n;
  BoolMatrix mask = BoolMatrix::Constant(n, n, false);
  Matrix values = Matrix::Zero(n, n);
  // Explicit entries first so mirrored values never mask a conflicting pair.
  std::map<std::pair<int, int>, double> given;
  for (const auto& e : spec.entries) {
    auto [it, inserted] = given.emplace(std::pair{e.i, e.j}, e.value);
    if (!inserted && it->second != e.value) {
      throw StructuralError("conflicting values for entry " + pair_str(e.i, e.j));
    }
  }
  for (const auto& [ij, v] : given) {
    const auto [i, j] = ij;
    auto mirror = given.find({j, i});
    if (mirror != given.end() && mirror->second != v) {
      throw StructuralError("asymmetric pair " + pair_str(std::max(i, j), std::min(i, j)) + ": " +
                            format_double(given.at({std::max(i, j), std::min(i, j)})) + " vs " +
                            format_double(given.at({std::min(i, j), std::max(i, j)})));
    }
    mask(i, j) = mask(j, i) = true;
    values(i, j) = values(j, i) = v;
  }
  return PartialKernel(validate_domain(mask), std::move(values), spec.labels, tol);
}

std::optional<SerratedCover> spec_cover(const KernelSpec& spec, const DomainPattern& pattern) {
  if (!spec.cover) return std::nullopt;
  return validate_serrated(*spec.cover, pattern);
}

std::optional<JunctionTree> spec_tree(const KernelSpec& spec, const DomainPattern& pattern) {
  if (!spec.tree) return std::nullopt;
  return validate_junction_tree(spec.tree->bags, spec.tree->edges, pattern);
}

std::optional<JunctionTree> spec_structure(const KernelSpec& spec, const DomainPattern& pattern) {
  if (auto cover = spec_cover(spec, pattern)) return JunctionTree::from_cover(*cover);
  return spec_tree(spec, pattern);
}

StationaryFunction spec_stationary(const KernelSpec& spec, Tolerances tol) {
  if (!spec.stationary) throw StructuralError("kernel file has no stationary block");
  return StationaryFunction(spec.stationary->samples, spec.stationary->delta, tol);
}

std::string matrix_to_csv(const Matrix& m, const std::vector<std::string>& labels) {
  std::string out;
  const std::vector<std::string> names = labels.empty() ? default_labels(m.rows()) : labels;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + format_double(m(i, j));
    out += "\n";
  }
  return out;
}

Matrix csv_to_matrix(const std::string& text, std::vector<std::string>* labels) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  if (!std::getline(in, line)) throw StructuralError("matrix CSV is empty");
  const std::vector<std::string> header = split(line);
  const Eigen::Index n = static_cast<Eigen::Index>(header.size());
  Matrix m(n, n);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (row >= n || static_cast<Eigen::Index>(cells.size()) != n) {
      throw StructuralError("matrix CSV is not square with " + std::to_string(n) + " columns");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      try {
        std::size_t used = 0;
        m(row, j) = std::stod(cells[j], &used);
        if (used != cells[j].size()) throw std::invalid_argument(cells[j]);
      } catch (const std::exception&) {
        throw StructuralError("matrix CSV has a non-numeric cell at row " + std::to_string(row + 1));
      }
    }
    ++row;
  }
  if (row != n) throw StructuralError("matrix CSV is not square with " + std::to_string(n) + " rows");
  if (labels) *labels = header;
  return m;
}

std::string report_to_json(const CompletionReport& report) {
  Json j;
  j["n"] = report.completion.size();
  j["labels"] = report.completion.labels();
  j["min_eig"] = report.min_eig;
  j["restriction_residual"] = report.restriction_residual;
  j["inverse_offpattern_residual"] = report.inverse_offpattern_residual;
  j["logdet"] = std::isfinite(report.logdet) ? Json(report.logdet) : Json("-inf");
  j["trace_residual"] = report.trace_residual;
  j["projection_residual"] = number_or_null(report.projection_residual);
  j["max_separation_residual"] = report.max_separation_residual;
  Json seps = Json::array();
  for (const auto& s : report.separation_residuals) {
    Json sep = Json::array();
    for (int v : s.separator) sep.push_back(v + 1);
    seps.push_back({{"x", s.x + 1}, {"y", s.y + 1}, {"separator", std::move(sep)},
                    {"residual", s.residual}});
  }
  j["separation_residuals"] = std::move(seps);
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

}  // namespace pdc
