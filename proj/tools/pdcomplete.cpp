// pdcomplete: canonical positive-definite completion from the command line.
//
// Exit codes: 0 ok, 1 unreadable file, 2 validation failure, 3 numerical failure,
// 4 --strict threshold exceeded.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdc/completion.hpp"
#include "pdc/errors.hpp"
#include "pdc/io.hpp"
#include "pdc/stationary.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace pdc;

struct Common {
  double tol = kDefaultPsdTol;
  double svd_cutoff = kDefaultSvdCutoff;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::optional<double> strict;

  Tolerances tolerances() const {
    Tolerances t;
    t.psd = tol;
    t.svd_cutoff = svd_cutoff;
    return t;
  }
};

struct Outputs {
  std::string csv_path;
  std::string report_path;
};

// Files named explicitly are written; the artifact picked by --format also goes to stdout
// unless it already went to a file.
void emit(const Common& common, const Outputs& out, const std::string& csv, const std::string& json) {
  if (!out.csv_path.empty()) write_text_file(out.csv_path, csv);
  if (!out.report_path.empty()) write_text_file(out.report_path, json);
  if (common.format == "csv" && out.csv_path.empty()) std::cout << csv;
  if (common.format == "json" && out.report_path.empty()) std::cout << json;
}

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

KernelSpec load_spec(const std::string& path) { return parse_spec(read_text_file(path)); }

// ---------------------------------------------------------------------------

int run_complete(const Common& common, const std::string& input, const Outputs& out, int checks) {
  const KernelSpec spec = load_spec(input);
  const PartialKernel data = to_partial_kernel(spec, common.tolerances());
  const VerifyOptions verify{checks, common.seed};
  std::optional<CompletionReport> report;
  if (auto cover = spec_cover(spec, data.pattern())) {
    report = canonical_serrated(data, *cover, MergeOrder::kLeftToRight, verify);
  } else if (auto tree = spec_tree(spec, data.pattern())) {
    report = canonical_junction_tree(data, *tree, std::nullopt, verify);
  } else {
    throw StructuralError("complete needs a cover or tree in the input file");
  }
  emit(common, out, matrix_to_csv(report->completion.values(), report->completion.labels()),
       report_to_json(*report));
  return 0;
}

int run_bounds(const Common& common, const std::string& input, const std::vector<int>& entry) {
  const KernelSpec spec = load_spec(input);
  const PartialKernel data = to_partial_kernel(spec, common.tolerances());
  const int n = data.size();
  int x = entry.at(0) - 1, y = entry.at(1) - 1;
  if (x < 0 || y < 0 || x >= n || y >= n) throw ArgumentError("entry outside 1.." + std::to_string(n));
  if (data.specified(x, y)) {
    throw ArgumentError("entry (" + std::to_string(x + 1) + "," + std::to_string(y + 1) +
                        ") is already specified");
  }

  std::optional<std::vector<IndexSet>> two;
  if (auto cover = spec_cover(spec, data.pattern()); cover && cover->block_count() == 2) {
    two = cover->blocks();
  } else if (auto tree = spec_tree(spec, data.pattern()); tree && tree->bag_count() == 2) {
    two = tree->bags();
  }

  Interval range;
  double canonical = 0.0;
  std::string method;
  if (two) {
    IndexSet x1 = (*two)[0], x2 = (*two)[1];
    if (!contains(x1, x)) std::swap(x1, x2);
    range = completion_interval_2serrated(data, x1, x2, x, y);
    canonical = canonical_2serrated(data, x1, x2)(x, y);
    method = "closed-form";
  } else if (data.pattern().free_pairs().size() == 1) {
    range = feasible_interval_single_entry(data, x, y);
    IndexSet all = iota_set(0, n);
    const IndexSet x1 = set_difference(all, {std::max(x, y)});
    const IndexSet x2 = set_difference(all, {std::min(x, y)});
    canonical = canonical_2serrated(data, x1, x2)(x, y);
    method = "bisection";
  } else {
    throw StructuralError(
        "bounds needs a two-block cover or tree, or a pattern with a single unspecified pair");
  }

  Json j;
  j["entry"] = {x + 1, y + 1};
  j["m"] = range.lo;
  j["M"] = range.hi;
  j["canonical"] = canonical;
  j["method"] = method;
  if (common.format == "csv") {
    std::cout << "i,j,m,M,canonical\n"
              << x + 1 << "," << y + 1 << "," << format_double(range.lo) << ","
              << format_double(range.hi) << "," << format_double(canonical) << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int run_extend(const Common& common, const std::string& input, const Outputs& out,
               std::optional<int> points, int refine) {
  const KernelSpec spec = load_spec(input);
  const StationaryFunction fine = spec_stationary(spec, common.tolerances());
  const int w = fine.half_width_steps();
  if (refine < 1) throw ArgumentError("--refine must be at least 1");
  const int coarse_stride = 1 << (refine - 1);
  if (w % coarse_stride != 0) {
    throw ArgumentError("half width of " + std::to_string(w) + " samples is not divisible by " +
                        std::to_string(coarse_stride) + " for " + std::to_string(refine) +
                        " refinement levels");
  }
  const int n = points.value_or(4 * w + 1);
  if (n < w + 1) throw ArgumentError("--points must be at least the number of samples");

  std::vector<Extension> levels;
  std::vector<int> strides;
  for (int level = 0; level < refine; ++level) {
    const int stride = coarse_stride >> level;
    std::vector<double> samples;
    for (int k = 0; k <= w; k += stride) samples.push_back(fine.samples()[k]);
    const StationaryFunction f(std::move(samples), fine.delta() * stride, common.tolerances());
    levels.push_back(canonical_extension_grid(f, (n - 1) / stride + 1));
    strides.push_back(stride);
  }

  std::string csv = "t";
  for (int level = 0; level < refine; ++level) csv += ",level_" + std::to_string(level);
  csv += "\n";
  for (int k = 0; k < n; ++k) {
    csv += format_double(k * fine.delta());
    for (int level = 0; level < refine; ++level) {
      csv += ",";
      if (k % strides[level] == 0) csv += format_double(levels[level].values[k / strides[level]]);
    }
    csv += "\n";
  }

  Json table = Json::array();
  for (int level = 0; level < refine; ++level) {
    const Extension& e = levels[level];
    double diff = 0.0;
    if (level > 0) {
      // Compare on the coarser level's grid.
      const int ratio = strides[level - 1] / strides[level];
      const auto& prev = levels[level - 1].values;
      for (std::size_t k = 0; k < prev.size(); ++k) {
        diff = std::max(diff, std::abs(prev[k] - e.values[k * ratio]));
      }
    }
    const StationaryFunction f(
        std::vector<double>(e.values.begin(), e.values.begin() + e.half_width_steps + 1), e.delta,
        common.tolerances());
    table.push_back({{"level", level},
                     {"delta", e.delta},
                     {"half_width_steps", e.half_width_steps},
                     {"points", static_cast<int>(e.values.size())},
                     {"stationarity_residual", e.stationarity_residual},
                     {"first_free_interval_width", first_free_interval(f).width()},
                     {"diff_from_previous", diff}});
  }
  Json j;
  j["levels"] = std::move(table);
  emit(common, out, csv, j.dump(2) + "\n");
  return 0;
}

int run_verify(const Common& common, const std::string& matrix_path, const std::string& spec_path,
               int checks) {
  std::vector<std::string> labels;
  const Matrix m = csv_to_matrix(read_text_file(matrix_path), &labels);
  const KernelSpec spec = load_spec(spec_path);
  const PartialKernel data = to_partial_kernel(spec, common.tolerances());
  if (m.rows() != data.size()) {
    throw StructuralError("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          " but the input file has n = " + std::to_string(data.size()));
  }
  const KernelMatrix k(m, labels, common.tolerances());
  const CompletionReport report =
      verify_canonical(k, data, spec_structure(spec, data.pattern()), {checks, common.seed});

  if (common.format == "csv") {
    std::cout << "metric,value\n"
              << "min_eig," << format_double(report.min_eig) << "\n"
              << "restriction_residual," << format_double(report.restriction_residual) << "\n"
              << "inverse_offpattern_residual," << format_double(report.inverse_offpattern_residual)
              << "\n"
              << "max_separation_residual," << format_double(report.max_separation_residual) << "\n"
              << "trace_residual," << format_double(report.trace_residual) << "\n"
              << "projection_residual," << format_double(report.projection_residual) << "\n"
              << "logdet," << format_double(report.logdet) << "\n";
  } else {
    std::cout << report_to_json(report);
  }

  if (common.strict) {
    const double residuals[] = {report.restriction_residual, report.inverse_offpattern_residual,
                                report.max_separation_residual, report.trace_residual,
                                report.projection_residual};
    for (double r : residuals) {
      if (std::isfinite(r) && r > *common.strict) return 4;
    }
  }
  return 0;
}

int run_refine(const Common& common, const std::string& input, const Outputs& out,
               std::optional<int> points, int levels) {
  const KernelSpec spec = load_spec(input);
  std::optional<PartialKernel> data;
  int w = 0;
  if (spec.stationary) {
    const StationaryFunction f = spec_stationary(spec, common.tolerances());
    w = f.half_width_steps();
    data = band_partial(f, points.value_or(4 * w + 1));
  } else {
    data = to_partial_kernel(spec, common.tolerances());
    const int n = data->size();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (data->specified(i, j)) w = std::max(w, std::abs(i - j));
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (data->specified(i, j) != (std::abs(i - j) <= w)) {
          throw StructuralError("refine needs a band pattern; pair (" + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + ") breaks the band of half width " +
                                std::to_string(w));
        }
      }
    }
  }
  const RefinementTable table = refine_serrated(*data, dyadic_band_covers(data->size(), w, levels));

  Json rows = Json::array();
  for (std::size_t l = 0; l < table.levels.size(); ++l) {
    rows.push_back({{"level", static_cast<int>(l)},
                    {"block_count", table.levels[l].block_count},
                    {"logdet", number(table.levels[l].completion.logdet())},
                    {"diff_from_previous", table.levels[l].diff_from_previous}});
  }
  Json j;
  j["levels"] = std::move(rows);
  j["monotone"] = table.monotone;
  j["final_gap"] = table.final_gap;
  const KernelMatrix& last = table.levels.back().completion;
  emit(common, out, matrix_to_csv(last.values(), last.labels()), j.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App& app, Common& common) {
  app.add_option("--tol", common.tol, "PSD acceptance tolerance (relative)")
      ->capture_default_str();
  app.add_option("--svd-cutoff", common.svd_cutoff, "pseudo-inverse eigenvalue cutoff (relative)")
      ->capture_default_str();
  app.add_option("--seed", common.seed, "seed for randomized diagnostics")->capture_default_str();
  app.add_option("--format", common.format, "artifact printed on stdout")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical positive-definite completion of partially specified kernels"};
  app.require_subcommand(1);
  Common common;
  add_common(app, common);
  app.fallthrough();

  std::string input, matrix_path;
  Outputs out;
  int checks = 20;
  std::vector<int> entry;
  std::optional<int> points;
  int refine = 1;
  int levels = 4;
  double strict = 0.0;

  auto* complete = app.add_subcommand("complete", "canonical completion of a kernel file");
  complete->add_option("input", input, "kernel file (JSON)")->required();
  complete->add_option("--csv", out.csv_path, "write the completion matrix here");
  complete->add_option("--report", out.report_path, "write the report JSON here");
  complete->add_option("--checks", checks, "randomized checks per diagnostic")->capture_default_str();

  auto* bounds = app.add_subcommand("bounds", "completion range of one unspecified entry");
  bounds->add_option("input", input, "kernel file (JSON)")->required();
  bounds->add_option("--entry", entry, "1-based entry i j")->expected(2)->required();

  auto* extend = app.add_subcommand("extend", "canonical extension of a stationary block");
  extend->add_option("input", input, "kernel file with a stationary block")->required();
  extend->add_option("--points", points, "grid points at the finest level (default 4w+1)");
  extend->add_option("--refine", refine, "dyadic levels ending at the file's spacing")
      ->capture_default_str();
  extend->add_option("--csv", out.csv_path, "write the extension table here");
  extend->add_option("--report", out.report_path, "write the convergence JSON here");

  auto* verify = app.add_subcommand("verify", "diagnostics of a completion against its pattern");
  verify->add_option("matrix", matrix_path, "completion matrix (CSV)")->required();
  verify->add_option("input", input, "kernel file (JSON)")->required();
  verify->add_option("--checks", checks, "randomized checks per diagnostic")->capture_default_str();
  auto* strict_opt = verify->add_option("--strict", strict, "exit 4 when a residual exceeds this");

  auto* refine_cmd = app.add_subcommand("refine", "canonical completions over nested band covers");
  refine_cmd->add_option("input", input, "band kernel or stationary block")->required();
  refine_cmd->add_option("--levels", levels, "dyadic levels")->capture_default_str();
  refine_cmd->add_option("--points", points, "grid points for a stationary block (default 4w+1)");
  refine_cmd->add_option("--csv", out.csv_path, "write the finest completion here");
  refine_cmd->add_option("--report", out.report_path, "write the table JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*strict_opt) common.strict = strict;

  try {
    if (*complete) return run_complete(common, input, out, checks);
    if (*bounds) return run_bounds(common, input, entry);
    if (*extend) return run_extend(common, input, out, points, refine);
    if (*verify) return run_verify(common, matrix_path, input, checks);
    if (*refine_cmd) return run_refine(common, input, out, points, levels);
  } catch (const IoError& e) {
    std::cerr << "pdcomplete: " << e.what() << "\n";
    return 1;
  } catch (const MembershipError& e) {
    std::cerr << "pdcomplete: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "pdcomplete: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "pdcomplete: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
