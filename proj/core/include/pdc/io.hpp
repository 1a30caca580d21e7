#ifndef PDC_IO_HPP
#define PDC_IO_HPP

// File formats. Kernel files are JSON with 1-based indices; matrices
// are CSV with a header row of labels and 17 significant digits per value.
//
//   {
//     "version": "pdc-kernel/1",
//     "n": 3,
//     "labels": ["a", "b", "c"],                 optional
//     "entries": [[1, 1, 1.0], [1, 2, 0.5], ...], (i, j, value); (j, i) is mirrored
//     "cover": [[1, 2], [2, 3]],                  optional serrated cover
//     "tree": {"bags": [[1, 2], ...], "edges": [[1, 2], ...]},   optional
//     "stationary": {"samples": [F(0), F(d), ...], "delta": d}   optional
//   }

#include <optional>
#include <string>
#include <vector>

#include "pdc/completion.hpp"
#include "pdc/errors.hpp"
#include "pdc/stationary.hpp"

namespace pdc {

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kSpecVersion = "pdc-kernel/1";

struct KernelSpec {
  struct Entry {
    int i = 0;  // 0-based
    int j = 0;
    double value = 0.0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  struct Tree {
    std::vector<IndexSet> bags;
    std::vector<TreeEdge> edges;
    friend bool operator==(const Tree&, const Tree&) = default;
  };
  struct Stationary {
    std::vector<double> samples;
    double delta = 0.0;
    friend bool operator==(const Stationary&, const Stationary&) = default;
  };

  std::string version = kSpecVersion;
  int n = 0;
  std::vector<std::string> labels;
  std::vector<Entry> entries;
  std::optional<std::vector<IndexSet>> cover;
  std::optional<Tree> tree;
  std::optional<Stationary> stationary;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Throws StructuralError on schema violations.
KernelSpec parse_spec(const std::string& json_text);
std::string write_spec(const KernelSpec& spec);

/// Mirrors one-sided entries; throws StructuralError naming an asymmetric pair or
/// a missing diagonal entry.
PartialKernel to_partial_kernel(const KernelSpec& spec, Tolerances tol = {});
std::optional<SerratedCover> spec_cover(const KernelSpec& spec, const DomainPattern& pattern);
std::optional<JunctionTree> spec_tree(const KernelSpec& spec, const DomainPattern& pattern);
/// The cover as a path tree, or the tree, whichever is present.
std::optional<JunctionTree> spec_structure(const KernelSpec& spec, const DomainPattern& pattern);
StationaryFunction spec_stationary(const KernelSpec& spec, Tolerances tol = {});

std::string matrix_to_csv(const Matrix& m, const std::vector<std::string>& labels);
/// Parses a square CSV matrix; `labels` receives the header row.
Matrix csv_to_matrix(const std::string& text, std::vector<std::string>* labels = nullptr);

std::string report_to_json(const CompletionReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// printf("%.17g").
std::string format_double(double v);

}  // namespace pdc

#endif  // PDC_IO_HPP
