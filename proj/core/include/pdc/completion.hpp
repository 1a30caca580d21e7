#ifndef PDC_COMPLETION_HPP
#define PDC_COMPLETION_HPP

// Canonical positive-definite completion of partially specified kernels.
//
// On a serrated or junction-tree domain the canonical completion fills each
// unspecified pair (x, y) with <k_{x,S}, k_{y,S}> = k_{x,S}^T K_S^+ k_{y,S},
// where S is the separator produced when the two blocks holding x and y are
// merged. Its inverse vanishes off the pattern and it maximizes log det among
// all completions; the routines here compute it, check those characterizations
// independently, and explore the surrounding completion set.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdc/domain.hpp"
#include "pdc/kernel.hpp"

namespace pdc {

/// Values on a symmetric pattern. Entries off the pattern are stored as zero and ignored.
class PartialKernel {
 public:
  /// Throws StructuralError when a specified pair is asymmetric (names the pair, 1-based).
  PartialKernel(DomainPattern pattern, Matrix values, std::vector<std::string> labels = {},
                Tolerances tol = {});

  /// K restricted to `pattern`.
  static PartialKernel restrict(const KernelMatrix& k, const DomainPattern& pattern);

  int size() const { return pattern_.size(); }
  const DomainPattern& pattern() const { return pattern_; }
  const Matrix& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Tolerances& tolerances() const { return tol_; }
  bool specified(int i, int j) const { return pattern_.specified(i, j); }

  /// Largest diagonal value; the natural magnitude for absolute tolerances.
  double scale() const;

  /// The fully specified block K_A; throws StructuralError if A x A leaves the
  /// pattern and DefinitenessError if the block is not PSD.
  KernelMatrix block(const IndexSet& a) const;

 private:
  DomainPattern pattern_;
  Matrix values_;
  std::vector<std::string> labels_;
  Tolerances tol_;
};

struct SeparationResidual {
  int x = 0;
  int y = 0;
  IndexSet separator;
  double residual = 0.0;
};

struct CompletionReport {
  KernelMatrix completion;
  double min_eig = 0.0;
  /// max |K(x,y) - K_Omega(x,y)| over the pattern; 0 when no data was supplied.
  double restriction_residual = 0.0;
  /// max |(K^+)_ij| off the pattern over max |(K^+)_ij|.
  double inverse_offpattern_residual = 0.0;
  double logdet = 0.0;
  std::vector<SeparationResidual> separation_residuals{};
  double max_separation_residual = 0.0;
  /// max |tr(K^+ P)| / (|K^+| |P|) over random symmetric P vanishing on the pattern.
  double trace_residual = 0.0;
  /// |(sum_bags Pi - sum_separators Pi - I) G| / |G| in Gram coordinates; NaN without a tree.
  double projection_residual = 0.0;
};

struct VerifyOptions {
  int n_checks = 20;
  std::uint64_t seed = 0;
};

enum class MergeOrder { kLeftToRight, kRightToLeft };

/// Canonical completion on (X1 x X1) ∪ (X2 x X2). Symmetric in X1, X2.
KernelMatrix canonical_2serrated(const PartialKernel& data, const IndexSet& x1,
                                 const IndexSet& x2);

/// Merges adjacent blocks by the two-block formula until the matrix is complete.
KernelMatrix complete_serrated(const PartialKernel& data, const SerratedCover& cover,
                               MergeOrder order = MergeOrder::kLeftToRight);

CompletionReport canonical_serrated(const PartialKernel& data, const SerratedCover& cover,
                                    MergeOrder order = MergeOrder::kLeftToRight,
                                    VerifyOptions verify = {});

/// Contracts tree edges in `edge_order` (indices into tree.edges()); defaults to
/// leaf-pruning order.
KernelMatrix complete_junction_tree(const PartialKernel& data, const JunctionTree& tree,
                                    std::optional<std::vector<int>> edge_order = std::nullopt);

CompletionReport canonical_junction_tree(const PartialKernel& data, const JunctionTree& tree,
                                         std::optional<std::vector<int>> edge_order = std::nullopt,
                                         VerifyOptions verify = {});

/// Leaf-pruning edge order: repeatedly removes the lowest-numbered leaf bag.
std::vector<int> leaf_pruning_order(const JunctionTree& tree);

/// sum over bags of padded K_bag^+ minus sum over separators of padded K_sep^+.
/// Vanishes exactly off the pattern.
Matrix precision_assembly(const PartialKernel& data, const SerratedCover& cover);
Matrix precision_assembly(const PartialKernel& data, const JunctionTree& tree);

/// sum_j |f_{X_j}|^2 - sum_j |f_{X_j ∩ X_{j+1}}|^2, each norm in its block's RKHS.
double canonical_norm_sq(const Vector& f, const PartialKernel& data, const SerratedCover& cover);

/// Canonical entry (x, y) recovered from the dual problem over the assembled precision.
double canonical_via_duality(const PartialKernel& data, const SerratedCover& cover, int x, int y);

/// argmin_f |f|^2 - 2 f(x) via the normal equations; equals k_x.
RkhsElement generator_variational(std::shared_ptr<const KernelMatrix> k, int x);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double center() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

/// Closed-form range of K(x, y) over all completions of the two-block instance.
/// Requires x in X1 \ X2 and y in X2 \ X1.
Interval completion_interval_2serrated(const PartialKernel& data, const IndexSet& x1,
                                       const IndexSet& x2, int x, int y);

/// Feasible range of the single unspecified pair (x, y) by eigenvalue bisection.
/// The search box is the Cauchy-Schwarz bound sqrt(K_xx K_yy).
Interval feasible_interval_single_entry(const PartialKernel& data, int x, int y,
                                        double psd_tol = 1e-12);

/// Completion canonical + (P^{1/2} C Q^{1/2}) on the (X1\X2) x (X2\X1) block, where
/// P, Q are the Schur complements of the separator in each block and |C| <= 1.
KernelMatrix johnson_completion(const PartialKernel& data, const IndexSet& x1, const IndexSet& x2,
                                const Matrix& contraction);

/// Random contraction with operator norm u(1 - 1e-6), u ~ U[0, 1]; seed-deterministic.
KernelMatrix sample_completion(const PartialKernel& data, const IndexSet& x1, const IndexSet& x2,
                               std::uint64_t seed);

struct MaxdetOptions {
  int max_passes = 20000;
  /// Stop when the largest entry change in a pass is below tol * scale.
  double tol = 1e-13;
};

/// Cyclic coordinate ascent of log det over the unspecified entries, any pattern.
/// Throws NumericalError when no strictly positive-definite start is reached or
/// the iteration does not converge.
KernelMatrix maxdet_oracle(const PartialKernel& data, MaxdetOptions options = {});

/// Residual diagnostics of a completion against the canonical characterizations.
CompletionReport verify_canonical(const KernelMatrix& k, const DomainPattern& pattern,
                                  const std::optional<JunctionTree>& structure,
                                  VerifyOptions options = {});
/// As above, also measuring agreement with the data on the pattern.
CompletionReport verify_canonical(const KernelMatrix& k, const PartialKernel& data,
                                  const std::optional<JunctionTree>& structure,
                                  VerifyOptions options = {});

struct RefinementLevel {
  int block_count = 0;
  KernelMatrix completion;
  /// max entrywise difference to the previous level; 0 for the first level.
  double diff_from_previous = 0.0;
};

struct RefinementTable {
  std::vector<RefinementLevel> levels;
  /// Consecutive differences non-increasing within 10% slack.
  bool monotone = true;
  double final_gap = 0.0;
};

/// Nested band covers of half-width w with block starts on strides 2^{L-1}, ..., 2, 1;
/// the final level is the full band.
std::vector<SerratedCover> dyadic_band_covers(int n, int w, int levels);

/// Canonical completion of the data restricted to each nested cover in turn.
RefinementTable refine_serrated(const PartialKernel& data, const std::vector<SerratedCover>& covers);

}  // namespace pdc

#endif  // PDC_COMPLETION_HPP
