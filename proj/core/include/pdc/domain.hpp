#ifndef PDC_DOMAIN_HPP
#define PDC_DOMAIN_HPP

// Domains as graphs on {0..n-1}: specified pairs are edges. Serrated covers
// and junction trees parametrize the domains on which canonical completions
// are computed in closed form.

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "pdc/index_set.hpp"

namespace pdc {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Symmetric pattern containing the diagonal. Construct through validate_domain.
class DomainPattern {
 public:
  DomainPattern() = default;

  int size() const { return static_cast<int>(mask_.rows()); }
  bool specified(int i, int j) const { return mask_(i, j); }
  const BoolMatrix& mask() const { return mask_; }

  /// Sorted neighbours of x, excluding x.
  const IndexSet& neighbours(int x) const { return adjacency_[x]; }

  /// True when A x A lies inside the pattern.
  bool is_clique(const IndexSet& a) const;

  /// Unspecified pairs (i < j).
  std::vector<std::pair<int, int>> free_pairs() const;

  static DomainPattern full(int n);
  static DomainPattern diagonal(int n);
  /// Union of the blocks' squares plus the diagonal.
  static DomainPattern from_blocks(int n, const std::vector<IndexSet>& blocks);

  friend bool operator==(const DomainPattern& a, const DomainPattern& b) {
    return a.mask_ == b.mask_;
  }

 private:
  friend DomainPattern validate_domain(const BoolMatrix& mask);
  explicit DomainPattern(BoolMatrix mask);

  BoolMatrix mask_;
  std::vector<IndexSet> adjacency_;
};

/// Throws StructuralError naming the first missing diagonal entry or asymmetric pair (1-based).
DomainPattern validate_domain(const BoolMatrix& mask);

/// Ordered cover X_1..X_m with the running-intersection property.
class SerratedCover {
 public:
  int size() const { return n_; }
  const std::vector<IndexSet>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  /// X_k ∩ X_{k+1}, k = 0..m-2.
  std::vector<IndexSet> overlaps() const;
  DomainPattern induced_pattern() const { return DomainPattern::from_blocks(n_, blocks_); }

 private:
  friend SerratedCover validate_serrated(std::vector<IndexSet>, const DomainPattern&);
  friend SerratedCover band_cover(int, int);
  SerratedCover(int n, std::vector<IndexSet> blocks) : n_(n), blocks_(std::move(blocks)) {}

  int n_ = 0;
  std::vector<IndexSet> blocks_;
};

/// Checks union = X, running intersection over all triples i<j<k, and that the
/// induced pattern equals `pattern`. Throws StructuralError describing the violation.
SerratedCover validate_serrated(std::vector<IndexSet> blocks, const DomainPattern& pattern);

/// Blocks {t, ..., t+w} for t = 0..n-w-1.
SerratedCover band_cover(int n_points, int half_bandwidth);

using TreeEdge = std::pair<int, int>;

/// Bags on a tree whose pairwise bag intersections lie in every bag along the connecting path.
class JunctionTree {
 public:
  int size() const { return n_; }
  const std::vector<IndexSet>& bags() const { return bags_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  int bag_count() const { return static_cast<int>(bags_.size()); }
  const std::vector<int>& bag_neighbours(int b) const { return tree_adjacency_[b]; }

  /// Bag indices along the unique tree path from bag a to bag b, inclusive.
  std::vector<int> path(int a, int b) const;
  /// X_i ∩ X_j for each edge, in edge order.
  std::vector<IndexSet> separators() const;
  DomainPattern induced_pattern() const { return DomainPattern::from_blocks(n_, bags_); }

  /// The path-shaped tree 0-1-...-(m-1) carrying the cover's blocks.
  static JunctionTree from_cover(const SerratedCover& cover);

 private:
  friend JunctionTree validate_junction_tree(std::vector<IndexSet>, std::vector<TreeEdge>,
                                             const DomainPattern&);
  JunctionTree(int n, std::vector<IndexSet> bags, std::vector<TreeEdge> edges);

  int n_ = 0;
  std::vector<IndexSet> bags_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<int>> tree_adjacency_;
};

/// Edges are 0-based bag indices. Throws StructuralError for non-tree edge sets,
/// junction violations (names the bags), or pattern mismatch.
JunctionTree validate_junction_tree(std::vector<IndexSet> bags, std::vector<TreeEdge> edges,
                                    const DomainPattern& pattern);

/// True iff every path from x to y in the pattern graph meets s. Disconnected
/// points are separated by the empty set. Throws ArgumentError if x or y is in s.
bool verify_separator(const DomainPattern& pattern, const IndexSet& s, int x, int y);

}  // namespace pdc

#endif  // PDC_DOMAIN_HPP
