#include "pdc/domain.hpp"

#include <deque>
#include <numeric>
#include <sstream>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

std::string pair_str(int i, int j) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

std::vector<IndexSet> normalized_sets(std::vector<IndexSet> sets, int n, const char* what) {
  for (std::size_t k = 0; k < sets.size(); ++k) {
    sets[k] = normalized(std::move(sets[k]));
    if (sets[k].empty()) {
      throw StructuralError(std::string(what) + " " + std::to_string(k + 1) + " is empty");
    }
    if (sets[k].front() < 0 || sets[k].back() >= n) {
      throw StructuralError(std::string(what) + " " + std::to_string(k + 1) +
                            " has an index outside 1.." + std::to_string(n));
    }
  }
  return sets;
}

void require_cover(const std::vector<IndexSet>& sets, int n, const char* what) {
  IndexSet all;
  for (const auto& s : sets) all = set_union(all, s);
  if (static_cast<int>(all.size()) != n) {
    const IndexSet missing = complement(n, all);
    throw StructuralError(std::string(what) + " do not cover the point set; missing " +
                          format_one_based(missing));
  }
}

void require_pattern(const DomainPattern& induced, const DomainPattern& pattern, const char* what) {
  if (induced.size() != pattern.size()) {
    throw StructuralError(std::string(what) + " and pattern have different point counts");
  }
  for (int i = 0; i < pattern.size(); ++i) {
    for (int j = 0; j < pattern.size(); ++j) {
      if (induced.specified(i, j) != pattern.specified(i, j)) {
        throw StructuralError(std::string(what) + " induce a different pattern at " +
                              pair_str(i, j));
      }
    }
  }
}

}  // namespace

DomainPattern::DomainPattern(BoolMatrix mask) : mask_(std::move(mask)) {
  adjacency_.resize(size());
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (i != j && mask_(i, j)) adjacency_[i].push_back(j);
    }
  }
}

bool DomainPattern::is_clique(const IndexSet& a) const {
  for (int i : a) {
    for (int j : a) {
      if (!mask_(i, j)) return false;
    }
  }
  return true;
}

std::vector<std::pair<int, int>> DomainPattern::free_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if (!mask_(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

DomainPattern DomainPattern::full(int n) { return DomainPattern(BoolMatrix::Constant(n, n, true)); }

DomainPattern DomainPattern::diagonal(int n) {
  BoolMatrix m = BoolMatrix::Constant(n, n, false);
  for (int i = 0; i < n; ++i) m(i, i) = true;
  return DomainPattern(std::move(m));
}

DomainPattern DomainPattern::from_blocks(int n, const std::vector<IndexSet>& blocks) {
  BoolMatrix m = BoolMatrix::Constant(n, n, false);
  for (int i = 0; i < n; ++i) m(i, i) = true;
  for (const auto& b : blocks) {
    for (int i : b) {
      for (int j : b) m(i, j) = true;
    }
  }
  return DomainPattern(std::move(m));
}

DomainPattern validate_domain(const BoolMatrix& mask) {
  if (mask.rows() != mask.cols()) throw StructuralError("domain mask is not square");
  const int n = static_cast<int>(mask.rows());
  for (int i = 0; i < n; ++i) {
    if (!mask(i, i)) throw StructuralError("domain is missing diagonal entry " + pair_str(i, i));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (mask(i, j) && !mask(j, i)) {
        throw StructuralError("domain is not symmetric at pair " + pair_str(j, i));
      }
      if (mask(j, i) && !mask(i, j)) {
        throw StructuralError("domain is not symmetric at pair " + pair_str(i, j));
      }
    }
  }
  return DomainPattern(mask);
}

std::vector<IndexSet> SerratedCover::overlaps() const {
  std::vector<IndexSet> out;
  for (std::size_t k = 0; k + 1 < blocks_.size(); ++k) {
    out.push_back(set_intersection(blocks_[k], blocks_[k + 1]));
  }
  return out;
}

SerratedCover validate_serrated(std::vector<IndexSet> blocks, const DomainPattern& pattern) {
  const int n = pattern.size();
  if (blocks.empty()) throw StructuralError("serrated cover has no blocks");
  blocks = normalized_sets(std::move(blocks), n, "block");
  require_cover(blocks, n, "blocks");

  const int m = static_cast<int>(blocks.size());
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const IndexSet ij = set_intersection(blocks[i], blocks[j]);
      for (int k = j + 1; k < m; ++k) {
        if (!is_subset(set_intersection(blocks[i], blocks[k]), ij)) {
          std::ostringstream os;
          os << "running-intersection violation at blocks (" << i + 1 << "," << j + 1 << ","
             << k + 1 << "): X" << i + 1 << " ∩ X" << k + 1 << " is not contained in X" << i + 1
             << " ∩ X" << j + 1;
          throw StructuralError(os.str());
        }
      }
    }
  }
  require_pattern(DomainPattern::from_blocks(n, blocks), pattern, "blocks");
  return SerratedCover(n, std::move(blocks));
}

SerratedCover band_cover(int n_points, int half_bandwidth) {
  if (half_bandwidth < 1 || half_bandwidth >= n_points) {
    throw ArgumentError("half bandwidth must satisfy 1 <= w < n (got w=" +
                        std::to_string(half_bandwidth) + ", n=" + std::to_string(n_points) + ")");
  }
  std::vector<IndexSet> blocks;
  for (int t = 0; t + half_bandwidth < n_points; ++t) {
    blocks.push_back(iota_set(t, half_bandwidth + 1));
  }
  return SerratedCover(n_points, std::move(blocks));
}

JunctionTree::JunctionTree(int n, std::vector<IndexSet> bags, std::vector<TreeEdge> edges)
    : n_(n), bags_(std::move(bags)), edges_(std::move(edges)) {
  tree_adjacency_.resize(bags_.size());
  for (const auto& [a, b] : edges_) {
    tree_adjacency_[a].push_back(b);
    tree_adjacency_[b].push_back(a);
  }
}

std::vector<int> JunctionTree::path(int a, int b) const {
  std::vector<int> parent(bags_.size(), -1);
  std::deque<int> queue{a};
  parent[a] = a;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (u == b) break;
    for (int v : tree_adjacency_[u]) {
      if (parent[v] < 0) {
        parent[v] = u;
        queue.push_back(v);
      }
    }
  }
  std::vector<int> out;
  for (int u = b; u != a; u = parent[u]) out.push_back(u);
  out.push_back(a);
  return {out.rbegin(), out.rend()};
}

std::vector<IndexSet> JunctionTree::separators() const {
  std::vector<IndexSet> out;
  for (const auto& [a, b] : edges_) out.push_back(set_intersection(bags_[a], bags_[b]));
  return out;
}

JunctionTree JunctionTree::from_cover(const SerratedCover& cover) {
  std::vector<TreeEdge> edges;
  for (int k = 0; k + 1 < cover.block_count(); ++k) edges.emplace_back(k, k + 1);
  return JunctionTree(cover.size(), cover.blocks(), std::move(edges));
}

JunctionTree validate_junction_tree(std::vector<IndexSet> bags, std::vector<TreeEdge> edges,
                                    const DomainPattern& pattern) {
  const int n = pattern.size();
  if (bags.empty()) throw StructuralError("junction tree has no bags");
  bags = normalized_sets(std::move(bags), n, "bag");
  const int m = static_cast<int>(bags.size());

  if (static_cast<int>(edges.size()) != m - 1) {
    throw StructuralError("edges do not form a tree: " + std::to_string(edges.size()) +
                          " edges for " + std::to_string(m) + " bags");
  }
  // Union-find for connectivity and cycle detection.
  std::vector<int> root(m);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int u) {
    while (root[u] != u) u = root[u] = root[root[u]];
    return u;
  };
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m || a == b) {
      throw StructuralError("edge " + pair_str(a, b) + " is not between two distinct bags");
    }
    const int ra = find(a), rb = find(b);
    if (ra == rb) throw StructuralError("edges do not form a tree: edge " + pair_str(a, b) +
                                        " closes a cycle");
    root[ra] = rb;
  }

  require_cover(bags, n, "bags");
  JunctionTree tree(n, std::move(bags), std::move(edges));
  const auto& b = tree.bags();
  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      const IndexSet shared = set_intersection(b[i], b[k]);
      if (shared.empty()) continue;
      for (int j : tree.path(i, k)) {
        if (!is_subset(shared, b[j])) {
          std::ostringstream os;
          os << "junction violation at bags (" << i + 1 << "," << j + 1 << "," << k + 1
             << "): X" << i + 1 << " ∩ X" << k + 1 << " is not contained in X" << j + 1;
          throw StructuralError(os.str());
        }
      }
    }
  }
  require_pattern(tree.induced_pattern(), pattern, "bags");
  return tree;
}

bool verify_separator(const DomainPattern& pattern, const IndexSet& sep, int x, int y) {
  const IndexSet s = normalized(sep);
  if (contains(s, x) || contains(s, y)) {
    throw ArgumentError("separator must not contain the separated points");
  }
  if (x == y) return false;
  std::vector<char> seen(pattern.size(), 0);
  for (int v : s) seen[v] = 1;
  std::deque<int> queue{x};
  seen[x] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : pattern.neighbours(u)) {
      if (v == y) return false;
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return true;
}

}  // namespace pdc
