#include "pdc/completion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

Matrix symmetric_sqrt(const Matrix& m) {
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// Fills the (a \ b) x (b \ a) block of k from k_{x,S}^T K_S^+ k_{y,S}, S = a ∩ b.
// k must be known on a x a and b x b. The computation is oriented by the smaller
// leading index so that swapping a and b gives bit-identical output.
void merge_blocks(Matrix& k, const IndexSet& a, const IndexSet& b, double cutoff) {
  IndexSet left = set_difference(a, b);
  IndexSet right = set_difference(b, a);
  if (left.empty() || right.empty()) return;
  if (right.front() < left.front()) std::swap(left, right);
  const IndexSet sep = set_intersection(a, b);

  Matrix cross = Matrix::Zero(left.size(), right.size());
  if (!sep.empty()) {
    cross = submatrix(k, left, sep) * pseudo_inverse(submatrix(k, sep), cutoff) *
            submatrix(k, sep, right);
  }
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      k(left[i], right[j]) = cross(i, j);
      k(right[j], left[i]) = cross(i, j);
    }
  }
}

void require_blocks_psd(const PartialKernel& data, const std::vector<IndexSet>& blocks) {
  for (const auto& b : blocks) (void)data.block(b);
}

void pad_add(Matrix& target, const IndexSet& idx, const Matrix& local, double sign) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) target(idx[i], idx[j]) += sign * local(i, j);
  }
}

KernelMatrix finish(const Matrix& values, const PartialKernel& data) {
  return KernelMatrix(values, data.labels(), data.tolerances());
}

struct TwoBlock {
  SerratedCover cover;
  IndexSet sep, only1, only2;
};

TwoBlock two_block(const PartialKernel& data, const IndexSet& x1, const IndexSet& x2) {
  SerratedCover cover = validate_serrated({x1, x2}, data.pattern());
  const IndexSet& a = cover.blocks()[0];
  const IndexSet& b = cover.blocks()[1];
  return TwoBlock{cover, set_intersection(a, b), set_difference(a, b), set_difference(b, a)};
}

Matrix schur_on(const Matrix& k, const IndexSet& keep, const IndexSet& sep, double cutoff) {
  Matrix out = submatrix(k, keep);
  if (!sep.empty()) {
    const Matrix cross = submatrix(k, keep, sep);
    out -= cross * pseudo_inverse(submatrix(k, sep), cutoff) * cross.transpose();
  }
  return 0.5 * (out + out.transpose());
}

double max_offpattern_ratio(const Matrix& inv, const DomainPattern& pattern) {
  const double top = inv.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0.0;
  double worst = 0.0;
  for (int i = 0; i < pattern.size(); ++i) {
    for (int j = 0; j < pattern.size(); ++j) {
      if (!pattern.specified(i, j)) worst = std::max(worst, std::abs(inv(i, j)));
    }
  }
  return worst / top;
}

}  // namespace

// ---------------------------------------------------------------------------
// PartialKernel

PartialKernel::PartialKernel(DomainPattern pattern, Matrix values, std::vector<std::string> labels,
                             Tolerances tol)
    : pattern_(std::move(pattern)), values_(std::move(values)), tol_(tol) {
  const int n = pattern_.size();
  if (values_.rows() != n || values_.cols() != n) {
    throw StructuralError("value matrix does not match the pattern size");
  }
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (pattern_.specified(i, j)) scale = std::max(scale, std::abs(values_(i, j)));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!pattern_.specified(i, j)) {
        values_(i, j) = values_(j, i) = 0.0;
        continue;
      }
      if (std::abs(values_(i, j) - values_(j, i)) > kSymmetryTol * scale) {
        std::ostringstream os;
        os << "asymmetric pair (" << i + 1 << "," << j + 1 << "): " << values_(i, j) << " vs "
           << values_(j, i);
        throw StructuralError(os.str());
      }
      values_(j, i) = values_(i, j);
    }
  }
  labels_ = labels.empty() ? default_labels(n) : std::move(labels);
  if (static_cast<int>(labels_.size()) != n) {
    throw StructuralError("label count does not match point count");
  }
}

PartialKernel PartialKernel::restrict(const KernelMatrix& k, const DomainPattern& pattern) {
  return PartialKernel(pattern, k.values(), k.labels(), k.tolerances());
}

double PartialKernel::scale() const { return size() ? values_.diagonal().cwiseAbs().maxCoeff() : 0.0; }

KernelMatrix PartialKernel::block(const IndexSet& a) const {
  if (!pattern_.is_clique(a)) {
    throw StructuralError("block " + format_one_based(a) + " is not fully specified");
  }
  try {
    std::vector<std::string> labels;
    for (int i : a) labels.push_back(labels_[i]);
    return KernelMatrix(submatrix(values_, a), std::move(labels), tol_);
  } catch (const DefinitenessError& e) {
    throw DefinitenessError("block " + format_one_based(a) + " is not positive semidefinite: " +
                            e.what());
  }
}

// ---------------------------------------------------------------------------
// Canonical completions

KernelMatrix canonical_2serrated(const PartialKernel& data, const IndexSet& x1,
                                 const IndexSet& x2) {
  const TwoBlock tb = two_block(data, x1, x2);
  require_blocks_psd(data, tb.cover.blocks());
  Matrix k = data.values();
  merge_blocks(k, tb.cover.blocks()[0], tb.cover.blocks()[1], data.tolerances().svd_cutoff);
  return finish(k, data);
}

KernelMatrix complete_serrated(const PartialKernel& data, const SerratedCover& cover,
                               MergeOrder order) {
  if (cover.size() != data.size()) throw ArgumentError("cover size does not match the data");
  const auto& blocks = cover.blocks();
  require_blocks_psd(data, blocks);
  const double cutoff = data.tolerances().svd_cutoff;
  Matrix k = data.values();
  const int m = cover.block_count();
  if (order == MergeOrder::kLeftToRight) {
    IndexSet acc = blocks.front();
    for (int j = 1; j < m; ++j) {
      merge_blocks(k, acc, blocks[j], cutoff);
      acc = set_union(acc, blocks[j]);
    }
  } else {
    IndexSet acc = blocks.back();
    for (int j = m - 2; j >= 0; --j) {
      merge_blocks(k, blocks[j], acc, cutoff);
      acc = set_union(acc, blocks[j]);
    }
  }
  return finish(k, data);
}

CompletionReport canonical_serrated(const PartialKernel& data, const SerratedCover& cover,
                                    MergeOrder order, VerifyOptions verify) {
  return verify_canonical(complete_serrated(data, cover, order), data,
                          JunctionTree::from_cover(cover), verify);
}

std::vector<int> leaf_pruning_order(const JunctionTree& tree) {
  const int m = tree.bag_count();
  std::vector<int> degree(m, 0);
  for (const auto& [a, b] : tree.edges()) {
    ++degree[a];
    ++degree[b];
  }
  std::vector<char> removed(m, 0), edge_used(tree.edges().size(), 0);
  std::vector<int> order;
  for (int step = 0; step + 1 < m; ++step) {
    int leaf = 0;
    while (removed[leaf] || degree[leaf] != 1) ++leaf;
    for (std::size_t e = 0; e < tree.edges().size(); ++e) {
      const auto& [a, b] = tree.edges()[e];
      if (edge_used[e] || (a != leaf && b != leaf)) continue;
      edge_used[e] = 1;
      order.push_back(static_cast<int>(e));
      --degree[a];
      --degree[b];
      break;
    }
    removed[leaf] = 1;
  }
  return order;
}

KernelMatrix complete_junction_tree(const PartialKernel& data, const JunctionTree& tree,
                                    std::optional<std::vector<int>> edge_order) {
  if (tree.size() != data.size()) throw ArgumentError("tree size does not match the data");
  require_blocks_psd(data, tree.bags());
  std::vector<int> order = edge_order ? *edge_order : leaf_pruning_order(tree);
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(tree.edges().size());
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected) throw ArgumentError("edge order is not a permutation of the edges");
  }

  const int m = tree.bag_count();
  std::vector<int> group(m);
  std::iota(group.begin(), group.end(), 0);
  std::vector<IndexSet> members = tree.bags();
  auto find = [&](int u) {
    while (group[u] != u) u = group[u] = group[group[u]];
    return u;
  };

  Matrix k = data.values();
  for (int e : order) {
    const int ga = find(tree.edges()[e].first);
    const int gb = find(tree.edges()[e].second);
    merge_blocks(k, members[ga], members[gb], data.tolerances().svd_cutoff);
    members[gb] = set_union(members[ga], members[gb]);
    members[ga].clear();
    group[ga] = gb;
  }
  return finish(k, data);
}

CompletionReport canonical_junction_tree(const PartialKernel& data, const JunctionTree& tree,
                                         std::optional<std::vector<int>> edge_order,
                                         VerifyOptions verify) {
  return verify_canonical(complete_junction_tree(data, tree, std::move(edge_order)), data, tree,
                          verify);
}

Matrix precision_assembly(const PartialKernel& data, const JunctionTree& tree) {
  Matrix q = Matrix::Zero(data.size(), data.size());
  for (const auto& bag : tree.bags()) pad_add(q, bag, data.block(bag).pinv(), 1.0);
  for (const auto& sep : tree.separators()) {
    if (!sep.empty()) pad_add(q, sep, data.block(sep).pinv(), -1.0);
  }
  return q;
}

Matrix precision_assembly(const PartialKernel& data, const SerratedCover& cover) {
  return precision_assembly(data, JunctionTree::from_cover(cover));
}

double canonical_norm_sq(const Vector& f, const PartialKernel& data, const SerratedCover& cover) {
  if (f.size() != data.size()) throw ArgumentError("function length does not match the data");
  double total = 0.0;
  for (const auto& b : cover.blocks()) total += rkhs_norm_sq(data.block(b), subvector(f, b));
  for (const auto& s : cover.overlaps()) {
    if (!s.empty()) total -= rkhs_norm_sq(data.block(s), subvector(f, s));
  }
  return total;
}

double canonical_via_duality(const PartialKernel& data, const SerratedCover& cover, int x, int y) {
  const Matrix q = precision_assembly(data, cover);
  Vector rhs = Vector::Zero(data.size());
  rhs(x) += 1.0;
  rhs(y) += 1.0;
  const Vector f = pseudo_inverse(q, data.tolerances().svd_cutoff) * rhs;
  if ((q * f - rhs).norm() > data.tolerances().membership * rhs.norm()) {
    throw NumericalError("degenerate duality: e_x + e_y is outside the range of the precision");
  }
  return -0.5 * (data.values()(x, x) + data.values()(y, y)) + 0.5 * rhs.dot(f);
}

RkhsElement generator_variational(std::shared_ptr<const KernelMatrix> k, int x) {
  // Gradient of a^T K a - 2 (K a)_x vanishes at K a = K e_x; minimum-norm solution.
  const Vector rhs = k->values().col(x);
  Vector coeffs = k->pinv() * rhs;
  return RkhsElement(std::move(k), std::move(coeffs));
}

// ---------------------------------------------------------------------------
// Completion set

Interval completion_interval_2serrated(const PartialKernel& data, const IndexSet& x1,
                                       const IndexSet& x2, int x, int y) {
  const TwoBlock tb = two_block(data, x1, x2);
  if (!contains(tb.only1, x) || !contains(tb.only2, y)) {
    throw ArgumentError("interval requires x in X1 \\ X2 and y in X2 \\ X1");
  }
  require_blocks_psd(data, tb.cover.blocks());
  const double cutoff = data.tolerances().svd_cutoff;
  const Matrix& k = data.values();

  double center = 0.0;
  double px = k(x, x), qy = k(y, y);
  if (!tb.sep.empty()) {
    const Matrix ks_inv = pseudo_inverse(submatrix(k, tb.sep), cutoff);
    const Vector kx = submatrix(k, tb.sep, {x});
    const Vector ky = submatrix(k, tb.sep, {y});
    center = kx.dot(ks_inv * ky);
    px -= kx.dot(ks_inv * kx);
    qy -= ky.dot(ks_inv * ky);
  }
  // Vanishing Schur complements collapse the interval.
  const double radius = std::sqrt(std::max(px, 0.0) * std::max(qy, 0.0));
  return {center - radius, center + radius};
}

Interval feasible_interval_single_entry(const PartialKernel& data, int x, int y, double psd_tol) {
  const auto free = data.pattern().free_pairs();
  const auto target = std::minmax(x, y);
  if (free.size() != 1 || free.front() != std::pair<int, int>(target.first, target.second)) {
    throw ArgumentError("single-entry interval requires (x, y) to be the only unspecified pair");
  }
  Matrix k = data.values();
  const double scale = std::max(data.scale(), std::numeric_limits<double>::min());
  const double bound = std::sqrt(std::max(k(x, x), 0.0) * std::max(k(y, y), 0.0));

  auto min_eig = [&](double c) {
    k(x, y) = k(y, x) = c;
    Eigen::SelfAdjointEigenSolver<Matrix> es(k, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };
  auto feasible = [&](double c) { return min_eig(c) >= -psd_tol * std::max(1.0, scale); };

  // The smallest eigenvalue is concave in c; golden-section search for its maximum.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = -bound, hi = bound;
  double c1 = hi - phi * (hi - lo), c2 = lo + phi * (hi - lo);
  double f1 = min_eig(c1), f2 = min_eig(c2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * scale; ++it) {
    if (f1 < f2) {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + phi * (hi - lo);
      f2 = min_eig(c2);
    } else {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - phi * (hi - lo);
      f1 = min_eig(c1);
    }
  }
  const double best = 0.5 * (lo + hi);
  if (!feasible(best)) {
    throw DefinitenessError("no feasible value for the entry within the Cauchy-Schwarz bound");
  }

  auto edge = [&](double inside, double outside) {
    if (feasible(outside)) return outside;
    for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-14 * scale; ++it) {
      const double mid = 0.5 * (inside + outside);
      (feasible(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  return {edge(best, -bound), edge(best, bound)};
}

KernelMatrix johnson_completion(const PartialKernel& data, const IndexSet& x1, const IndexSet& x2,
                                const Matrix& contraction) {
  const TwoBlock tb = two_block(data, x1, x2);
  if (contraction.rows() != static_cast<Eigen::Index>(tb.only1.size()) ||
      contraction.cols() != static_cast<Eigen::Index>(tb.only2.size())) {
    throw ArgumentError("contraction shape does not match (X1\\X2) x (X2\\X1)");
  }
  if (contraction.size() > 0) {
    Eigen::JacobiSVD<Matrix> svd(contraction);
    if (svd.singularValues()(0) > 1.0 + 1e-12) throw ArgumentError("matrix is not a contraction");
  }
  const double cutoff = data.tolerances().svd_cutoff;
  Matrix k = canonical_2serrated(data, x1, x2).values();
  if (contraction.size() == 0) return finish(k, data);

  const Matrix p_root = symmetric_sqrt(schur_on(k, tb.only1, tb.sep, cutoff));
  const Matrix q_root = symmetric_sqrt(schur_on(k, tb.only2, tb.sep, cutoff));
  const Matrix shift = p_root * contraction * q_root;
  for (std::size_t i = 0; i < tb.only1.size(); ++i) {
    for (std::size_t j = 0; j < tb.only2.size(); ++j) {
      k(tb.only1[i], tb.only2[j]) += shift(i, j);
      k(tb.only2[j], tb.only1[i]) = k(tb.only1[i], tb.only2[j]);
    }
  }
  return finish(k, data);
}

KernelMatrix sample_completion(const PartialKernel& data, const IndexSet& x1, const IndexSet& x2,
                               std::uint64_t seed) {
  const TwoBlock tb = two_block(data, x1, x2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double u = unit(rng);
  Matrix g(tb.only1.size(), tb.only2.size());
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  if (g.size() > 0) {
    const double top = Eigen::JacobiSVD<Matrix>(g).singularValues()(0);
    g *= top > 0.0 ? u * (1.0 - 1e-6) / top : 0.0;
  }
  return johnson_completion(data, x1, x2, g);
}

// ---------------------------------------------------------------------------
// Max-determinant oracle

namespace {

// Cyclic coordinate ascent at fixed data. `inv` tracks k^{-1}. Returns the largest
// entry change of the final pass.
double coordinate_ascent(Matrix& k, Matrix& inv, const std::vector<std::pair<int, int>>& free,
                         int passes, double tol) {
  double change = 0.0;
  for (int pass = 0; pass < passes; ++pass) {
    change = 0.0;
    for (const auto& [i, j] : free) {
      const double wii = inv(i, i), wjj = inv(j, j), wij = inv(i, j);
      const double denom = wii * wjj - wij * wij;
      if (!(denom > 0.0) || !(wii > 0.0)) {
        throw NumericalError("max-det iteration lost positive definiteness");
      }
      // One-dimensional log det maximizer: zeroes (k^{-1})_ij.
      const double t = wij / denom;
      k(i, j) += t;
      k(j, i) = k(i, j);
      change = std::max(change, std::abs(t));
      // Rank-two Woodbury update for k + t (e_i e_j^T + e_j e_i^T).
      Eigen::Matrix<double, Eigen::Dynamic, 2> wu(k.rows(), 2);
      wu.col(0) = inv.col(i);
      wu.col(1) = inv.col(j);
      Eigen::Matrix2d small;
      small << 1.0 + t * wij, t * wjj, t * wii, 1.0 + t * wij;
      // inv' = inv - [w_i w_j] (I + t V^T W U)^{-1} t [w_j w_i]^T, with V = [e_j e_i].
      Eigen::Matrix<double, Eigen::Dynamic, 2> wv(k.rows(), 2);
      wv.col(0) = inv.col(j);
      wv.col(1) = inv.col(i);
      inv -= t * wu * small.inverse() * wv.transpose();
      inv = 0.5 * (inv + inv.transpose());
    }
    // Refresh to stop drift in the tracked inverse.
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success) throw NumericalError("max-det iteration lost positive definiteness");
    inv = llt.solve(Matrix::Identity(k.rows(), k.cols()));
    if (change < tol) return change;
  }
  return change;
}

}  // namespace

KernelMatrix maxdet_oracle(const PartialKernel& data, MaxdetOptions options) {
  const int n = data.size();
  const auto free = data.pattern().free_pairs();
  if (free.empty()) return finish(data.values(), data);
  const double scale = data.scale();
  if (!(data.values().diagonal().minCoeff() > 0.0)) {
    throw NumericalError("no strictly positive-definite completion: zero diagonal entry");
  }
  const double tol = options.tol * scale;

  const Matrix& target = data.values();
  const Matrix diag = target.diagonal().asDiagonal();
  auto data_at = [&](Matrix k, double theta) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && data.specified(i, j)) k(i, j) = theta * target(i, j);
      }
    }
    return k;
  };

  // Homotopy in the specified off-diagonal values from the diagonal (theta = 0)
  // to the data (theta = 1), carrying the free entries along.
  Matrix k = diag;
  Matrix inv = k.inverse();
  double theta = 0.0;
  double step = 1.0;
  while (theta < 1.0) {
    const double next = std::min(1.0, theta + step);
    Matrix trial = data_at(k, next);
    Eigen::LLT<Matrix> llt(trial);
    if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0) {
      step *= 0.5;
      if (step < 1e-12) {
        throw NumericalError("no strictly positive-definite completion reached (data may be infeasible)");
      }
      continue;
    }
    k = std::move(trial);
    inv = llt.solve(Matrix::Identity(n, n));
    theta = next;
    if (theta < 1.0) {
      coordinate_ascent(k, inv, free, 25, tol);
      step = std::min(1.0, 2.0 * step);
    }
  }
  const double change = coordinate_ascent(k, inv, free, options.max_passes, tol);
  if (!(change < tol)) {
    std::ostringstream os;
    os << "max-det iteration did not converge in " << options.max_passes
       << " passes (last change " << change << ")";
    throw NumericalError(os.str());
  }
  return finish(k, data);
}

// ---------------------------------------------------------------------------
// Verification

namespace {

CompletionReport verify_impl(const KernelMatrix& k, const DomainPattern& pattern,
                             const PartialKernel* data,
                             const std::optional<JunctionTree>& structure, VerifyOptions options) {
  const int n = k.size();
  if (pattern.size() != n) throw StructuralError("completion and pattern sizes differ");
  if (structure && structure->size() != n) throw StructuralError("completion and tree sizes differ");
  const Matrix& kv = k.values();
  const Matrix& kinv = k.pinv();
  const double cutoff = k.svd_cutoff();

  CompletionReport report{.completion = k};
  report.min_eig = k.psd_margin();
  report.logdet = k.logdet();

  if (data) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (pattern.specified(i, j)) {
          report.restriction_residual =
              std::max(report.restriction_residual, std::abs(kv(i, j) - data->values()(i, j)));
        }
      }
    }
  }

  report.inverse_offpattern_residual = n ? max_offpattern_ratio(kinv, pattern) : 0.0;

  std::mt19937_64 rng(options.seed);
  const auto free = pattern.free_pairs();

  // Separation: K(x,y) = k_{x,S}^T K_S^+ k_{y,S} for separators S of x, y.
  if (!free.empty()) {
    std::vector<IndexSet> tree_seps;
    if (structure) tree_seps = structure->separators();
    std::uniform_int_distribution<std::size_t> pick_pair(0, free.size() - 1);
    std::bernoulli_distribution extra(0.25);
    int attempts = 0;
    while (static_cast<int>(report.separation_residuals.size()) < options.n_checks &&
           attempts++ < 20 * std::max(options.n_checks, 1)) {
      auto [x, y] = free[pick_pair(rng)];
      std::vector<IndexSet> bases{pattern.neighbours(x), pattern.neighbours(y)};
      for (const auto& s : tree_seps) {
        if (!contains(s, x) && !contains(s, y) && verify_separator(pattern, s, x, y)) {
          bases.push_back(s);
        }
      }
      std::uniform_int_distribution<std::size_t> pick_base(0, bases.size() - 1);
      IndexSet sep = bases[pick_base(rng)];
      for (int v = 0; v < n; ++v) {
        const bool take = extra(rng);
        if (take && v != x && v != y) sep.push_back(v);
      }
      sep = normalized(std::move(sep));
      if (!verify_separator(pattern, sep, x, y)) continue;
      double predicted = 0.0;
      if (!sep.empty()) {
        const Vector kx = submatrix(kv, sep, {x});
        const Vector ky = submatrix(kv, sep, {y});
        predicted = kx.dot(pseudo_inverse(submatrix(kv, sep), cutoff) * ky);
      }
      const double residual = std::abs(kv(x, y) - predicted);
      report.max_separation_residual = std::max(report.max_separation_residual, residual);
      report.separation_residuals.push_back({x, y, std::move(sep), residual});
    }
  }

  // Trace: tr(K^+ P) = 0 for symmetric P supported off the pattern.
  if (!free.empty()) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double inv_norm = kinv.norm();
    for (int c = 0; c < options.n_checks; ++c) {
      Matrix p = Matrix::Zero(n, n);
      for (const auto& [i, j] : free) p(i, j) = p(j, i) = normal(rng);
      const double denom = inv_norm * p.norm();
      if (denom > 0.0) {
        report.trace_residual =
            std::max(report.trace_residual, std::abs((kinv * p).trace()) / denom);
      }
    }
  }

  // Projections: sum of bag projections minus separator projections is the identity.
  if (structure) {
    Matrix total = -kv;
    auto add = [&](const IndexSet& a, double sign) {
      if (a.empty()) return;
      const Matrix cross = submatrix(kv, IndexSet(iota_set(0, n)), a);
      total += sign * cross * pseudo_inverse(submatrix(kv, a), cutoff) * cross.transpose();
    };
    for (const auto& b : structure->bags()) add(b, 1.0);
    for (const auto& s : structure->separators()) add(s, -1.0);
    const double g = kv.norm();
    report.projection_residual = g > 0.0 ? total.norm() / g : 0.0;
  } else {
    report.projection_residual = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace

CompletionReport verify_canonical(const KernelMatrix& k, const DomainPattern& pattern,
                                  const std::optional<JunctionTree>& structure,
                                  VerifyOptions options) {
  return verify_impl(k, pattern, nullptr, structure, options);
}

CompletionReport verify_canonical(const KernelMatrix& k, const PartialKernel& data,
                                  const std::optional<JunctionTree>& structure,
                                  VerifyOptions options) {
  return verify_impl(k, data.pattern(), &data, structure, options);
}

// ---------------------------------------------------------------------------
// Refinement

std::vector<SerratedCover> dyadic_band_covers(int n, int w, int levels) {
  if (levels < 1) throw ArgumentError("refinement needs at least one level");
  if (w < 1 || w >= n) throw ArgumentError("half bandwidth must satisfy 1 <= w < n");
  const int coarsest = 1 << (levels - 1);
  if (coarsest > w) {
    throw ArgumentError("coarsest stride " + std::to_string(coarsest) +
                        " exceeds the half bandwidth " + std::to_string(w));
  }
  const int last = n - 1 - w;
  std::vector<SerratedCover> out;
  for (int level = 0; level < levels; ++level) {
    const int stride = coarsest >> level;
    std::vector<IndexSet> blocks;
    for (int t = 0; t < last; t += stride) blocks.push_back(iota_set(t, w + 1));
    blocks.push_back(iota_set(last, w + 1));
    out.push_back(validate_serrated(blocks, DomainPattern::from_blocks(n, blocks)));
  }
  return out;
}

RefinementTable refine_serrated(const PartialKernel& data,
                                const std::vector<SerratedCover>& covers) {
  if (covers.empty()) throw ArgumentError("refinement needs at least one cover");
  RefinementTable table;
  std::optional<DomainPattern> previous;
  for (const auto& cover : covers) {
    const DomainPattern induced = cover.induced_pattern();
    for (int i = 0; i < data.size(); ++i) {
      for (int j = 0; j < data.size(); ++j) {
        if (induced.specified(i, j) && !data.specified(i, j)) {
          throw StructuralError("refinement cover leaves the data pattern");
        }
        if (previous && previous->specified(i, j) && !induced.specified(i, j)) {
          throw StructuralError("refinement covers are not nested");
        }
      }
    }
    const PartialKernel level_data(induced, data.values(), data.labels(), data.tolerances());
    KernelMatrix completion = complete_serrated(level_data, cover);
    double diff = 0.0;
    if (!table.levels.empty()) {
      diff = (completion.values() - table.levels.back().completion.values()).cwiseAbs().maxCoeff();
      const double prev = table.levels.size() > 1 ? table.levels.back().diff_from_previous
                                                  : std::numeric_limits<double>::infinity();
      if (diff > 1.1 * prev + 1e-15 * data.scale()) table.monotone = false;
    }
    table.levels.push_back({cover.block_count(), std::move(completion), diff});
    previous = induced;
  }
  table.final_gap = table.levels.back().diff_from_previous;
  return table;
}

}  // namespace pdc
