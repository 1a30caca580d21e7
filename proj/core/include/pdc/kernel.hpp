#ifndef PDC_KERNEL_HPP
#define PDC_KERNEL_HPP

// Dense symmetric kernel substrate: PSD certification, pseudoinversion,
// RKHS quadratic forms, Schur complements and projections in Gram
// coordinates. Every routine here works with the kernel as a matrix over a
// finite index set; a function f on the set is stored by its value vector.

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdc/index_set.hpp"

namespace pdc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultPsdTol = 1e-9;
inline constexpr double kDefaultSvdCutoff = 1e-10;
inline constexpr double kDefaultMembershipTol = 1e-8;
inline constexpr double kSymmetryTol = 1e-12;

struct Tolerances {
  /// Accept when min_eig >= -psd * max(1, max_eig).
  double psd = kDefaultPsdTol;
  /// Eigenvalues below svd_cutoff * max|eig| are treated as zero in pseudoinverses.
  double svd_cutoff = kDefaultSvdCutoff;
  /// Least-squares residual bound (relative to |f|) for RKHS membership.
  double membership = kDefaultMembershipTol;
};

struct PsdCheck {
  bool accepted = false;
  double min_eig = 0.0;
  double max_eig = 0.0;
  /// Unit eigenvector for min_eig; set only when rejected.
  std::optional<Vector> witness;
};

/// Throws StructuralError when m is not square or is asymmetric beyond kSymmetryTol (relative).
void require_symmetric(const Matrix& m, const char* what = "matrix");

PsdCheck psd_check(const Matrix& m, double tol = kDefaultPsdTol);

/// Moore-Penrose pseudoinverse of a symmetric matrix by eigendecomposition.
Matrix pseudo_inverse(const Matrix& m, double cutoff = kDefaultSvdCutoff);

Matrix submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols);
inline Matrix submatrix(const Matrix& m, const IndexSet& idx) { return submatrix(m, idx, idx); }
Vector subvector(const Vector& v, const IndexSet& idx);

/// An accepted reproducing kernel on a finite set, with its spectral factorization cached.
/// Immutable after construction.
class KernelMatrix {
 public:
  explicit KernelMatrix(Matrix values, Tolerances tol = {});
  KernelMatrix(Matrix values, std::vector<std::string> labels, Tolerances tol = {});

  int size() const { return static_cast<int>(values_.rows()); }
  const Matrix& values() const { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Tolerances& tolerances() const { return tol_; }
  double svd_cutoff() const { return tol_.svd_cutoff; }

  /// Smallest eigenvalue found at construction.
  double psd_margin() const { return spectral_->evals.size() ? spectral_->evals(0) : 0.0; }
  double max_eig() const;
  const Vector& eigenvalues() const { return spectral_->evals; }
  const Matrix& eigenvectors() const { return spectral_->evecs; }
  const Matrix& pinv() const { return spectral_->pinv; }
  int rank() const { return spectral_->rank; }

  /// log det, or -infinity when numerically singular.
  double logdet() const;

  /// Column k_x as a value vector.
  Vector generator(int x) const { return values_.col(x); }

  /// The subkernel K_A, labels carried over.
  KernelMatrix restrict_to(const IndexSet& a) const;

 private:
  struct Spectral {
    Vector evals;
    Matrix evecs;
    Matrix pinv;
    int rank = 0;
  };

  Matrix values_;
  std::vector<std::string> labels_;
  Tolerances tol_;
  std::shared_ptr<const Spectral> spectral_;
};

std::vector<std::string> default_labels(int n);

/// f = sum_i coeffs_i k_{x_i} in H(K), with the value vector K * coeffs cached.
class RkhsElement {
 public:
  RkhsElement(std::shared_ptr<const KernelMatrix> base, Vector coeffs);

  /// Minimum-norm coefficients reproducing the given values; throws MembershipError
  /// when the values are not in the range of K.
  static RkhsElement from_values(std::shared_ptr<const KernelMatrix> base, const Vector& values);
  static RkhsElement generator(std::shared_ptr<const KernelMatrix> base, int x);

  const KernelMatrix& base() const { return *base_; }
  const std::shared_ptr<const KernelMatrix>& base_ptr() const { return base_; }
  const Vector& coeffs() const { return coeffs_; }
  const Vector& values() const { return values_; }

  double norm_sq() const { return coeffs_.dot(values_); }
  double inner(const RkhsElement& other) const;

 private:
  std::shared_ptr<const KernelMatrix> base_;
  Vector coeffs_;
  Vector values_;
};

/// True when values lie in the range of K within the membership tolerance.
bool in_range(const KernelMatrix& k, const Vector& values);

/// Squared norm in H(K) of the function with the given values; f^T K^+ f.
double rkhs_norm_sq(const KernelMatrix& k, const Vector& values);

/// Squared norm of f restricted to A, in H(K_A).
double rkhs_norm_sq(const RkhsElement& f, const IndexSet& a);

KernelMatrix schur_complement(const KernelMatrix& k, const IndexSet& b);

/// Orthogonal projection onto span{k_x : x in A}.
RkhsElement projection_apply(const RkhsElement& f, const IndexSet& a);

/// argmin{ |g| : g in H(K_B), g|_A = f_A }, where A indexes into K_B.
RkhsElement minnorm_interpolate(std::shared_ptr<const KernelMatrix> kb, const IndexSet& a,
                                const Vector& f_a);

/// Values on `to` of the contraction image of f in H(K_from):
/// (Phi_{to,from} f)(y) = <f, k_{y,from}>.
Vector contraction_apply(const KernelMatrix& k, const IndexSet& from, const IndexSet& to,
                         const Vector& f_from);

}  // namespace pdc

#endif  // PDC_KERNEL_HPP
