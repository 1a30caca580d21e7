#include "pdc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " is not square (" << m.rows() << "x" << m.cols() << ")";
    throw StructuralError(os.str());
  }
  const double scale = max_abs(m);
  const double asym = max_abs(m - m.transpose());
  if (asym > kSymmetryTol * scale) {
    Eigen::Index i = 0, j = 0;
    (m - m.transpose()).cwiseAbs().maxCoeff(&i, &j);
    std::ostringstream os;
    os << what << " is not symmetric at (" << i + 1 << "," << j + 1 << ")";
    throw StructuralError(os.str());
  }
}

PsdCheck psd_check(const Matrix& m, double tol) {
  require_symmetric(m);
  PsdCheck out;
  if (m.rows() == 0) {
    out.accepted = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector& ev = es.eigenvalues();
  out.min_eig = ev(0);
  out.max_eig = ev(ev.size() - 1);
  out.accepted = out.min_eig >= -tol * std::max(1.0, out.max_eig);
  if (!out.accepted) out.witness = es.eigenvectors().col(0);
  return out;
}

Matrix pseudo_inverse(const Matrix& m, double cutoff) {
  require_symmetric(m);
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector& ev = es.eigenvalues();
  const double threshold = cutoff * ev.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > threshold) inv(i) = 1.0 / ev(i);
  }
  const Matrix& v = es.eigenvectors();
  return symmetrized(v * inv.asDiagonal() * v.transpose());
}

Matrix submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

Vector subvector(const Vector& v, const IndexSet& idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

std::vector<std::string> default_labels(int n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(std::to_string(i + 1));
  return out;
}

KernelMatrix::KernelMatrix(Matrix values, Tolerances tol)
    : KernelMatrix(std::move(values), {}, tol) {}

KernelMatrix::KernelMatrix(Matrix values, std::vector<std::string> labels, Tolerances tol)
    : tol_(tol) {
  require_symmetric(values, "kernel matrix");
  values_ = symmetrized(values);
  labels_ = labels.empty() ? default_labels(size()) : std::move(labels);
  if (static_cast<int>(labels_.size()) != size()) {
    throw StructuralError("label count does not match kernel size");
  }

  auto spectral = std::make_shared<Spectral>();
  if (size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(values_);
    spectral->evals = es.eigenvalues();
    spectral->evecs = es.eigenvectors();
    const double top = spectral->evals.cwiseAbs().maxCoeff();
    const double min_eig = spectral->evals(0);
    if (min_eig < -tol_.psd * std::max(1.0, spectral->evals(size() - 1))) {
      std::ostringstream os;
      os << "matrix is not positive semidefinite (min eigenvalue " << min_eig << ")";
      throw DefinitenessError(os.str());
    }
    Vector inv = Vector::Zero(size());
    for (int i = 0; i < size(); ++i) {
      if (std::abs(spectral->evals(i)) > tol_.svd_cutoff * top) {
        inv(i) = 1.0 / spectral->evals(i);
        ++spectral->rank;
      }
    }
    spectral->pinv = symmetrized(spectral->evecs * inv.asDiagonal() * spectral->evecs.transpose());
  } else {
    spectral->pinv = Matrix(0, 0);
  }
  spectral_ = std::move(spectral);
}

double KernelMatrix::max_eig() const {
  const Vector& ev = spectral_->evals;
  return ev.size() ? ev(ev.size() - 1) : 0.0;
}

double KernelMatrix::logdet() const {
  if (rank() < size()) return -std::numeric_limits<double>::infinity();
  return spectral_->evals.array().log().sum();
}

KernelMatrix KernelMatrix::restrict_to(const IndexSet& a) const {
  std::vector<std::string> labels;
  labels.reserve(a.size());
  for (int i : a) labels.push_back(labels_[i]);
  return KernelMatrix(submatrix(values_, a), std::move(labels), tol_);
}

bool in_range(const KernelMatrix& k, const Vector& values) {
  const double norm = values.norm();
  if (norm == 0.0) return true;
  const Vector residual = k.values() * (k.pinv() * values) - values;
  return residual.norm() <= k.tolerances().membership * norm;
}

RkhsElement::RkhsElement(std::shared_ptr<const KernelMatrix> base, Vector coeffs)
    : base_(std::move(base)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != base_->size()) throw ArgumentError("coefficient length mismatch");
  values_ = base_->values() * coeffs_;
}

RkhsElement RkhsElement::from_values(std::shared_ptr<const KernelMatrix> base,
                                     const Vector& values) {
  if (values.size() != base->size()) throw ArgumentError("value vector length mismatch");
  if (!in_range(*base, values)) throw MembershipError("f is not in H(K): values outside range of K");
  Vector coeffs = base->pinv() * values;
  return RkhsElement(std::move(base), std::move(coeffs));
}

RkhsElement RkhsElement::generator(std::shared_ptr<const KernelMatrix> base, int x) {
  Vector e = Vector::Zero(base->size());
  e(x) = 1.0;
  return RkhsElement(std::move(base), std::move(e));
}

double RkhsElement::inner(const RkhsElement& other) const {
  if (other.base_ != base_ && other.base_->values() != base_->values()) {
    throw ArgumentError("inner product of elements of different spaces");
  }
  return coeffs_.dot(other.values_);
}

double rkhs_norm_sq(const KernelMatrix& k, const Vector& values) {
  if (values.size() != k.size()) throw ArgumentError("value vector length mismatch");
  if (!in_range(k, values)) {
    throw MembershipError("f is not in H(K_A): restriction outside range of K_A");
  }
  return values.dot(k.pinv() * values);
}

double rkhs_norm_sq(const RkhsElement& f, const IndexSet& a) {
  return rkhs_norm_sq(f.base().restrict_to(a), subvector(f.values(), a));
}

KernelMatrix schur_complement(const KernelMatrix& k, const IndexSet& b) {
  const IndexSet rest = complement(k.size(), b);
  std::vector<std::string> labels;
  for (int i : rest) labels.push_back(k.labels()[i]);
  Matrix out = submatrix(k.values(), rest);
  if (!b.empty()) {
    const Matrix cross = submatrix(k.values(), rest, b);
    out -= cross * pseudo_inverse(submatrix(k.values(), b), k.svd_cutoff()) * cross.transpose();
  }
  return KernelMatrix(symmetrized(out), std::move(labels), k.tolerances());
}

RkhsElement projection_apply(const RkhsElement& f, const IndexSet& a) {
  const KernelMatrix& k = f.base();
  Vector coeffs = Vector::Zero(k.size());
  if (!a.empty()) {
    const Vector local = pseudo_inverse(submatrix(k.values(), a), k.svd_cutoff()) *
                         subvector(f.values(), a);
    for (std::size_t i = 0; i < a.size(); ++i) coeffs(a[i]) = local(i);
  }
  return RkhsElement(f.base_ptr(), std::move(coeffs));
}

RkhsElement minnorm_interpolate(std::shared_ptr<const KernelMatrix> kb, const IndexSet& a,
                                const Vector& f_a) {
  if (static_cast<std::size_t>(f_a.size()) != a.size()) {
    throw ArgumentError("interpolation data length mismatch");
  }
  Vector coeffs = Vector::Zero(kb->size());
  if (!a.empty()) {
    const KernelMatrix ka = kb->restrict_to(a);
    if (!in_range(ka, f_a)) throw MembershipError("f is not in H(K_A): data outside range of K_A");
    const Vector local = ka.pinv() * f_a;
    for (std::size_t i = 0; i < a.size(); ++i) coeffs(a[i]) = local(i);
  }
  return RkhsElement(std::move(kb), std::move(coeffs));
}

Vector contraction_apply(const KernelMatrix& k, const IndexSet& from, const IndexSet& to,
                         const Vector& f_from) {
  if (from.empty()) return Vector::Zero(to.size());
  const KernelMatrix kf = k.restrict_to(from);
  if (!in_range(kf, f_from)) throw MembershipError("f is not in H(K_A): data outside range of K_A");
  return submatrix(k.values(), to, from) * (kf.pinv() * f_from);
}

}  // namespace pdc
