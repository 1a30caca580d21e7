#include "pdc/stationary.hpp"

#include <cmath>
#include <sstream>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

Matrix toeplitz_from(const std::vector<double>& lags, int n) {
  Matrix t(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) t(i, j) = lags[std::abs(i - j)];
  }
  return t;
}

// Right factor R with K = R R^T on the numerical range, and its pseudo-inverse.
struct GramFactor {
  Matrix root;      // n x r
  Matrix root_inv;  // r x n, R^+ with R^+ R = I_r
};

GramFactor gram_factor(const KernelMatrix& k) {
  const Vector& ev = k.eigenvalues();
  const Matrix& v = k.eigenvectors();
  const double top = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > k.svd_cutoff() * top) keep.push_back(i);
  }
  GramFactor out{Matrix(k.size(), keep.size()), Matrix(keep.size(), k.size())};
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const double s = std::sqrt(ev(keep[c]));
    out.root.col(c) = v.col(keep[c]) * s;
    out.root_inv.row(c) = v.col(keep[c]).transpose() / s;
  }
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

StationaryFunction::StationaryFunction(std::vector<double> samples, double delta, Tolerances tol)
    : samples_(std::move(samples)), delta_(delta), tol_(tol) {
  if (samples_.empty()) throw ArgumentError("stationary function needs at least F(0)");
  if (!(delta_ > 0.0)) throw ArgumentError("grid spacing must be positive");
  const Matrix t = toeplitz_from(samples_, static_cast<int>(samples_.size()));
  const PsdCheck check = psd_check(t, tol_.psd);
  if (!check.accepted || !(samples_.front() > 0.0)) {
    std::ostringstream os;
    os << "F not positive-definite at this resolution (Toeplitz min eigenvalue " << check.min_eig
       << ", F(0) = " << samples_.front() << ")";
    throw DefinitenessError(os.str());
  }
}

StationaryFunction StationaryFunction::sample(const std::function<double(double)>& f, double delta,
                                              double half_width, Tolerances tol) {
  if (!(delta > 0.0)) throw ArgumentError("grid spacing must be positive");
  const double ratio = half_width / delta;
  const int w = static_cast<int>(std::floor(ratio + 1e-9));
  std::vector<double> samples;
  for (int k = 0; k <= w; ++k) samples.push_back(f(k * delta));
  StationaryFunction out(std::move(samples), delta, tol);
  out.truncated_ = std::abs(ratio - w) > 1e-9;
  return out;
}

Matrix StationaryFunction::toeplitz(int n) const {
  if (n > static_cast<int>(samples_.size())) throw ArgumentError("Toeplitz section exceeds the data");
  return toeplitz_from(samples_, n);
}

PartialKernel band_partial(const StationaryFunction& f, int n_points) {
  const int w = f.half_width_steps();
  if (n_points < w + 1) throw ArgumentError("need at least w + 1 grid points");
  BoolMatrix mask(n_points, n_points);
  Matrix values = Matrix::Zero(n_points, n_points);
  for (int i = 0; i < n_points; ++i) {
    for (int j = 0; j < n_points; ++j) {
      const int lag = std::abs(i - j);
      mask(i, j) = lag <= w;
      if (lag <= w) values(i, j) = f.samples()[lag];
    }
  }
  return PartialKernel(validate_domain(mask), std::move(values), {}, f.tolerances());
}

Extension canonical_extension_grid(const StationaryFunction& f, int n_points) {
  const PartialKernel data = band_partial(f, n_points);
  const int w = f.half_width_steps();
  // Diagonal data (w = 0) is already its own canonical completion: the fill is zero.
  KernelMatrix completion = w == 0 ? KernelMatrix(data.values(), data.labels(), data.tolerances())
                                   : complete_serrated(data, band_cover(n_points, w));
  const Matrix& k = completion.values();
  double spread = 0.0;
  for (int d = 0; d < n_points; ++d) {
    double lo = k(0, d), hi = k(0, d);
    for (int i = 0; i + d < n_points; ++i) {
      lo = std::min(lo, k(i, i + d));
      hi = std::max(hi, k(i, i + d));
    }
    spread = std::max(spread, hi - lo);
  }
  std::vector<double> values(n_points);
  for (int d = 0; d < n_points; ++d) values[d] = k(0, d);
  return Extension{std::move(values), spread, std::move(completion), f.delta(), w};
}

Interval first_free_interval(const StationaryFunction& f) {
  const int w = f.half_width_steps();
  const PartialKernel data = band_partial(f, w + 2);
  return completion_interval_2serrated(data, iota_set(0, w + 1), iota_set(1, w + 1), 0, w + 1);
}

DiscreteSemigroup::DiscreteSemigroup(KernelMatrix base, Matrix step, double delta, int shift)
    : base_(std::move(base)), step_(std::move(step)), delta_(delta), shift_(shift) {
  if (step_.rows() != base_.size() || step_.cols() != base_.size()) {
    throw ArgumentError("step matrix does not match the base kernel");
  }
}

Matrix DiscreteSemigroup::orthonormal_form() const {
  const GramFactor g = gram_factor(base_);
  // Coordinates z = R^T a; a = (R^+)^T z on the range.
  return g.root.transpose() * step_ * g.root_inv.transpose();
}

double DiscreteSemigroup::operator_norm() const { return spectral_norm(orthonormal_form()); }

DiscreteSemigroup semigroup_step(const Extension& ext, int shift) {
  const int w = ext.half_width_steps;
  const int n = ext.completion.size();
  if (shift < 0) throw ArgumentError("semigroup step must be non-negative");
  if (w + shift >= n) throw ArgumentError("extension too short for the requested step");
  const IndexSet base_idx = iota_set(0, w + 1);
  KernelMatrix base = ext.completion.restrict_to(base_idx);
  const Matrix shifted = submatrix(ext.completion.values(), iota_set(shift, w + 1), base_idx);
  const Matrix range_proj = base.pinv() * base.values();
  Matrix step = base.pinv() * shifted * range_proj;
  if (shift == 0) step = range_proj;
  DiscreteSemigroup out(std::move(base), std::move(step), ext.delta, shift);
  const double norm = out.operator_norm();
  if (norm > 1.0 + 1e-8) {
    std::ostringstream os;
    os << "semigroup step is not a contraction (norm " << norm << "): numerical degeneracy";
    throw NumericalError(os.str());
  }
  return out;
}

ComposeCheck semigroup_compose_check(const Extension& ext, int j, int k) {
  const DiscreteSemigroup one = semigroup_step(ext, 1);
  const DiscreteSemigroup two = semigroup_step(ext, 2);
  const Matrix a = one.orthonormal_form();
  auto power = [&](int p) {
    Matrix out = Matrix::Identity(a.rows(), a.cols());
    for (int i = 0; i < p; ++i) out = out * a;
    return out;
  };
  ComposeCheck out;
  out.power_residual = spectral_norm(power(j) * power(k) - power(j + k));
  out.cross_resolution_residual = spectral_norm(two.orthonormal_form() - a * a);
  return out;
}

double nagy_eval(const DiscreteSemigroup& s, int k) {
  if (k < 0) throw ArgumentError("semigroup power must be non-negative");
  Vector coeffs = Vector::Zero(s.base().size());
  coeffs(0) = 1.0;
  const Vector k0 = coeffs;
  for (int i = 0; i < k; ++i) coeffs = s.step_matrix() * coeffs;
  return k0.dot(s.base().values() * coeffs);
}

double generator_on_test(const DiscreteSemigroup& s, std::span<const double> alpha,
                         std::span<const double> alpha_prime) {
  const int n = s.base().size();
  if (static_cast<int>(alpha.size()) != n || static_cast<int>(alpha_prime.size()) != n) {
    throw ArgumentError("test function must be sampled on the base grid");
  }
  double peak = 0.0;
  for (double v : alpha) peak = std::max(peak, std::abs(v));
  const double edge_tol = 1e-12 * std::max(peak, 1.0);
  if (std::abs(alpha.front()) > edge_tol || std::abs(alpha.back()) > edge_tol) {
    throw ArgumentError("test function support must lie strictly inside (0, a)");
  }
  const double h = s.step_length();
  Vector f(n), g(n);
  for (int i = 0; i < n; ++i) {
    f(i) = alpha[i] * s.delta();
    g(i) = alpha_prime[i] * s.delta();
  }
  const Vector r = (s.step_matrix() * f - f) / h - g;
  return std::sqrt(std::max(s.norm_sq(r), 0.0));
}

GeneratorConvergence generator_convergence(const std::function<double(double)>& f, double a,
                                           double delta0, int levels,
                                           const std::function<double(double)>& alpha,
                                           const std::function<double(double)>& alpha_prime) {
  GeneratorConvergence out;
  for (int level = 0; level < levels; ++level) {
    const double delta = delta0 / static_cast<double>(1 << level);
    const StationaryFunction sf = StationaryFunction::sample(f, delta, a);
    const int w = sf.half_width_steps();
    const Extension ext = canonical_extension_grid(sf, w + 2);
    const DiscreteSemigroup s = semigroup_step(ext, 1);
    std::vector<double> av(w + 1), apv(w + 1);
    for (int i = 0; i <= w; ++i) {
      av[i] = alpha(i * delta);
      apv[i] = alpha_prime(i * delta);
    }
    out.deltas.push_back(delta);
    out.residuals.push_back(generator_on_test(s, av, apv));
    if (level > 0) out.ratios.push_back(out.residuals[level - 1] / out.residuals[level]);
  }
  return out;
}

}  // namespace pdc
