#ifndef PDC_STATIONARY_HPP
#define PDC_STATIONARY_HPP

// Canonical extension of a positive-definite function given on [-a, a],
// discretized on a grid of spacing delta: the band Toeplitz instance is
// completed canonically, and the one-step shift of the completion yields a
// contraction semigroup on H(K_{I0}), I0 = {0, delta, ..., a}, whose matrix
// elements <k_0, Phi^k k_0> reproduce the extension.

#include <functional>
#include <span>
#include <vector>

#include "pdc/completion.hpp"

namespace pdc {

/// Samples F(k delta), k = 0..w, of a function positive-definite on [-w delta, w delta].
class StationaryFunction {
 public:
  /// Throws DefinitenessError when the (w+1)x(w+1) Toeplitz section is not PSD.
  StationaryFunction(std::vector<double> samples, double delta, Tolerances tol = {});

  /// Samples f on the grid, truncating the half width down to a multiple of delta.
  static StationaryFunction sample(const std::function<double(double)>& f, double delta,
                                   double half_width, Tolerances tol = {});

  const std::vector<double>& samples() const { return samples_; }
  double delta() const { return delta_; }
  int half_width_steps() const { return static_cast<int>(samples_.size()) - 1; }
  double half_width() const { return delta_ * half_width_steps(); }
  /// True when `sample` had to shrink the requested half width.
  bool truncated() const { return truncated_; }
  const Tolerances& tolerances() const { return tol_; }

  /// [F(|i-j| delta)] for i, j < n; requires n <= w + 1.
  Matrix toeplitz(int n) const;

 private:
  std::vector<double> samples_;
  double delta_ = 0.0;
  bool truncated_ = false;
  Tolerances tol_;
};

/// Band pattern |i-j| <= w on n points with Toeplitz values.
PartialKernel band_partial(const StationaryFunction& f, int n_points);

struct Extension {
  /// F~(k delta), k = 0..n-1.
  std::vector<double> values;
  /// max over diagonals of (max - min) of the completion's entries.
  double stationarity_residual = 0.0;
  KernelMatrix completion;
  double delta = 0.0;
  int half_width_steps = 0;
};

Extension canonical_extension_grid(const StationaryFunction& f, int n_points);

/// Completion range of the first unspecified lag (w+1) delta.
Interval first_free_interval(const StationaryFunction& f);

/// Phi_{shift * delta} on H(K_{I0}) in generator-coefficient coordinates.
class DiscreteSemigroup {
 public:
  DiscreteSemigroup(KernelMatrix base, Matrix step, double delta, int shift);

  const KernelMatrix& base() const { return base_; }
  /// Coefficient map: f = sum a_u k_u  ->  Phi f = sum (step a)_u k_u.
  const Matrix& step_matrix() const { return step_; }
  double delta() const { return delta_; }
  int shift() const { return shift_; }
  double step_length() const { return delta_ * shift_; }

  /// Operator norm in the metric of H(K_{I0}).
  double operator_norm() const;
  /// Matrix of the map in an orthonormal basis of H(K_{I0}).
  Matrix orthonormal_form() const;
  /// Squared RKHS norm a^T K a of a coefficient vector.
  double norm_sq(const Vector& coeffs) const { return coeffs.dot(base_.values() * coeffs); }

 private:
  KernelMatrix base_;
  Matrix step_;
  double delta_;
  int shift_;
};

/// Builds Phi from the extension: coefficients map through K_{I0}^+ K~[I0 + shift, I0].
/// Throws NumericalError if the result is not a contraction within 1e-8.
DiscreteSemigroup semigroup_step(const Extension& ext, int shift = 1);

struct ComposeCheck {
  /// |Phi^j Phi^k - Phi^{j+k}| for powers of one step.
  double power_residual = 0.0;
  /// |Phi_{2 delta} - Phi_delta^2| with Phi_{2 delta} built from a two-step shift.
  double cross_resolution_residual = 0.0;
};

ComposeCheck semigroup_compose_check(const Extension& ext, int j, int k);

/// <k_0, Phi^k k_0> in H(K_{I0}).
double nagy_eval(const DiscreteSemigroup& s, int k);

/// H-norm of (Phi - I)/h f - g for f = sum alpha(u_i) k_{u_i} delta, g = sum alpha'(u_i) k_{u_i} delta.
/// alpha must vanish at both ends of the grid.
double generator_on_test(const DiscreteSemigroup& s, std::span<const double> alpha,
                         std::span<const double> alpha_prime);

struct GeneratorConvergence {
  std::vector<double> deltas;
  std::vector<double> residuals;
  /// residuals[l-1] / residuals[l].
  std::vector<double> ratios;
};

/// Runs generator_on_test for delta0 / 2^l, l < levels, with F sampled on [0, a].
GeneratorConvergence generator_convergence(const std::function<double(double)>& f, double a,
                                           double delta0, int levels,
                                           const std::function<double(double)>& alpha,
                                           const std::function<double(double)>& alpha_prime);

}  // namespace pdc

#endif  // PDC_STATIONARY_HPP
