#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "pdc/errors.hpp"
#include "pdc/kernel.hpp"

using namespace pdc;

namespace {

std::shared_ptr<const KernelMatrix> share(Matrix m) {
  return std::make_shared<const KernelMatrix>(std::move(m));
}

double rel_err(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1.0);
  return (a - b).norm() / scale;
}

}  // namespace

TEST(PsdCheck, IdentityAccepted) {
  const PsdCheck c = psd_check(Matrix::Identity(3, 3), 1e-10);
  EXPECT_TRUE(c.accepted);
  EXPECT_NEAR(c.min_eig, 1.0, 1e-15);
  EXPECT_FALSE(c.witness.has_value());
}

TEST(PsdCheck, IndefiniteRejectedWithWitness) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  const PsdCheck c = psd_check(m, 1e-10);
  EXPECT_FALSE(c.accepted);
  EXPECT_NEAR(c.min_eig, -1.0, 1e-14);
  ASSERT_TRUE(c.witness.has_value());
  const Vector w = c.witness->normalized();
  EXPECT_NEAR(std::abs(w(0) + w(1)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(w(0)), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(w.dot(m * w), -1.0, 1e-13);
}

TEST(PsdCheck, WishartAccepted) {
  std::mt19937_64 rng(6);
  const Matrix g = oracle::gaussian_matrix(6, 6, rng);
  EXPECT_TRUE(psd_check(g.transpose() * g).accepted);
}

TEST(PsdCheck, StructuralErrors) {
  EXPECT_THROW(psd_check(Matrix::Zero(2, 3)), StructuralError);
  Matrix m = Matrix::Identity(3, 3);
  m(0, 2) = 0.1;
  EXPECT_THROW(psd_check(m), StructuralError);
}

TEST(PsdCheck, ToleranceIsRelativeToLargestEigenvalue) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1e6;
  m(1, 1) = -1e-4;  // -1e-10 relative
  EXPECT_TRUE(psd_check(m, 1e-9).accepted);
  m(1, 1) = -1e-2;
  EXPECT_FALSE(psd_check(m, 1e-9).accepted);
}

TEST(PseudoInverse, Examples) {
  EXPECT_LT((pseudo_inverse(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)).norm(), 1e-15);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 0.5;
  EXPECT_LT((pseudo_inverse(d) - expect).norm(), 1e-15);

  Matrix r(2, 2);
  r << 1, 0.5, 0.5, 1;
  Matrix inv(2, 2);
  inv << 1, -0.5, -0.5, 1;
  inv /= 0.75;
  EXPECT_LT((pseudo_inverse(r) - inv).norm(), 1e-14);
}

TEST(PseudoInverse, PenroseIdentitiesOnRandomInputs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 9;
    const int dof = 1 + trial % (n + 2);
    const Matrix m = oracle::wishart(n, dof, rng);
    const Matrix p = pseudo_inverse(m);
    EXPECT_LT(rel_err(m * p * m, m), 1e-9) << "trial " << trial;
    EXPECT_LT(rel_err(p * m * p, p), 1e-9) << "trial " << trial;
    EXPECT_EQ(p, p.transpose());
    EXPECT_LT(rel_err(p, oracle::cod_pinv(m)), 1e-7) << "trial " << trial;
  }
}

TEST(KernelMatrix, SymmetrizesAndRejects) {
  Matrix m(2, 2);
  m << 1, 0.5, 0.5 + 1e-14, 1;
  const KernelMatrix k(m);
  EXPECT_EQ(k(0, 1), k(1, 0));

  Matrix bad(2, 2);
  bad << 1, 0.5, 0.6, 1;
  try {
    KernelMatrix{bad};
    FAIL() << "asymmetric input accepted";
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("(2,1)"), std::string::npos) << e.what();
  }

  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(KernelMatrix{indefinite}, DefinitenessError);
}

TEST(KernelMatrix, LogdetAndRank) {
  const KernelMatrix k(oracle::markov(4, 0.6));
  EXPECT_EQ(k.rank(), 4);
  EXPECT_NEAR(k.logdet(), 3 * std::log(1 - 0.36), 1e-12);
  const KernelMatrix ones(Matrix::Ones(3, 3));
  EXPECT_EQ(ones.rank(), 1);
  EXPECT_EQ(ones.logdet(), -std::numeric_limits<double>::infinity());
}

TEST(RkhsElement, CacheCoherenceAndNorm) {
  std::mt19937_64 rng(3);
  auto k = share(oracle::wishart(5, 3, rng));
  const Vector a = oracle::gaussian_matrix(5, 1, rng);
  const RkhsElement f(k, a);
  EXPECT_EQ(f.values(), k->values() * a);
  EXPECT_GE(f.norm_sq(), 0.0);
  EXPECT_NEAR(f.norm_sq(), a.dot(k->values() * a), 1e-14);
}

TEST(RkhsNorm, ReproducingProperty) {
  std::mt19937_64 rng(5);
  auto k = share(oracle::wishart(5, 7, rng));
  for (int x = 0; x < 5; ++x) {
    EXPECT_NEAR(rkhs_norm_sq(*k, k->generator(x)), (*k)(x, x), 1e-12);
  }
  EXPECT_EQ(rkhs_norm_sq(*k, Vector::Zero(5)), 0.0);
}

TEST(RkhsNorm, MarkovRestriction) {
  const double rho = 0.7;
  auto k = share(oracle::markov(3, rho));
  const RkhsElement f = RkhsElement::generator(k, 0);
  // Restricted to {2,3}, k_1 takes values (rho, rho^2) = rho * k_2 there.
  EXPECT_NEAR(rkhs_norm_sq(f, {1, 2}), rho * rho, 1e-14);
}

TEST(RkhsNorm, MembershipError) {
  const KernelMatrix ones(Matrix::Ones(2, 2));
  Vector v(2);
  v << 1.0, -1.0;
  try {
    rkhs_norm_sq(ones, v);
    FAIL() << "out-of-range element accepted";
  } catch (const MembershipError& e) {
    EXPECT_NE(std::string(e.what()).find("not in H(K_A)"), std::string::npos) << e.what();
  }
}

TEST(SchurComplement, Examples) {
  std::mt19937_64 rng(8);
  const KernelMatrix k(oracle::wishart(4, 6, rng));
  EXPECT_EQ(schur_complement(k, {}).values(), k.values());

  const KernelMatrix id(Matrix::Identity(4, 4));
  EXPECT_LT((schur_complement(id, {1, 3}).values() - Matrix::Identity(2, 2)).norm(), 1e-15);

  Matrix r(2, 2);
  r << 1, 0.4, 0.4, 1;
  const KernelMatrix s = schur_complement(KernelMatrix(r), {1});
  ASSERT_EQ(s.size(), 1);
  EXPECT_NEAR(s(0, 0), 1 - 0.16, 1e-15);
}

TEST(SchurComplement, StaysPsd) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 7;
    const KernelMatrix k(oracle::wishart(n, 1 + trial % n, rng));
    IndexSet b;
    for (int i = 0; i < n; ++i) {
      if ((trial + i) % 3 == 0) b.push_back(i);
    }
    if (static_cast<int>(b.size()) == n) b.pop_back();
    const KernelMatrix s = schur_complement(k, b);
    EXPECT_TRUE(psd_check(s.values(), k.tolerances().psd).accepted) << "trial " << trial;
  }
}

TEST(Projection, Examples) {
  const double rho = 0.6;
  auto k = share(oracle::markov(3, rho));
  std::mt19937_64 rng(1);
  const RkhsElement f(k, oracle::gaussian_matrix(3, 1, rng));
  EXPECT_LT((projection_apply(f, {0, 1, 2}).values() - f.values()).norm(), 1e-12);

  const RkhsElement k1 = RkhsElement::generator(k, 1);
  EXPECT_LT((projection_apply(k1, {0, 1}).values() - k1.values()).norm(), 1e-14);

  const RkhsElement k3 = RkhsElement::generator(k, 2);
  const Vector expect = rho * k->generator(1);
  EXPECT_LT((projection_apply(k3, {1}).values() - expect).norm(), 1e-14);
}

TEST(Projection, SubspaceIsometryAndIdempotence) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 8;
    auto k = share(oracle::wishart(n, trial % 2 ? n + 2 : 2 + trial % n, rng));
    const RkhsElement f(k, oracle::gaussian_matrix(n, 1, rng));
    IndexSet a;
    for (int i = 0; i < n; ++i) {
      if (std::uniform_int_distribution<int>(0, 1)(rng)) a.push_back(i);
    }
    if (a.empty()) a.push_back(0);
    const RkhsElement p = projection_apply(f, a);
    const double fn = std::max(f.norm_sq(), 1e-300);
    EXPECT_LE(std::abs(p.norm_sq() - rkhs_norm_sq(f, a)), 1e-8 * fn) << "trial " << trial;
    EXPECT_LT((subvector(p.values(), a) - subvector(f.values(), a)).norm(),
              1e-8 * std::sqrt(fn) * std::sqrt(k->max_eig()));
    const RkhsElement pp = projection_apply(p, a);
    EXPECT_LT((pp.values() - p.values()).norm(), 1e-10 * std::max(1.0, p.values().norm()));
  }
}

TEST(MinNorm, Examples) {
  const double rho = 0.5;
  auto kb = share(oracle::markov(3, rho));
  Vector one(1);
  one << 1.0;
  const RkhsElement g = minnorm_interpolate(kb, {1}, one);
  Vector expect(3);
  expect << rho, 1, rho;
  EXPECT_LT((g.values() - expect).norm(), 1e-15);

  std::mt19937_64 rng(3);
  auto k = share(oracle::wishart(4, 6, rng));
  const Vector f = k->values() * oracle::gaussian_matrix(4, 1, rng);
  EXPECT_LT((minnorm_interpolate(k, {0, 1, 2, 3}, f).values() - f).norm(), 1e-10);
}

TEST(MinNorm, AgreesWithConstrainedQuadraticProgram) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + trial % 6;
    auto k = share(oracle::wishart(n, n + 1, rng));
    IndexSet a;
    for (int i = 0; i < n; i += 1 + trial % 2) a.push_back(i);
    const int x = a[trial % a.size()];
    const Vector fa = subvector(k->generator(x), a);
    const RkhsElement g = minnorm_interpolate(k, a, fa);
    const Vector ref = oracle::kkt_minnorm(k->values(), a, fa);
    EXPECT_LT((g.values() - ref).norm(), 1e-8 * std::max(1.0, ref.norm())) << "trial " << trial;
    EXPECT_LT((subvector(g.values(), a) - fa).norm(), 1e-10);
  }
}

TEST(Contraction, AdjointProperty) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + trial % 6;
    const KernelMatrix k(oracle::wishart(n, trial % 3 ? n + 2 : n - 1, rng));
    const IndexSet b = iota_set(0, n);
    IndexSet a;
    for (int i = trial % 2; i < n; i += 2) a.push_back(i);
    const KernelMatrix ka = k.restrict_to(a);
    const Vector fa = ka.values() * oracle::gaussian_matrix(static_cast<int>(a.size()), 1, rng);
    const Vector gb = k.values() * oracle::gaussian_matrix(n, 1, rng);
    // <Phi_BA f, g>_{H(K_B)} = <f, Phi_AB g>_{H(K_A)}
    const Vector phi_f = contraction_apply(k, a, b, fa);
    const Vector phi_g = contraction_apply(k, b, a, gb);
    const double lhs = phi_f.dot(k.pinv() * gb);
    const double rhs = fa.dot(ka.pinv() * phi_g);
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, std::abs(lhs))) << "trial " << trial;
  }
}

TEST(Generator, VariationalCharacterization) {
  const double rho = 0.3;
  auto k = share(oracle::markov(3, rho));
  Vector expect(3);
  expect << rho, 1, rho;
  EXPECT_LT((generator_variational(k, 1).values() - expect).norm(), 1e-14);

  auto id = share(Matrix::Identity(4, 4));
  EXPECT_LT((generator_variational(id, 2).values() - Vector::Unit(4, 2)).norm(), 1e-15);

  auto ones = share(Matrix::Ones(3, 3));
  EXPECT_LT((generator_variational(ones, 0).values() - Vector::Ones(3)).norm(), 1e-14);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 9;
    auto kr = share(oracle::wishart(n, 1 + trial % (n + 2), rng));
    const int x = trial % n;
    EXPECT_LT((generator_variational(kr, x).values() - kr->generator(x)).norm(), 1e-9)
        << "trial " << trial;
  }
}
