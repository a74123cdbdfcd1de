#include "oracles.hpp"

#include "tesp/errors.hpp"
#include "tesp/weights.hpp"

#include <gtest/gtest.h>

using namespace tesp;

namespace {

// ||v||_P^2 = <v, P * v> for a T-SPD P and tubal vector v.
double vec_path(const TubalMatrix& a, const WeightPair& w) {
  TubalMatrix v = vec_t(a);
  TubalMatrix k = t_kron(t_transpose(w.n(), TransposeKind::ST), w.m());
  return std::sqrt(inner(v, t_product(k, v)));
}

// T-SPD tensor whose Fourier slices are diagonal with positive real entries.
TubalMatrix diag_spectral(Index n, Index l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::vector<CMat> half;
  for (Index k = 0; k < half_count(l); ++k) {
    CMat d = CMat::Zero(n, n);
    for (Index i = 0; i < n; ++i) d(i, i) = u(rng);
    half.push_back(d);
  }
  return idft_half(half, n, n, l);
}

}  // namespace

TEST(WeightedNorm, IdentityWeightsGivePlainNorm) {
  std::mt19937_64 rng(1);
  TubalMatrix a = oracle::random(3, 4, 5, rng);
  EXPECT_NEAR(fnorm_weighted(a, WeightPair::identity(3, 4, 5)), a.norm(), 1e-13);
  WeightPair explicit_id(TubalMatrix::identity(3, 5), TubalMatrix::identity(4, 5));
  EXPECT_NEAR(fnorm_weighted(a, explicit_id), a.norm(), 1e-12);
}

TEST(WeightedNorm, ZeroOperand) {
  std::mt19937_64 rng(2);
  WeightPair w(oracle::random_spd(2, 3, rng), oracle::random_spd(3, 3, rng));
  EXPECT_EQ(fnorm_weighted(TubalMatrix(2, 3, 3), w), 0.0);
}

TEST(WeightedNorm, DiagonalSpectralWeightsTwoPaths) {
  std::mt19937_64 rng(3);
  for (Index l : {1, 2, 3, 4}) {
    TubalMatrix a = oracle::random(3, 2, l, rng);
    WeightPair w(diag_spectral(3, l, rng), diag_spectral(2, l, rng));
    double direct = fnorm_weighted(a, w);
    EXPECT_NEAR(direct, vec_path(a, w), 1e-10 * std::max(1.0, direct));
    TubalMatrix inner_t = t_product(t_product(t_sqrt(w.m()), a), t_sqrt(w.n()));
    EXPECT_NEAR(direct, inner_t.norm(), 1e-10 * std::max(1.0, direct));
  }
}

TEST(WeightedNorm, GeneralSpdWeightsTwoPaths) {
  std::mt19937_64 rng(4);
  TubalMatrix a = oracle::random(2, 3, 4, rng);
  WeightPair w(oracle::random_spd(2, 4, rng), oracle::random_spd(3, 4, rng));
  double direct = fnorm_weighted(a, w);
  EXPECT_NEAR(direct, vec_path(a, w), 1e-10 * direct);
}

TEST(WeightedNorm, NonConformingWeightsRejected) {
  std::mt19937_64 rng(5);
  WeightPair w = WeightPair::identity(2, 2, 3);
  EXPECT_THROW(fnorm_weighted(TubalMatrix(3, 2, 3), w), shape_error);
  EXPECT_THROW(WeightPair(TubalMatrix::identity(2, 3), TubalMatrix::identity(2, 4)), shape_error);
}

TEST(WeightPair, RejectsNonDefinite) {
  TubalMatrix bad = TubalMatrix::identity(2, 3);
  bad(1, 1, 0) = 0;
  EXPECT_THROW(WeightPair(bad, TubalMatrix::identity(2, 3)), domain_error);
  EXPECT_NO_THROW(WeightPair(bad, TubalMatrix::identity(2, 3), Definiteness::semidefinite));
}

TEST(WeightPair, CachedFunctionsConsistent) {
  std::mt19937_64 rng(6);
  TubalMatrix m = oracle::random_spd(3, 4, rng), n = oracle::random_spd(2, 4, rng);
  WeightPair w(m, n);
  EXPECT_LT(max_abs_diff(t_product(w.m_inverse(), m), TubalMatrix::identity(3, 4)), 1e-10);
  EXPECT_LT(max_abs_diff(t_product(w.n_inverse(), n), TubalMatrix::identity(2, 4)), 1e-10);
  EXPECT_LT(max_abs_diff(t_product(w.m_sqrt(), w.m_sqrt()), m), 1e-10);
  EXPECT_LT(max_abs_diff(t_product(w.n_sqrt(), w.n_inv_sqrt()), TubalMatrix::identity(2, 4)), 1e-10);
  EXPECT_LT(max_abs_diff(t_product(w.m_inv_sqrt(), w.m_inv_sqrt()), w.m_inverse()), 1e-10);
}

TEST(WeightPair, SemidefiniteUsesPseudoInverse) {
  std::mt19937_64 rng(7);
  TubalMatrix g = oracle::random(2, 3, 3, rng);
  TubalMatrix m = t_product(t_transpose(g), g);  // rank 2 in every slice
  WeightPair w(m, TubalMatrix::identity(2, 3), Definiteness::semidefinite);
  EXPECT_LT(max_abs_diff(w.m_inverse(), t_pinv(m)), 1e-8);
  EXPECT_LT(max_abs_diff(t_product(w.m_sqrt(), w.m_sqrt()), m), 1e-9);
  TubalMatrix a = oracle::random(3, 2, 3, rng);
  double direct = fnorm_weighted(a, w);
  EXPECT_NEAR(direct, t_product(g, a).norm(), 1e-9 * std::max(1.0, direct));
}
