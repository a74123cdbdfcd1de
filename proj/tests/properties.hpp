#pragma once

// Randomised algebraic identities shared by the unit suites and the acceptance runner.
// Every function draws one instance and returns the largest relative violation.

#include "oracles.hpp"

#include "tesp/tubal.hpp"

#include <array>
#include <random>

namespace props {

using namespace tesp;

inline double rel_err(const TubalMatrix& lhs, const TubalMatrix& rhs) {
  return (lhs - rhs).norm() / std::max(1.0, lhs.norm());
}

inline Index dim(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

// t_product against fold(bcirc(A) * unfold(B)), both with the library's and an independent bcirc.
inline double product_vs_bcirc(std::mt19937_64& rng) {
  Index m = dim(rng, 1, 4), n = dim(rng, 1, 4), r = dim(rng, 1, 4), l = dim(rng, 1, 5);
  TubalMatrix a = oracle::random(m, n, l, rng), b = oracle::random(n, r, l, rng);
  TubalMatrix c = t_product(a, b);
  TubalMatrix via_lib = fold(bcirc_expand(a) * unfold(b), l);
  TubalMatrix via_oracle = oracle::first_block_column(oracle::bcirc(a) * oracle::bcirc(b), m, r, l);
  return std::max(max_abs_diff(c, via_lib), max_abs_diff(c, via_oracle));
}

// Largest relative violation of the four Penrose identities.
inline double penrose(std::mt19937_64& rng) {
  Index m = dim(rng, 1, 5), n = dim(rng, 1, 5), l = dim(rng, 1, 5);
  TubalMatrix a = oracle::random(m, n, l, rng);
  // Rank-deficient factorisation in about a third of the draws.
  if (std::uniform_int_distribution<int>(0, 2)(rng) == 0 && std::min(m, n) > 1) {
    Index k = std::min(m, n) - 1;
    a = t_product(oracle::random(m, k, l, rng), oracle::random(k, n, l, rng));
  }
  TubalMatrix p = t_pinv(a);
  const double an = std::max(1.0, a.norm()), pn = std::max(1.0, p.norm());
  double e1 = (t_product(t_product(a, p), a) - a).norm() / an;
  double e2 = (t_product(t_product(p, a), p) - p).norm() / pn;
  TubalMatrix ap = t_product(a, p), pa = t_product(p, a);
  double e3 = (t_transpose(ap) - ap).norm() / std::max(1.0, ap.norm());
  double e4 = (t_transpose(pa) - pa).norm() / std::max(1.0, pa.norm());
  return std::max({e1, e2, e3, e4});
}

// t-Kronecker product from its block definition: block (i, j) is tube A(i,j,:) times B.
inline TubalMatrix kron_definition(const TubalMatrix& a, const TubalMatrix& b) {
  const Index l = a.tubes();
  TubalMatrix c(a.rows() * b.rows(), a.cols() * b.cols(), l);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < l; ++k)
        for (Index q = 0; q < l; ++q) {
          double t = a(i, j, ((k - q) % l + l) % l);
          for (Index bi = 0; bi < b.rows(); ++bi)
            for (Index bj = 0; bj < b.cols(); ++bj) c(i * b.rows() + bi, j * b.cols() + bj, k) += t * b(bi, bj, q);
        }
  return c;
}

inline TubalMatrix projector(const TubalMatrix& q) {
  TubalMatrix qt = t_transpose(q);
  return t_product(t_product(q, t_pinv(t_product(qt, q))), qt);
}

inline double lambda_min_sym(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// Violations of the nine t-Kronecker identities, in order.
inline std::array<double, 9> kron_identities(std::mt19937_64& rng) {
  std::array<double, 9> e{};
  const Index l = dim(rng, 1, 4);
  auto rnd = [&](Index m, Index n) { return oracle::random(m, n, l, rng); };

  {  // vec_t(A*B*C) = (C^ST (x) A) * vec_t(B)
    TubalMatrix a = rnd(2, 3), b = rnd(3, 2), c = rnd(2, 3);
    TubalMatrix lhs = vec_t(t_product(t_product(a, b), c));
    TubalMatrix rhs = t_product(t_kron(t_transpose(c, TransposeKind::ST), a), vec_t(b));
    e[0] = rel_err(lhs, rhs);
  }
  {  // transposes distribute
    TubalMatrix a = rnd(2, 3), b = rnd(3, 2);
    TubalMatrix k = t_kron(a, b);
    double v = 0;
    for (auto kind : {TransposeKind::T, TransposeKind::ST, TransposeKind::R})
      v = std::max(v, rel_err(t_transpose(k, kind), t_kron(t_transpose(a, kind), t_transpose(b, kind))));
    e[1] = v;
  }
  {  // mixed product
    TubalMatrix a = rnd(2, 3), b = rnd(3, 2), c = rnd(2, 2), d = rnd(2, 3);
    e[2] = rel_err(t_kron(t_product(a, b), t_product(c, d)), t_product(t_kron(a, c), t_kron(b, d)));
  }
  {  // squared norm from Fourier slices
    TubalMatrix a = rnd(2, 3), b = rnd(3, 2);
    auto ah = oracle::direct_dft(a), bh = oracle::direct_dft(b);
    double s = 0;
    for (Index k = 0; k < l; ++k) s += ah[k].squaredNorm() * bh[k].squaredNorm();
    s /= static_cast<double>(l);
    e[3] = oracle::rel(kron_definition(a, b).squared_norm(), s);
  }
  {  // pseudo-inverse distributes
    TubalMatrix a = rnd(3, 2), b = rnd(2, 3);
    e[4] = rel_err(t_pinv(t_kron(a, b)), t_kron(t_pinv(a), t_pinv(b)));
  }
  {  // lambda_min bound for T-SPD factors
    TubalMatrix a = oracle::random_spd(2, l, rng), b = oracle::random_spd(2, l, rng);
    double lhs = lambda_min_sym(oracle::bcirc(t_kron(a, b)));
    double rhs = lambda_min_sym(oracle::bcirc(a)) * lambda_min_sym(oracle::bcirc(b));
    e[5] = lhs >= rhs * (1 - 1e-10) - 1e-12 ? 0.0 : (rhs - lhs) / std::max(1.0, rhs);
  }
  {  // inverse distributes
    TubalMatrix a = oracle::random_spd(2, l, rng), b = oracle::random_spd(3, l, rng);
    TubalMatrix k = t_kron(a, b);
    TubalMatrix inv = t_kron(t_inverse(a), t_inverse(b));
    TubalMatrix id = TubalMatrix::identity(6, l);
    e[6] = std::max(rel_err(t_product(k, inv), id), rel_err(t_product(inv, k), id));
  }
  {  // T-SPD closure, checked on the explicit block-circulant matrix
    TubalMatrix a = oracle::random_spd(2, l, rng), b = oracle::random_spd(2, l, rng);
    Mat bc = oracle::bcirc(t_kron(a, b));
    double asym = (bc - bc.transpose()).norm() / std::max(1.0, bc.norm());
    double lmin = lambda_min_sym(bc);
    e[7] = std::max(asym, lmin > 0 ? 0.0 : -lmin);
  }
  {  // orthogonal projector closure
    TubalMatrix p = projector(rnd(3, 2)), q = projector(rnd(2, 1));
    TubalMatrix k = t_kron(p, q);
    e[8] = std::max(rel_err(t_product(k, k), k), rel_err(t_transpose(k), k));
  }
  return e;
}

// ||A - P1 A P2||^2 = ||A||^2 - ||P1 A P2||^2 for orthogonal projectors.
inline double pythagorean(std::mt19937_64& rng) {
  Index m = dim(rng, 2, 5), n = dim(rng, 2, 5), l = dim(rng, 1, 5);
  TubalMatrix a = oracle::random(m, n, l, rng);
  TubalMatrix p1 = projector(oracle::random(m, dim(rng, 1, m), l, rng));
  TubalMatrix p2 = projector(oracle::random(n, dim(rng, 1, n), l, rng));
  TubalMatrix pap = t_product(t_product(p1, a), p2);
  double lhs = (a - pap).squared_norm();
  double rhs = a.squared_norm() - pap.squared_norm();
  return std::abs(lhs - rhs) / std::max(1.0, a.squared_norm());
}

}  // namespace props
