#pragma once

#include "tesp/tubal.hpp"

#include <vector>

namespace tesp {

enum class Definiteness { definite, semidefinite };

// Cached Fourier-domain functions of one symmetric weight tensor.
struct SpectralWeight {
  std::vector<CMat> inverse;    // inverse, or pseudo-inverse when semidefinite
  std::vector<CMat> sqrt;       // principal square root
  std::vector<CMat> inv_sqrt;   // (pseudo-)inverse square root
  bool identity = false;
};

/**
 * Pair of weights (M, N) with M r x r x l and N s x s x l.
 *
 * In definite mode both must be T-SPD. Semidefinite mode accepts T-SPSD
 * weights and substitutes pseudo-inverses. Identity weights skip all
 * products.
 */
class WeightPair {
 public:
  WeightPair() = default;
  WeightPair(TubalMatrix m, TubalMatrix n, Definiteness mode = Definiteness::definite);
  static WeightPair identity(Index r, Index s, Index tubes);

  const TubalMatrix& m() const { return m_; }
  const TubalMatrix& n() const { return n_; }
  Definiteness mode() const { return mode_; }
  bool is_identity() const { return left_.identity && right_.identity; }

  const SpectralWeight& left() const { return left_; }
  const SpectralWeight& right() const { return right_; }

  // Spatial tensors recovered from the cached spectra.
  TubalMatrix m_inverse() const;
  TubalMatrix n_inverse() const;
  TubalMatrix m_sqrt() const;
  TubalMatrix n_sqrt() const;
  TubalMatrix m_inv_sqrt() const;
  TubalMatrix n_inv_sqrt() const;

 private:
  TubalMatrix m_, n_;
  Definiteness mode_ = Definiteness::definite;
  SpectralWeight left_, right_;
};

// ||A||_{F(M,N)} = ||M^{1/2} A N^{1/2}||_F.
double fnorm_weighted(const TubalMatrix& a, const WeightPair& w);

}  // namespace tesp
