#pragma once

#include "tesp/kernels.hpp"
#include "tesp/problem.hpp"
#include "tesp/sketch.hpp"
#include "tesp/weights.hpp"

#include <vector>

// Fourier-domain precomputation shared by the solvers.
namespace tesp::spectral {

using kernels::BlockTable;

// Half-spectrum slices of the operands and weights.
struct System {
  Index m = 0, r = 0, s = 0, n = 0, l = 0, h = 0;
  std::vector<CMat> a, b, c;
  std::vector<CMat> a_h, b_h;  // adjoints of the slices of a and b
  SpectralWeight mw, nw;

  System(const Problem& p, const WeightPair& w);
};

/**
 * Per-sketch factors for a family of left sketches S_i.
 *
 * With G_i = S_i^H A M^-1 A^H S_i and F_i F_i^H = pinv(G_i):
 *   outer   = F_i^H S_i^H        (tau x m)
 *   update  = M^-1 A^H S_i F_i   (r x tau)
 *   through = A * update         (m x tau)
 */
struct LeftFactors {
  BlockTable outer, update, through;
  Index count() const { return outer.ni(); }
};

/**
 * Per-sketch factors for a family of right sketches V_j.
 *
 * With H_j = V_j^H B^H N^-1 B V_j and D_j D_j^H = pinv(H_j):
 *   outer   = V_j D_j               (n x zeta)
 *   update  = D_j^H V_j^H B^H N^-1  (zeta x s)
 *   through = update * B            (zeta x n)
 */
struct RightFactors {
  BlockTable outer, update, through;
  Index count() const { return outer.nj(); }
};

// Half-spectrum slices of each sketch tensor.
std::vector<std::vector<CMat>> sketch_spectra(const SketchSet& set);

LeftFactors left_factors(const System& sys, const std::vector<std::vector<CMat>>& sketches);
RightFactors right_factors(const System& sys, const std::vector<std::vector<CMat>>& sketches);

// cross(i, v) = outer_i * through_v.
BlockTable left_cross(const LeftFactors& f);
// cross(j, w) = through_j * outer_w.
BlockTable right_cross(const RightFactors& f);

// Residual slices A X B - C.
std::vector<CMat> residual(const System& sys, const std::vector<CMat>& x);

// (1/l) sum_k w_k ||slices_k||^2 over half-spectrum slices.
double half_squared_norm(const std::vector<CMat>& slices, Index tubes);

// Squared F(M,N) norm of the difference of two half spectra.
double weighted_error_sq(const System& sys, const std::vector<CMat>& x, const std::vector<CMat>& y);

}  // namespace tesp::spectral
