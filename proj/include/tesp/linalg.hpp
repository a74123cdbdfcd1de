#pragma once

#include "tesp/tubal.hpp"

#include <vector>

// Dense complex helpers applied slice by slice in the Fourier domain.
namespace tesp::linalg {

inline double machine_eps() { return std::numeric_limits<double>::epsilon(); }

CMat hermitian_part(const CMat& a);

// Moore-Penrose inverse; singular values at or below cutoff are dropped.
CMat pinv(const CMat& a, double cutoff);
double sigma_max(const CMat& a);

// Pseudo-inverse of every slice with one cutoff max(m,n) * eps * max_k sigma_max(slice k).
std::vector<CMat> pinv_slices(const std::vector<CMat>& slices);

struct HermEig {
  Eigen::VectorXd values;
  CMat vectors;
};
HermEig herm_eig(const CMat& a);

// Square root of a Hermitian PSD matrix; eigenvalues below cutoff are zeroed.
CMat herm_sqrt(const CMat& a, double cutoff);
// Pseudo-inverse square root; eigenvalues below cutoff are dropped.
CMat herm_pinv_sqrt(const CMat& a, double cutoff);
CMat herm_pinv(const CMat& a, double cutoff);

// F with F F^H = pinv(G) for Hermitian PSD G: F = U diag(lambda^+)^{1/2}.
CMat psd_pinv_factor(const CMat& g, double cutoff);

// Cutoff for a family of Hermitian PSD slices: n * eps * largest eigenvalue seen.
double psd_family_cutoff(const std::vector<CMat>& slices);

// Smallest eigenvalue above cutoff; 0 when every eigenvalue is below it.
double min_positive_eig(const CMat& herm, double cutoff);

// Kronecker product of complex matrices.
CMat kron(const CMat& a, const CMat& b);

}  // namespace tesp::linalg
