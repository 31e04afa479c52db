#pragma once

#include <complex>
#include <vector>

#include "relcur/matrix.hpp"

namespace relcur {

struct PfData {
  double lambda = 0.0;
  std::vector<double> right;  // normalized so the smallest entry is one
  std::vector<double> left;   // normalized so left . right == 1
  int iterations = 0;
};

// Power iteration for the dominant eigenpair of an irreducible non-negative
// matrix.  Throws ConvergenceError when estimates fail to settle (typical for
// irreducible but imprimitive blocks; the message suggests a primitivity
// check).
PfData pf_eigen(const DMat& m, double tol = 1e-14, int max_iter = 20000);
PfData pf_eigen(const IMat& m, double tol = 1e-14, int max_iter = 20000);

// All eigenvalues of a small dense real matrix: balancing, Householder
// reduction to Hessenberg form, then Francis double-shift QR.
std::vector<std::complex<double>> spectrum(const DMat& m, int max_sweeps = 100);

struct SpectrumReport {
  std::vector<std::complex<double>> base;     // eigenvalues of M
  std::vector<std::complex<double>> induced;  // eigenvalues of M_l
  std::vector<int> match;                     // per base eigenvalue, index into induced
  std::vector<std::complex<double>> extras;   // unmatched induced eigenvalues
  double max_match_error = 0.0;
  double max_extra_modulus = 0.0;
  bool contained = false;      // every base eigenvalue matched within tol
  bool extras_bounded = false; // every extra has modulus <= 1 + tol
};

// Greedily matches eigenvalues of M into those of M_l within tol and checks
// the leftover moduli.
SpectrumReport compare_spectra(const DMat& m, const DMat& ml, double tol = 1e-6);

// Minimum-Euclidean-norm solution of the consistent underdetermined system
// M x = c, via the normal equations M M^T y = c.  residual receives
// ||M x - c||_inf.  Throws InternalError when the system is inconsistent
// beyond tol.
std::vector<double> solve_min_norm(const DMat& m, const std::vector<double>& c,
                                   double tol, double* residual = nullptr);

}  // namespace relcur
