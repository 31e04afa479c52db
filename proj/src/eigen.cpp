#include "relcur/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relcur/errors.hpp"

namespace relcur {

namespace {

double l1_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += std::fabs(x);
  return s;
}

std::vector<double> mat_apply_t(const DMat& m, const std::vector<double>& v) {
  std::vector<double> r(m.cols(), 0.0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r[j] += m(i, j) * v[i];
  return r;
}

}  // namespace

PfData pf_eigen(const DMat& m, double tol, int max_iter) {
  const int n = m.rows();
  if (n == 0 || n != m.cols()) throw PreconditionError("pf_eigen: square matrix required");
  if (n == 1) {
    PfData d;
    d.lambda = m(0, 0);
    d.right = {1.0};
    d.left = {1.0};
    d.iterations = 0;
    return d;
  }
  std::vector<double> v(n, 1.0), u(n, 1.0);
  double lambda = 0.0;
  const double vec_tol = std::max(tol * 10, 1e-13);
  int settled = 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<double> w = m.apply(v);
    std::vector<double> z = mat_apply_t(m, u);
    double nw = l1_norm(w), nz = l1_norm(z);
    if (nw == 0 || nz == 0) throw ConvergenceError("pf_eigen: matrix is not irreducible (zero iterate)");
    for (double& x : w) x /= nw;
    for (double& x : z) x /= nz;
    double num = 0, den = 0;
    std::vector<double> mv = m.apply(w);
    for (int i = 0; i < n; ++i) {
      num += z[i] * mv[i];
      den += z[i] * w[i];
    }
    double est = den != 0 ? num / den : nw;
    double vec_change = 0;
    for (int i = 0; i < n; ++i) vec_change = std::max(vec_change, std::fabs(w[i] - v[i]));
    if (std::fabs(est - lambda) < tol && vec_change < vec_tol) {
      if (++settled >= 3) {
        lambda = est;
        v = w;
        u = z;
        break;
      }
    } else {
      settled = 0;
    }
    lambda = est;
    v = w;
    u = z;
  }
  if (it >= max_iter)
    throw ConvergenceError(
        "pf_eigen: no convergence; the block may be irreducible but not primitive "
        "(run a primitivity check)");
  double mn = *std::min_element(v.begin(), v.end());
  if (mn <= 0) throw ConvergenceError("pf_eigen: eigenvector not positive; block not irreducible?");
  for (double& x : v) x /= mn;
  double dot = 0;
  for (int i = 0; i < n; ++i) dot += u[i] * v[i];
  for (double& x : u) x /= dot;
  PfData d;
  d.lambda = lambda;
  d.right = std::move(v);
  d.left = std::move(u);
  d.iterations = it;
  return d;
}

PfData pf_eigen(const IMat& m, double tol, int max_iter) { return pf_eigen(to_double(m), tol, max_iter); }

namespace {

void balance(DMat& a) {
  const int n = a.rows();
  const double radix = 2.0, sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0, c = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::fabs(a(j, i));
        r += std::fabs(a(i, j));
      }
      if (c != 0 && r != 0) {
        double g = r / radix, f = 1.0, s = c + r;
        while (c < g) {
          f *= radix;
          c *= sqrdx;
        }
        g = r * radix;
        while (c > g) {
          f /= radix;
          c /= sqrdx;
        }
        if ((c + r) / f < 0.95 * s) {
          done = false;
          g = 1.0 / f;
          for (int j = 0; j < n; ++j) a(i, j) *= g;
          for (int j = 0; j < n; ++j) a(j, i) *= f;
        }
      }
    }
  }
}

// Reduction to upper Hessenberg form by stabilized elementary transforms.
void hessenberg(DMat& a) {
  const int n = a.rows();
  for (int m = 1; m < n - 1; ++m) {
    double x = 0;
    int piv = m;
    for (int j = m; j < n; ++j) {
      if (std::fabs(a(j, m - 1)) > std::fabs(x)) {
        x = a(j, m - 1);
        piv = j;
      }
    }
    if (piv != m) {
      for (int j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
      for (int j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
    }
    if (x != 0) {
      for (int i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y != 0) {
          y /= x;
          a(i, m - 1) = 0.0;
          for (int j = m; j < n; ++j) a(i, j) -= y * a(m, j);
          for (int j = 0; j < n; ++j) a(j, m) += y * a(j, i);
        }
      }
    }
  }
}

inline double sign_val(double a, double b) { return b >= 0 ? std::fabs(a) : -std::fabs(a); }

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
std::vector<std::complex<double>> hqr(DMat& a, int max_sweeps) {
  const int n = a.rows();
  std::vector<std::complex<double>> eig(n);
  double anorm = 0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(a(i, j));
  if (anorm == 0) return eig;  // zero matrix
  const double eps = std::numeric_limits<double>::epsilon();
  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
        if (s == 0) s = anorm;
        if (std::fabs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        eig[nn--] = x + t;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::fabs(q));
          x += t;
          if (q >= 0) {
            z = p + sign_val(z, p);
            eig[nn - 1] = eig[nn] = x + z;
            if (z != 0) eig[nn] = x - w / z;
          } else {
            eig[nn] = std::complex<double>(x + p, -z);
            eig[nn - 1] = std::conj(eig[nn]);
          }
          nn -= 2;
        } else {
          if (its == max_sweeps)
            throw ConvergenceError("spectrum: QR failed to converge after " +
                                   std::to_string(max_sweeps) + " sweeps in one eigenvalue");
          if (its == 10 || its == 20) {
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m;
          double p = 0, q = 0, r = 0, z = 0;
          for (m = nn - 2; m >= l; --m) {
            z = a(m, m);
            double rr = x - z;
            double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            double s = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
            double v = std::fabs(p) * (std::fabs(a(m - 1, m - 1)) + std::fabs(z) + std::fabs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::fabs(p) + std::fabs(q) + std::fabs(r);
              if (x != 0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = sign_val(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            double yy = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              double pp = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                pp += r * a(k + 2, j);
                a(k + 2, j) -= pp * z;
              }
              a(k + 1, j) -= pp * yy;
              a(k, j) -= pp * x;
            }
            int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              double pp = x * a(i, k) + yy * a(i, k + 1);
              if (k != nn - 1) {
                pp += z * a(i, k + 2);
                a(i, k + 2) -= pp * r;
              }
              a(i, k + 1) -= pp * q;
              a(i, k) -= pp;
            }
          }
        }
      }
    } while (l < nn - 1 && nn >= 0);
  }
  return eig;
}

}  // namespace

std::vector<std::complex<double>> spectrum(const DMat& m, int max_sweeps) {
  if (m.rows() != m.cols()) throw PreconditionError("spectrum: square matrix required");
  if (m.rows() == 0) return {};
  DMat a = m;
  balance(a);
  hessenberg(a);
  return hqr(a, max_sweeps);
}

SpectrumReport compare_spectra(const DMat& m, const DMat& ml, double tol) {
  SpectrumReport rep;
  rep.base = spectrum(m);
  rep.induced = spectrum(ml);
  std::vector<bool> used(rep.induced.size(), false);
  rep.match.assign(rep.base.size(), -1);
  rep.contained = true;
  for (std::size_t i = 0; i < rep.base.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (std::size_t j = 0; j < rep.induced.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(rep.base[i] - rep.induced[j]);
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    if (best_j >= 0 && best <= tol) {
      used[best_j] = true;
      rep.match[i] = best_j;
      rep.max_match_error = std::max(rep.max_match_error, best);
    } else {
      rep.contained = false;
    }
  }
  for (std::size_t j = 0; j < rep.induced.size(); ++j) {
    if (!used[j]) {
      rep.extras.push_back(rep.induced[j]);
      rep.max_extra_modulus = std::max(rep.max_extra_modulus, std::abs(rep.induced[j]));
    }
  }
  rep.extras_bounded = rep.max_extra_modulus <= 1.0 + tol;
  return rep;
}

std::vector<double> solve_min_norm(const DMat& m, const std::vector<double>& c, double tol,
                                   double* residual) {
  const int r = m.rows();
  const int nvar = m.cols();
  if (static_cast<int>(c.size()) != r) throw PreconditionError("solve_min_norm: size mismatch");
  // Gram matrix and augmented right-hand side.
  DMat g(r, r);
  double scale = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      double s = 0;
      for (int k = 0; k < nvar; ++k) s += m(i, k) * m(j, k);
      g(i, j) = s;
      scale = std::max(scale, std::fabs(s));
    }
  if (scale == 0) scale = 1.0;
  std::vector<double> y(c);
  std::vector<int> perm(r);
  for (int i = 0; i < r; ++i) perm[i] = i;
  int row = 0;
  for (int col = 0; col < r && row < r; ++col) {
    int piv = row;
    for (int i = row + 1; i < r; ++i)
      if (std::fabs(g(perm[i], col)) > std::fabs(g(perm[piv], col))) piv = i;
    if (std::fabs(g(perm[piv], col)) <= tol * scale) continue;  // dependent direction
    std::swap(perm[row], perm[piv]);
    double d = g(perm[row], col);
    for (int i = row + 1; i < r; ++i) {
      double f = g(perm[i], col) / d;
      if (f == 0) continue;
      for (int j = col; j < r; ++j) g(perm[i], j) -= f * g(perm[row], j);
      y[perm[i]] -= f * y[perm[row]];
    }
    ++row;
  }
  // Rows eliminated to zero must carry ~zero right-hand sides.
  double cscale = 0.0;
  for (double v : c) cscale = std::max(cscale, std::fabs(v));
  if (cscale == 0) cscale = 1.0;
  for (int i = row; i < r; ++i) {
    if (std::fabs(y[perm[i]]) > tol * cscale * 1e3)
      throw InternalError("solve_min_norm: inconsistent system (residual " +
                          std::to_string(y[perm[i]]) + ")");
  }
  // Back substitution on the pivoted triangle.
  std::vector<double> sol(r, 0.0);
  // Recover pivot columns: redo the walk to know which column each pivot row used.
  // Simpler: track during elimination would be cleaner; reconstruct by scanning.
  std::vector<int> pivot_col(row, -1);
  {
    int rr = 0;
    for (int col = 0; col < r && rr < row; ++col) {
      if (std::fabs(g(perm[rr], col)) > tol * scale) {
        pivot_col[rr] = col;
        ++rr;
      }
    }
  }
  for (int i = row - 1; i >= 0; --i) {
    double s = y[perm[i]];
    for (int j = pivot_col[i] + 1; j < r; ++j) s -= g(perm[i], j) * sol[j];
    sol[pivot_col[i]] = s / g(perm[i], pivot_col[i]);
  }
  // x = M^T y.
  std::vector<double> x(nvar, 0.0);
  for (int k = 0; k < nvar; ++k) {
    double s = 0;
    for (int i = 0; i < r; ++i) s += m(i, k) * sol[i];
    x[k] = s;
  }
  double res = 0.0;
  for (int i = 0; i < r; ++i) {
    double s = -c[i];
    for (int k = 0; k < nvar; ++k) s += m(i, k) * x[k];
    res = std::max(res, std::fabs(s));
  }
  if (residual) *residual = res;
  if (res > std::max(tol, 1e-9) * std::max(1.0, cscale) * 1e3)
    throw InternalError("solve_min_norm: solution residual " + std::to_string(res));
  return x;
}

}  // namespace relcur
