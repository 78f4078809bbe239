#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's recurrences, quadrature rules or kernel code.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "ouspec/fields.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// h_n(x) from the explicit sum H_n(x) = n! sum_m (-1)^m (2x)^{n-2m} / (m! (n-2m)!), in long double.
inline long double hermite_explicit(int n, long double x) {
  long double sum = 0.0L;
  for (int m = 0; 2 * m <= n; ++m) {
    const long double term = std::pow(-1.0L, m) * std::pow(2.0L * x, n - 2 * m) /
                             (std::tgamma((long double)m + 1) * std::tgamma((long double)(n - 2 * m) + 1));
    sum += term;
  }
  const long double hn = std::tgamma((long double)n + 1) * sum;
  return hn / std::sqrt(std::pow(2.0L, n) * std::tgamma((long double)n + 1));
}

/// One-dimensional Mehler kernel of e^{-zL} for complex z with Re z > 0:
/// e^{z/2} (2 sinh z)^{-1/2} exp(((1 - coth z)(x^2 + y^2) + 2xy / sinh z) / 2).
inline cplx mehler_z(cplx z, double x, double y) {
  const cplx sh = std::sinh(z);
  const cplx coth = std::cosh(z) / sh;
  const cplx ex = 0.5 * ((1.0 - coth) * (x * x + y * y) + 2.0 * x * y / sh);
  return std::exp(0.5 * z) / std::sqrt(2.0 * sh) * std::exp(ex);
}

/// Pointwise synthesis by the explicit polynomial formula (d = 1 only).
inline cplx eval_1d(const ou::SpectralField& f, double x) {
  cplx acc = 0.0;
  for (std::size_t k = 0; k < f.coeffs.size(); ++k) {
    acc += f.coeffs[k] * static_cast<double>(hermite_explicit(static_cast<int>(k), x));
  }
  return acc;
}

/// (int |u|^r w^s dgamma)^{1/r} by a plain trapezoid on [-X, X]^d with `n` points per axis,
/// using ou::evaluate pointwise (no tensor synthesis).
inline double brute_lp(const ou::SpectralField& u, double r, double s, double X, int n) {
  const int d = u.spec.dimension;
  const double h = 2.0 * X / (n - 1);
  const double norm = std::pow(M_PI, -0.5 * d);
  double acc = 0.0;
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  while (true) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      x[k] = -X + idx[k] * h;
      r2 += x[k] * x[k];
    }
    const double wgt = norm * std::exp(-(1.0 + 0.5 * s) * r2) * std::pow(h, d);
    if (wgt > 0.0) acc += wgt * std::pow(std::abs(ou::evaluate(u, x)), r);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == n) idx[k--] = 0;
    if (k < 0) break;
  }
  return std::pow(acc, 1.0 / r);
}

/// max |u(x)| e^{-|x|^2/2} on a dense 1-D lattice.
inline double brute_sup_1d(const ou::SpectralField& u, double X, int n) {
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -X + 2.0 * X * i / (n - 1);
    const double xs[1] = {x};
    best = std::max(best, std::abs(ou::evaluate(u, xs)) * std::exp(-0.5 * x * x));
  }
  return best;
}

inline ou::SpectralField random_field(const ou::BasisSpec& spec, std::mt19937_64& rng, double decay = 0.1) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto basis = ou::basis_for(spec);
  ou::SpectralField f = ou::SpectralField::zero(spec);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    const double sd = std::exp(-decay * basis->modes()[i].order());
    f.coeffs[i] = cplx(sd * g(rng), sd * g(rng));
  }
  return f;
}

}  // namespace oracle
