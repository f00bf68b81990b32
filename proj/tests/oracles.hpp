// Test-only oracles: independent routes to the quantities the library
// computes. Everything here is deliberately brute force; none of it calls
// into the code paths under test.
#pragma once

#include "delaystab/system_model.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracles {

using delaystab::cplx;
using delaystab::HistoryFunction;
using delaystab::Kind;
using delaystab::RMat;
using delaystab::SystemSpec;
using delaystab::Vec;

// ---------------------------------------------------------------------------
// fixture builders

inline SystemSpec scalar_ide(double a, double tau = 1.0, double tau_star = -1.0) {
  SystemSpec s;
  s.kind = Kind::IDE;
  s.dimension = 1;
  s.tau_star = tau_star > 0 ? tau_star : tau;
  RMat m(1, 1);
  m(0, 0) = a;
  s.delay_terms.push_back({tau, m});
  return s;
}

inline SystemSpec scalar_dde(double a, double tau = 1.0, double tau_star = -1.0) {
  SystemSpec s = scalar_ide(a, tau, tau_star);
  s.kind = Kind::DDE;
  return s;
}

// constant-in-s scalar kernel piece N(s) = c on [lo, hi)
inline void add_const_kernel(SystemSpec& s, double c, double lo, double hi) {
  delaystab::KernelPiece p;
  p.lower = lo;
  p.upper = hi;
  RMat m(s.dimension, s.dimension);
  for (int i = 0; i < s.dimension; ++i) m(i, i) = c;
  p.coefficients = {m};
  s.kernel.pieces.push_back(p);
}

// N(s) = c1 * s on [lo, hi)
inline void add_linear_kernel(SystemSpec& s, double c1, double lo, double hi) {
  delaystab::KernelPiece p;
  p.lower = lo;
  p.upper = hi;
  RMat z(s.dimension, s.dimension);
  RMat m = z;
  for (int i = 0; i < s.dimension; ++i) m(i, i) = c1;
  p.coefficients = {z, m};
  s.kernel.pieces.push_back(p);
}

inline HistoryFunction constant_history(const SystemSpec& s, double h, double value) {
  HistoryFunction hist;
  hist.step = h;
  const long m = std::lround(s.tau_star / h);
  hist.samples.assign(static_cast<size_t>(m) + 1, Vec(s.dimension, value));
  if (s.kind == Kind::DDE) hist.x0 = Vec(s.dimension, value);
  return hist;
}

// ---------------------------------------------------------------------------
// quadrature oracle: adaptive Simpson on real and imaginary parts

inline cplx simpson(const std::function<cplx(double)>& f, double a, double b) {
  const double m = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

inline cplx adaptive_simpson(const std::function<cplx(double)>& f, double a, double b,
                             double tol = 1e-14, int depth = 24) {
  const double m = 0.5 * (a + b);
  const cplx whole = simpson(f, a, b);
  const cplx left = simpson(f, a, m), right = simpson(f, m, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, tol / 2.0, depth - 1);
}

// ---------------------------------------------------------------------------
// root oracles for scalar quasi-polynomials z + a e^{-z} and 1 + a e^{-z}

// coarse 2D scan followed by Newton on g(z) = z + a e^{-z}
inline cplx dde_root_scan_newton(double a, double re_lo, double re_hi, double im_lo, double im_hi) {
  auto g = [&](cplx z) { return z + a * std::exp(-z); };
  auto dg = [&](cplx z) { return 1.0 - a * std::exp(-z); };
  cplx best = 0.0;
  double best_v = 1e300;
  const int grid = 200;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      const cplx z(re_lo + (re_hi - re_lo) * i / double(grid),
                   im_lo + (im_hi - im_lo) * j / double(grid));
      const double v = std::abs(g(z));
      if (v < best_v) {
        best_v = v;
        best = z;
      }
    }
  for (int it = 0; it < 80; ++it) {
    const cplx step = g(best) / dg(best);
    best -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return best;
}

// 1D bisection for the real root of x + a e^{-x} = 0 on [lo, hi]
inline double dde_real_root_bisection(double a, double lo, double hi) {
  auto g = [&](double x) { return x + a * std::exp(-x); };
  double flo = g(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = g(mid);
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// closed forms

// fundamental solution of x' + a x(t-1) = 0, r(0)=1, zero history:
// r(t) = sum_{k=0}^{floor(t)} (-a)^k (t-k)^k / k!
inline double dde_fundamental_closed_form(double a, double t) {
  double sum = 0.0;
  const int kmax = static_cast<int>(std::floor(t + 1e-12));
  double fact = 1.0;
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) fact *= k;
    sum += std::pow(-a, k) * std::pow(t - k, k) / fact;
  }
  return sum;
}

// method of steps for x(t) + a x(t-1) = 0 with X0 = 1: piecewise constant,
// value (-a)^{floor(t)+1} ... expressed directly
inline double ide_steps_closed_form(double a, double t) {
  if (t < 0.0) return 1.0;
  const int k = static_cast<int>(std::floor(t + 1e-12));
  return std::pow(-a, k + 1);
}

// ---------------------------------------------------------------------------
// independent residual of the resolvent identity, node-trapezoid route:
// rho + mu (*) rho - mu evaluated with mu in its exact atomic + node-sampled
// density form rather than the cell masses the solver used.
struct ResolventResiduals {
  double left = 0.0;   // rho + mu*rho - mu
  double right = 0.0;  // rho + rho*mu - mu
};

inline ResolventResiduals resolvent_identity_residuals(const SystemSpec& spec,
                                                       const delaystab::GridMeasure& rho) {
  const int n = spec.dimension;
  const double h = rho.step;
  const long cells = std::lround(spec.tau_star / h);
  const long count = static_cast<long>(rho.entries.size());

  std::vector<long> atom_index;
  std::vector<const RMat*> atom_mat;
  for (const auto& d : spec.delay_terms) {
    atom_index.push_back(std::lround(d.tau / h));
    atom_mat.push_back(&d.coefficient);
  }
  std::vector<RMat> nodes;  // trapezoid-weighted density samples
  for (long i = 0; i <= cells; ++i) {
    RMat v = spec.kernel.empty() ? RMat::zero(n)
                                 : delaystab::kernel_value(spec, std::min(h * i, spec.tau_star));
    const double w = (i == 0 || i == cells) ? 0.5 * h : h;
    nodes.push_back(v * w);
  }

  auto mu_node = [&](long j) {
    RMat m = (j <= cells) ? nodes[static_cast<size_t>(j)] : RMat::zero(n);
    for (size_t k = 0; k < atom_index.size(); ++k)
      if (atom_index[k] == j) m += *atom_mat[k];
    return m;
  };

  ResolventResiduals res;
  for (long j = 0; j < count; ++j) {
    RMat left = rho.entries[static_cast<size_t>(j)] - mu_node(j);
    RMat right = left;
    for (long i = 0; i <= std::min(j, cells); ++i) {
      const RMat mi = mu_node(i);
      delaystab::matmul_add(left, mi, rho.entries[static_cast<size_t>(j - i)]);
      delaystab::matmul_add(right, rho.entries[static_cast<size_t>(j - i)], mi);
    }
    res.left = std::max(res.left, delaystab::spectral_norm(left));
    res.right = std::max(res.right, delaystab::spectral_norm(right));
  }
  return res;
}

}  // namespace oracles
