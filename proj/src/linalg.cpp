#include "delaystab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace delaystab {

CMat to_complex(const RMat& a) {
  CMat c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
  return c;
}

void matvec_add(Vec& y, const RMat& m, const Vec& x, double w) {
  const int n = m.rows(), c = m.cols();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = m.data() + static_cast<size_t>(i) * c;
    for (int j = 0; j < c; ++j) acc += row[j] * x[j];
    y[i] += w * acc;
  }
}

void matmul_add(RMat& y, const RMat& a, const RMat& b, double w) {
  const int n = a.rows(), k = a.cols(), c = b.cols();
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < k; ++l) {
      const double ail = w * a(i, l);
      for (int j = 0; j < c; ++j) y(i, j) += ail * b(l, j);
    }
}

void add_scaled(CMat& a, const RMat& b, cplx w) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) += w * b(i, j);
}

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm2(const CVec& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

double frobenius(const RMat& m) {
  double s = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

double frobenius(const CMat& m) {
  double s = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s += std::norm(m(i, j));
  return std::sqrt(s);
}

namespace {

// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
double jacobi_max_eigenvalue(RMat s) {
  const int n = s.rows();
  if (n == 1) return s(0, 0);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double w = t * c;
        for (int k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - w * skq;
          s(k, q) = w * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - w * sqk;
          s(q, k) = w * spk + c * sqk;
        }
      }
  }
  double lmax = s(0, 0);
  for (int i = 1; i < n; ++i) lmax = std::max(lmax, s(i, i));
  return lmax;
}

}  // namespace

double spectral_norm(const RMat& m) {
  const int n = m.rows();
  RMat mtm(m.cols(), m.cols());
  for (int i = 0; i < m.cols(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m(k, i) * m(k, j);
      mtm(i, j) = s;
    }
  const double lmax = jacobi_max_eigenvalue(mtm);
  return lmax > 0.0 ? std::sqrt(lmax) : 0.0;
}

namespace {

template <typename T, typename AbsFn>
void lu_factor_impl(Matrix<T>& a, std::vector<int>& perm, T& det, bool& singular, AbsFn mag) {
  const int n = a.rows();
  perm.resize(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  det = T{1};
  singular = false;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = mag(a(k, k));
    for (int i = k + 1; i < n; ++i)
      if (mag(a(i, k)) > best) { best = mag(a(i, k)); piv = i; }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(perm[k], perm[piv]);
      det = -det;
    }
    if (best == 0.0) {
      singular = true;
      det = T{0};
      continue;
    }
    det *= a(k, k);
    const T inv = T{1} / a(k, k);
    for (int i = k + 1; i < n; ++i) {
      a(i, k) *= inv;
      const T lik = a(i, k);
      for (int j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
    }
  }
}

template <typename T, typename Lu>
void lu_solve_impl(const Lu& f, std::vector<T>& b) {
  const int n = f.lu.rows();
  std::vector<T> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    if (f.lu(i, i) == T{0}) throw std::runtime_error("singular matrix in LU solve");
    x[i] /= f.lu(i, i);
  }
  b = std::move(x);
}

}  // namespace

CLu lu_factor(CMat a) {
  CLu f;
  f.lu = std::move(a);
  lu_factor_impl(f.lu, f.perm, f.det, f.singular, [](const cplx& z) { return std::abs(z); });
  return f;
}

void CLu::solve_inplace(CVec& b) const { lu_solve_impl(*this, b); }

CMat CLu::solve(const CMat& b) const {
  const int n = lu.rows(), c = b.cols();
  CMat x(n, c);
  CVec col(n);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < n; ++i) col[i] = b(i, j);
    solve_inplace(col);
    for (int i = 0; i < n; ++i) x(i, j) = col[i];
  }
  return x;
}

RLu lu_factor(RMat a) {
  RLu f;
  f.lu = std::move(a);
  lu_factor_impl(f.lu, f.perm, f.det, f.singular, [](double x) { return std::abs(x); });
  return f;
}

void RLu::solve_inplace(Vec& b) const { lu_solve_impl(*this, b); }

RMat RLu::solve(const RMat& b) const {
  const int n = lu.rows(), c = b.cols();
  RMat x(n, c);
  Vec col(n);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < n; ++i) col[i] = b(i, j);
    solve_inplace(col);
    for (int i = 0; i < n; ++i) x(i, j) = col[i];
  }
  return x;
}

CVec smallest_singular_vector(const CMat& a, double* sigma) {
  const int n = a.rows();
  const double scale = std::max(frobenius(a), 1e-300);

  // Regularize exactly-zero pivots so the solves stay finite; the huge
  // amplification along the null direction is what inverse iteration needs.
  auto factor_regularized = [&](CMat m) {
    CLu f = lu_factor(std::move(m));
    if (f.singular) {
      const double reg = std::max(1e-280 * scale, 1e-290);
      for (int i = 0; i < n; ++i)
        if (f.lu(i, i) == 0.0) f.lu(i, i) = reg;
      f.singular = false;
    }
    return f;
  };

  CMat ah(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ah(i, j) = std::conj(a(j, i));
  const CLu fa = factor_regularized(a);
  const CLu fah = factor_regularized(std::move(ah));

  // rescale by the largest component after every solve: each solve can
  // amplify by ~1/reg, and two in a row would overflow otherwise
  auto normalize_maxabs = [](CVec& x) {
    double amax = 0.0;
    for (const cplx& c : x) amax = std::max(amax, std::abs(c));
    if (!(amax > 0.0) || !std::isfinite(amax)) return false;
    for (cplx& c : x) c /= amax;
    return true;
  };

  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(1.0 / std::sqrt(double(n)), 0.0);
  for (int it = 0; it < 4 + n; ++it) {
    CVec w = fah.solve(v);  // w = a^{-H} v
    if (!normalize_maxabs(w)) break;
    CVec u = fa.solve(w);   // (aᴴa)^{-1} v up to scale
    if (!normalize_maxabs(u)) break;
    const double nu = norm2(u);
    for (auto& x : u) x /= nu;
    v = std::move(u);
  }

  // Deterministic phase: rotate the largest component to the positive reals.
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (std::abs(v[imax]) > 0.0) {
    const cplx phase = std::conj(v[imax]) / std::abs(v[imax]);
    for (auto& x : v) x *= phase;
  }
  const double nv = norm2(v);
  if (nv > 0.0)
    for (auto& x : v) x /= nv;

  if (sigma) {
    CVec av(n, 0.0);
    for (int i = 0; i < n; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < n; ++j) acc += a(i, j) * v[j];
      av[i] = acc;
    }
    *sigma = norm2(av);
  }
  return v;
}

}  // namespace delaystab
