#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace delaystab {

using cplx = std::complex<double>;
using Vec = std::vector<double>;
using CVec = std::vector<cplx>;

/// Small dense row-major matrix. Systems in this library are low-dimensional
/// (state dimension is typically below ten), so everything is direct and
/// allocation-friendly rather than blocked.
template <typename T>
class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, T{}) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }
  static Matrix zero(int n) { return Matrix(n, n); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  Matrix& operator+=(const Matrix& o) {
    for (size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    for (size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using RMat = Matrix<double>;
using CMat = Matrix<cplx>;

CMat to_complex(const RMat& a);

// y += w * M x  (hot path in the convolution kernels)
void matvec_add(Vec& y, const RMat& m, const Vec& x, double w = 1.0);
void matmul_add(RMat& y, const RMat& a, const RMat& b, double w = 1.0);
// a += w * b, mixing real data into complex accumulators
void add_scaled(CMat& a, const RMat& b, cplx w);

double norm2(const Vec& v);
double norm2(const CVec& v);
double frobenius(const RMat& m);
double frobenius(const CMat& m);

/// Operator 2-norm of a real matrix: sqrt of the largest eigenvalue of MᵀM,
/// computed with cyclic Jacobi sweeps.
double spectral_norm(const RMat& m);

/// LU factorization with partial pivoting for complex matrices; carries the
/// determinant (product of pivots times permutation sign).
struct CLu {
  CMat lu;
  std::vector<int> perm;
  cplx det = 0.0;
  bool singular = false;

  void solve_inplace(CVec& b) const;
  CVec solve(CVec b) const { solve_inplace(b); return b; }
  CMat solve(const CMat& b) const;
};
CLu lu_factor(CMat a);

struct RLu {
  RMat lu;
  std::vector<int> perm;
  double det = 0.0;
  bool singular = false;

  void solve_inplace(Vec& b) const;
  Vec solve(Vec b) const { solve_inplace(b); return b; }
  RMat solve(const RMat& b) const;
};
RLu lu_factor(RMat a);

/// Unit vector along the smallest singular direction of `a` (inverse
/// iteration on aᴴa through two triangular solves). The phase is normalized
/// so the largest-magnitude component is real and positive. `sigma` receives
/// ‖a v‖₂ when non-null.
CVec smallest_singular_vector(const CMat& a, double* sigma = nullptr);

}  // namespace delaystab
