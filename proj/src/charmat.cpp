#include "delaystab/charmat.hpp"

#include <cmath>

namespace delaystab {

namespace charmat_detail {

namespace {

double factorial(int j) {
  double f = 1.0;
  for (int k = 2; k <= j; ++k) f *= k;
  return f;
}

// J_j = integral over [0, L] of u^j e^{-zu} du. The textbook form
// (j!/z^{j+1})(1 - e^{-w} sum_{i<=j} w^i / i!) with w = zL cancels badly for
// small |w|; there the factored tail series is exact down to w = 0.
cplx truncated_moment(int j, double L, cplx z) {
  const cplx w = z * L;
  if (std::abs(w) <= 1.0) {
    cplx sum = 0.0;
    cplx term = 1.0 / factorial(j + 1);
    for (int k = 0; k <= 30; ++k) {
      sum += term;
      term *= w / double(k + j + 2);
    }
    return factorial(j) * std::pow(L, j + 1) * std::exp(-w) * sum;
  }
  cplx partial = 0.0, term = 1.0;
  for (int i = 0; i <= j; ++i) {
    partial += term;
    term *= w / double(i + 1);
  }
  cplx zp = z;
  for (int i = 0; i < j; ++i) zp *= z;  // z^{j+1}
  return factorial(j) / zp * (1.0 - std::exp(-w) * partial);
}

}  // namespace

cplx monomial_exp_integral_closed(int m, double a, double b, cplx z) {
  // shift to [0, b-a]: s^m = sum_j C(m,j) a^{m-j} u^j
  const double L = b - a;
  cplx acc = 0.0;
  double binom = 1.0;
  double apow = std::pow(a, m);
  for (int j = 0; j <= m; ++j) {
    acc += binom * apow * truncated_moment(j, L, z);
    binom *= double(m - j) / double(j + 1);
    apow = (a != 0.0) ? apow / a : ((j + 1 == m) ? 1.0 : 0.0);
  }
  return std::exp(-z * a) * acc;
}

cplx monomial_exp_integral_series(int m, double a, double b, cplx z) {
  cplx acc = 0.0;
  cplx zpow = 1.0;  // (-z)^l / l!
  double pa = std::pow(a, m + 1), pb = std::pow(b, m + 1);
  for (int l = 0; l <= kSeriesDegree; ++l) {
    acc += zpow * ((pb - pa) / double(m + l + 1));
    pa *= a;
    pb *= b;
    zpow *= -z / double(l + 1);
  }
  return acc;
}

namespace {

CMat accumulate_pieces(const SystemSpec& spec, cplx z, bool series, bool weight_by_s) {
  const int n = spec.dimension;
  CMat acc(n, n);
  for (const auto& p : spec.kernel.pieces) {
    for (size_t m = 0; m < p.coefficients.size(); ++m) {
      const int power = static_cast<int>(m) + (weight_by_s ? 1 : 0);
      const cplx ival = series ? monomial_exp_integral_series(power, p.lower, p.upper, z)
                               : monomial_exp_integral_closed(power, p.lower, p.upper, z);
      add_scaled(acc, p.coefficients[m], ival);
    }
  }
  return acc;
}

}  // namespace

CMat eval_R_branch(const SystemSpec& spec, cplx z, bool series) {
  return accumulate_pieces(spec, z, series, false);
}

CMat eval_sR(const SystemSpec& spec, cplx z) {
  const bool series = std::abs(z) * spec.tau_star < kSeriesSwitch;
  return accumulate_pieces(spec, z, series, true);
}

}  // namespace charmat_detail

CMat eval_delta0(const SystemSpec& spec, cplx z) {
  CMat d = to_complex(RMat::identity(spec.dimension));
  for (const auto& term : spec.delay_terms)
    add_scaled(d, term.coefficient, std::exp(-term.tau * z));
  return d;
}

CMat eval_R(const SystemSpec& spec, cplx z) {
  const bool series = std::abs(z) * spec.tau_star < charmat_detail::kSeriesSwitch;
  return charmat_detail::eval_R_branch(spec, z, series);
}

namespace {

CMat delta_at(const SystemSpec& spec, cplx z) {
  CMat delta = eval_delta0(spec, z);
  delta += eval_R(spec, z);
  if (spec.kind == Kind::DDE) {
    // z I + mu_hat(z) = Delta0(z) - I + R(z) + z I
    for (int i = 0; i < spec.dimension; ++i) delta(i, i) += z - 1.0;
  }
  return delta;
}

cplx det_at(const SystemSpec& spec, cplx z) { return lu_factor(delta_at(spec, z)).det; }

// d/dz Delta: -sum tau_k A_k e^{-tau_k z} - integral s N(s) e^{-sz} ds (+ I for DDE)
CMat delta_derivative(const SystemSpec& spec, cplx z) {
  const int n = spec.dimension;
  CMat d(n, n);
  for (const auto& term : spec.delay_terms)
    add_scaled(d, term.coefficient, -term.tau * std::exp(-term.tau * z));
  d -= charmat_detail::eval_sR(spec, z);
  if (spec.kind == Kind::DDE)
    for (int i = 0; i < n; ++i) d(i, i) += 1.0;
  return d;
}

}  // namespace

cplx char_det(const SystemSpec& spec, cplx z, double* scale) {
  const CMat delta = delta_at(spec, z);
  if (scale) *scale = std::max(1.0, frobenius(delta));
  return lu_factor(delta).det;
}

CharValue eval_char(const SystemSpec& spec, cplx z) {
  CharValue cv;
  cv.z = z;
  cv.delta = delta_at(spec, z);

  const CLu lu = lu_factor(cv.delta);
  cv.det = lu.det;

  // Jacobi's formula det' = det * tr(Delta^{-1} Delta'); fall back to a
  // central difference when Delta is too close to singular for the solve.
  bool jacobi_ok = !lu.singular;
  if (jacobi_ok) {
    double pivmin = std::abs(lu.lu(0, 0));
    for (int i = 1; i < spec.dimension; ++i) pivmin = std::min(pivmin, std::abs(lu.lu(i, i)));
    jacobi_ok = pivmin > 1e-13 * delta_scale(cv);
  }
  if (jacobi_ok) {
    const CMat x = lu.solve(delta_derivative(spec, z));
    cplx trace = 0.0;
    for (int i = 0; i < spec.dimension; ++i) trace += x(i, i);
    cv.det_derivative = cv.det * trace;
  } else {
    const double step = 1e-6 * std::max(1.0, std::abs(z));
    cv.det_derivative = (det_at(spec, z + step) - det_at(spec, z - step)) / (2.0 * step);
  }
  return cv;
}

}  // namespace delaystab
