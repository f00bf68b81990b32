#pragma once

#include "delaystab/system_model.hpp"

namespace delaystab {

/// Characteristic matrix at one point: Delta(z) = I + mu_hat(z) for IDEs and
/// z I + mu_hat(z) for DDEs, with its determinant and d/dz det.
struct CharValue {
  cplx z;
  CMat delta;
  cplx det = 0.0;
  cplx det_derivative = 0.0;
};

/// I + sum_k A_k exp(-tau_k z); entire in z.
CMat eval_delta0(const SystemSpec& spec, cplx z);

/// R(z) = integral over [0, tau*] of N(s) exp(-s z) ds, exact per polynomial
/// piece. Below |z| tau* = 1e-2 a degree-12 series branch replaces the closed
/// form, which divides by powers of z and cancels badly near the origin.
CMat eval_R(const SystemSpec& spec, cplx z);

CharValue eval_char(const SystemSpec& spec, cplx z);

/// det Delta(z) without the derivative; `scale` receives max(1, ||Delta||_F),
/// the normalization used by residual thresholds.
cplx char_det(const SystemSpec& spec, cplx z, double* scale = nullptr);

inline double delta_scale(const CharValue& cv) { return std::max(1.0, frobenius(cv.delta)); }

namespace charmat_detail {

constexpr double kSeriesSwitch = 1e-2;  // on |z| * tau*
constexpr int kSeriesDegree = 12;

// Both branches of the piecewise-exponential moment integral, exposed so the
// agreement ring can be tested directly.
cplx monomial_exp_integral_closed(int m, double a, double b, cplx z);
cplx monomial_exp_integral_series(int m, double a, double b, cplx z);
CMat eval_R_branch(const SystemSpec& spec, cplx z, bool series);

// integral over [0, tau*] of s N(s) exp(-s z) ds, used by the analytic
// derivative of Delta.
CMat eval_sR(const SystemSpec& spec, cplx z);

}  // namespace charmat_detail

}  // namespace delaystab
