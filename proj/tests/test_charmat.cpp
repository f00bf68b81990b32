#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "delaystab/charmat.hpp"
#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace delaystab;
using std::numbers::pi;

namespace {

cplx det1(const CMat& m) { return m(0, 0); }

}  // namespace

TEST_CASE("delta0 on the scalar fixture") {
  const SystemSpec s = oracles::scalar_ide(0.5, 1.0);
  CHECK(det1(eval_delta0(s, 0.0)).real() == doctest::Approx(1.5).epsilon(1e-15));
  const cplx at_ipi = det1(eval_delta0(s, cplx(0.0, pi)));
  CHECK(at_ipi.real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(at_ipi.imag()) < 1e-12);
}

TEST_CASE("delta0 matches a long-double termwise summation oracle") {
  SystemSpec s;
  s.kind = Kind::IDE;
  s.dimension = 2;
  s.tau_star = 2.0;
  RMat a(2, 2);
  a(0, 0) = 0.3;
  a(1, 1) = -0.2;
  s.delay_terms.push_back({2.0, a});
  const cplx z(0.5, 1.0);
  const CMat d = eval_delta0(s, z);

  // independent route in extended precision
  const std::complex<long double> zl(0.5L, 1.0L);
  const std::complex<long double> e = std::exp(-2.0L * zl);
  CHECK(std::abs(d(0, 0) - cplx(double(1.0L + 0.3L * e.real()), double(0.3L * e.imag()))) < 1e-14);
  CHECK(std::abs(d(1, 1) - cplx(double(1.0L - 0.2L * e.real()), double(-0.2L * e.imag()))) < 1e-14);
  CHECK(std::abs(d(0, 1)) == 0.0);
}

TEST_CASE("eval_R closed forms for the constant kernel") {
  SystemSpec s = oracles::scalar_ide(0.0, 1.0);
  s.delay_terms.clear();
  oracles::add_const_kernel(s, 1.0, 0.0, 1.0);
  CHECK(det1(eval_R(s, 0.0)).real() == doctest::Approx(1.0).epsilon(1e-14));
  const cplx r1 = det1(eval_R(s, 1.0));
  CHECK(r1.real() == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(std::abs(r1.imag()) < 1e-16);
}

TEST_CASE("eval_R agrees with adaptive quadrature for N(s) = s") {
  SystemSpec s = oracles::scalar_ide(0.0, 1.0);
  s.delay_terms.clear();
  oracles::add_linear_kernel(s, 1.0, 0.0, 1.0);
  for (const cplx z : {cplx(2.0, 0.0), cplx(0.7, -3.0), cplx(-1.2, 5.0)}) {
    const cplx mine = det1(eval_R(s, z));
    const cplx ref =
        oracles::adaptive_simpson([&](double t) { return t * std::exp(-z * t); }, 0.0, 1.0);
    CHECK(std::abs(mine - ref) < 1e-12);
  }
}

TEST_CASE("series and closed-form branches agree on the switch ring") {
  SystemSpec s = oracles::scalar_ide(0.0, 1.0);
  s.delay_terms.clear();
  oracles::add_linear_kernel(s, 0.7, 0.0, 0.4);
  oracles::add_const_kernel(s, -0.3, 0.4, 1.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> mag(0.5 * charmat_detail::kSeriesSwitch,
                                             2.0 * charmat_detail::kSeriesSwitch);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
  for (int i = 0; i < 50; ++i) {
    const double r = mag(rng), th = ang(rng);
    const cplx z = r * std::exp(cplx(0.0, th)) / s.tau_star;
    const CMat a = charmat_detail::eval_R_branch(s, z, true);
    const CMat b = charmat_detail::eval_R_branch(s, z, false);
    CHECK(std::abs(a(0, 0) - b(0, 0)) < 1e-12);
  }
}

TEST_CASE("eval_char at the known scalar root") {
  const SystemSpec s = oracles::scalar_ide(0.5, 1.0);
  const CharValue off = eval_char(s, cplx(std::log(2.0), pi));
  CHECK(off.det.real() == doctest::Approx(0.75).epsilon(1e-12));
  const CharValue on = eval_char(s, cplx(std::log(0.5), pi));
  CHECK(std::abs(on.det) < 1e-14);
}

TEST_CASE("DDE characteristic matrix") {
  const SystemSpec s = oracles::scalar_dde(1.0, 1.0);
  const CharValue cv = eval_char(s, 0.0);
  CHECK(cv.det.real() == doctest::Approx(1.0).epsilon(1e-15));  // 0 + 1*e^0
  CHECK(std::abs(cv.det.imag()) < 1e-16);
}

TEST_CASE("conjugate symmetry of det for real data") {
  SystemSpec s = oracles::scalar_ide(0.5, 1.0);
  oracles::add_linear_kernel(s, 0.4, 0.0, 1.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 25; ++i) {
    const cplx z(u(rng), 5.0 * u(rng));
    const cplx d = eval_char(s, z).det;
    const cplx dbar = eval_char(s, std::conj(z)).det;
    CHECK(std::abs(dbar - std::conj(d)) < 1e-13 * std::max(1.0, std::abs(d)));
  }
}

TEST_CASE("det tends to 1 far right for atomic specs") {
  for (double a : {0.5, 2.0, 0.9}) {
    const SystemSpec s = oracles::scalar_ide(a, 1.0);
    const CharValue cv = eval_char(s, cplx(50.0, 0.0));
    CHECK(std::abs(cv.det - 1.0) < 1e-6);
  }
  // with a kernel the tail obeys the slower |R| <= ||N||_L1 bound
  SystemSpec k = oracles::scalar_ide(0.5, 1.0);
  oracles::add_const_kernel(k, 0.2, 0.0, 1.0);
  const CharValue cv = eval_char(k, cplx(50.0, 0.0));
  CHECK(std::abs(cv.det - 1.0) <= 0.5 * std::exp(-50.0) + 0.2 + 1e-12);
}

TEST_CASE("det_derivative matches central differences at non-root points") {
  SystemSpec s = oracles::scalar_dde(1.0, 1.0);
  oracles::add_linear_kernel(s, 0.3, 0.0, 1.0);
  for (const cplx z : {cplx(0.4, 0.8), cplx(-0.5, 2.0), cplx(1.0, 0.0)}) {
    const CharValue cv = eval_char(s, z);
    const double step = 1e-6 * std::max(1.0, std::abs(z));
    const cplx fd = (eval_char(s, z + step).det - eval_char(s, z - step).det) / (2.0 * step);
    CHECK(std::abs(cv.det_derivative - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("n=2 determinant via LU matches the 2x2 cofactor formula") {
  SystemSpec s;
  s.kind = Kind::IDE;
  s.dimension = 2;
  s.tau_star = 1.0;
  RMat a(2, 2);
  a(0, 0) = 0.2;
  a(0, 1) = 0.3;
  a(1, 0) = -0.1;
  a(1, 1) = 0.4;
  s.delay_terms.push_back({1.0, a});
  const cplx z(0.3, 1.2);
  const CharValue cv = eval_char(s, z);
  const CMat& d = cv.delta;
  const cplx manual = d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0);
  CHECK(std::abs(cv.det - manual) < 1e-14 * std::max(1.0, std::abs(manual)));
}
