// Timing comparison of the serial reference kernels against their OpenMP
// counterparts: the probe grid scan and the resolvent lag convolution.

#include "delaystab/charmat.hpp"
#include "delaystab/kernels.hpp"
#include "delaystab/spectrum.hpp"
#include "delaystab/timedomain.hpp"

#include <chrono>
#include <cstdio>
#include <string>

using namespace delaystab;

namespace {

SystemSpec bench_spec() {
  SystemSpec spec;
  spec.kind = Kind::IDE;
  spec.dimension = 2;
  spec.tau_star = 1.0;
  RMat a(2, 2);
  a(0, 0) = 0.3;
  a(0, 1) = -0.1;
  a(1, 0) = 0.05;
  a(1, 1) = 0.25;
  spec.delay_terms.push_back({1.0, a});
  KernelPiece p;
  p.lower = 0.0;
  p.upper = 1.0;
  RMat c0 = RMat::identity(2) * 0.2;
  RMat c1 = RMat::identity(2) * -0.1;
  p.coefficients = {c0, c1};
  spec.kernel.pieces.push_back(p);
  return spec;
}

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name.c_str(),
              serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  const SystemSpec spec = bench_spec();
  std::printf("thread budget: %d\n", thread_budget());

  {
    // det scan over a strip, the inner loop of the lower-bound probe
    const long nx = 600, ny = 2000;
    auto eval = [&](long i) {
      const cplx z(-1.0 + 2.0 * double(i % nx) / double(nx - 1), 40.0 * double(i / nx) / double(ny - 1));
      return std::abs(char_det(spec, z));
    };
    double smin = 0.0, pmin = 0.0;
    const double ts = time_ms([&] { smin = grid_min_scan(nx * ny, eval, Exec::Serial).value; });
    const double tp = time_ms([&] { pmin = grid_min_scan(nx * ny, eval, Exec::Parallel).value; });
    report("det grid scan", ts, tp);
    if (smin != pmin) std::printf("  MISMATCH: serial %g vs parallel %g\n", smin, pmin);
  }

  {
    const double h = 2.5e-4, T = 4.0;
    GridMeasure rs, rp;
    const double ts = time_ms([&] { rs = compute_resolvent(spec, T, h, Exec::Serial); });
    const double tp = time_ms([&] { rp = compute_resolvent(spec, T, h, Exec::Parallel); });
    report("resolvent convolution", ts, tp);
    for (size_t j = 0; j < rs.entries.size(); ++j)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          if (rs.entries[j](r, c) != rp.entries[j](r, c)) {
            std::printf("  MISMATCH at entry %zu\n", j);
            return 1;
          }
  }

  return 0;
}
