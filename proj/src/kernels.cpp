#include "delaystab/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <vector>

#ifdef DELAYSTAB_HAVE_OPENMP
#include <omp.h>
#endif

namespace delaystab {

namespace {

constexpr long kChunk = 512;

bool use_parallel(Exec exec) {
#ifdef DELAYSTAB_HAVE_OPENMP
  return exec == Exec::Parallel && thread_budget() > 1;
#else
  (void)exec;
  return false;
#endif
}

}  // namespace

int thread_budget() {
  int hw = 1;
#ifdef DELAYSTAB_HAVE_OPENMP
  hw = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("DELAYSTAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return std::max(1, hw);
}

Vec conv_lag_sum(std::span<const RMat> weights, std::span<const Vec> xs, long j, long lo, long hi,
                 Exec exec) {
  const int n = weights.empty() ? (xs.empty() ? 0 : static_cast<int>(xs[0].size()))
                                : weights[0].rows();
  Vec out(n, 0.0);
  if (hi < lo) return out;

  const long count = hi - lo + 1;
  const long nchunks = (count + kChunk - 1) / kChunk;
  std::vector<Vec> partial(static_cast<size_t>(nchunks), Vec(n, 0.0));

  auto fill_chunk = [&](long c) {
    Vec& acc = partial[static_cast<size_t>(c)];
    const long i0 = lo + c * kChunk;
    const long i1 = std::min(hi, i0 + kChunk - 1);
    for (long i = i0; i <= i1; ++i)
      matvec_add(acc, weights[static_cast<size_t>(i)], xs[static_cast<size_t>(j - i)]);
  };

  if (use_parallel(exec)) {
#ifdef DELAYSTAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_budget())
    for (long c = 0; c < nchunks; ++c) fill_chunk(c);
#endif
  } else {
    for (long c = 0; c < nchunks; ++c) fill_chunk(c);
  }

  for (long c = 0; c < nchunks; ++c)
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] += partial[static_cast<size_t>(c)][static_cast<size_t>(i)];
  return out;
}

RMat conv_lag_sum_mat(std::span<const RMat> weights, std::span<const RMat> xs, long j, long lo, long hi,
                      Exec exec) {
  const int n = weights.empty() ? 0 : weights[0].rows();
  RMat out(n, n);
  if (hi < lo) return out;

  const long count = hi - lo + 1;
  const long nchunks = (count + kChunk - 1) / kChunk;
  std::vector<RMat> partial(static_cast<size_t>(nchunks), RMat::zero(n));

  auto fill_chunk = [&](long c) {
    RMat& acc = partial[static_cast<size_t>(c)];
    const long i0 = lo + c * kChunk;
    const long i1 = std::min(hi, i0 + kChunk - 1);
    for (long i = i0; i <= i1; ++i)
      matmul_add(acc, weights[static_cast<size_t>(i)], xs[static_cast<size_t>(j - i)]);
  };

  if (use_parallel(exec)) {
#ifdef DELAYSTAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_budget())
    for (long c = 0; c < nchunks; ++c) fill_chunk(c);
#endif
  } else {
    for (long c = 0; c < nchunks; ++c) fill_chunk(c);
  }

  for (long c = 0; c < nchunks; ++c) out += partial[static_cast<size_t>(c)];
  return out;
}

namespace {

template <typename Better>
ScanResult extreme_scan(long count, const std::function<double(long)>& eval, Exec exec, double init,
                        Better better) {
  ScanResult best{init, -1};
  if (count <= 0) return best;

  if (use_parallel(exec)) {
#ifdef DELAYSTAB_HAVE_OPENMP
#pragma omp parallel num_threads(thread_budget())
    {
      ScanResult local{init, -1};
#pragma omp for schedule(static) nowait
      for (long i = 0; i < count; ++i) {
        const double v = eval(i);
        if (local.index < 0 || better(v, local.value) || (v == local.value && i < local.index)) {
          local.value = v;
          local.index = i;
        }
      }
#pragma omp critical
      {
        if (local.index >= 0 &&
            (best.index < 0 || better(local.value, best.value) ||
             (local.value == best.value && local.index < best.index))) {
          best = local;
        }
      }
    }
#endif
  } else {
    for (long i = 0; i < count; ++i) {
      const double v = eval(i);
      if (best.index < 0 || better(v, best.value)) {
        best.value = v;
        best.index = i;
      }
    }
  }
  return best;
}

}  // namespace

ScanResult grid_min_scan(long count, const std::function<double(long)>& eval, Exec exec) {
  return extreme_scan(count, eval, exec, std::numeric_limits<double>::infinity(),
                      [](double a, double b) { return a < b; });
}

ScanResult grid_max_scan(long count, const std::function<double(long)>& eval, Exec exec) {
  return extreme_scan(count, eval, exec, -std::numeric_limits<double>::infinity(),
                      [](double a, double b) { return a > b; });
}

}  // namespace delaystab
