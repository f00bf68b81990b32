#pragma once

#include "delaystab/linalg.hpp"

#include <functional>
#include <span>

namespace delaystab {

/// Execution mode for the data-parallel inner loops. Serial is the reference
/// path; Parallel runs the same chunk decomposition under OpenMP, so results
/// are bitwise identical between the two.
enum class Exec { Serial, Parallel };

/// Worker cap: min(DELAYSTAB_THREADS, hardware threads); at least 1.
int thread_budget();

/// Lag-sum convolution y = sum_{i=lo..hi} weights[i] * xs[j - i].
/// Partial sums are accumulated per fixed-size chunk and folded in chunk
/// order, which pins the floating-point result independently of the thread
/// count.
Vec conv_lag_sum(std::span<const RMat> weights, std::span<const Vec> xs, long j, long lo, long hi,
                 Exec exec = Exec::Parallel);

RMat conv_lag_sum_mat(std::span<const RMat> weights, std::span<const RMat> xs, long j, long lo, long hi,
                      Exec exec = Exec::Parallel);

struct ScanResult {
  double value = 0.0;
  long index = -1;
};

/// Minimum of eval(i) over i in [0, count); ties resolve to the smallest
/// index, so the result is deterministic under any schedule.
ScanResult grid_min_scan(long count, const std::function<double(long)>& eval, Exec exec = Exec::Parallel);

/// Maximum variant of the scan, same determinism contract.
ScanResult grid_max_scan(long count, const std::function<double(long)>& eval, Exec exec = Exec::Parallel);

}  // namespace delaystab
