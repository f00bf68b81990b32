#pragma once

#include "delaystab/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace delaystab {

enum class Kind { IDE, DDE };

/// One pointwise delay term: the matrix acting on X(t - tau).
struct DelayTerm {
  double tau = 0.0;
  RMat coefficient;
};

/// One polynomial piece of the distributed kernel on [lower, upper);
/// value(s) = sum_m coefficients[m] * s^m, degree at most 3.
struct KernelPiece {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<RMat> coefficients;
};

struct PiecewiseKernel {
  std::vector<KernelPiece> pieces;
  bool empty() const { return pieces.empty(); }
};

constexpr int kMaxKernelDegree = 3;

/// The equation itself: kind, dimension, horizon tau*, pointwise delays and
/// the distributed kernel. Immutable after construction; all operations on it
/// are pure.
struct SystemSpec {
  Kind kind = Kind::IDE;
  int dimension = 0;
  double tau_star = 0.0;
  std::vector<DelayTerm> delay_terms;
  PiecewiseKernel kernel;
};

/// Initial data sampled on a uniform grid covering exactly [-tau*, 0].
/// For DDEs, x0 carries the separate value X(0).
struct HistoryFunction {
  double step = 0.0;
  std::vector<Vec> samples;
  std::optional<Vec> x0;
};

/// Discretized matrix measure on a uniform grid: entries[j] aggregates the
/// mass on [j h, (j+1) h). Atoms land exactly in entry tau_k / h; entry 0
/// holds only the kernel mass on [0, h) since the measure has no atom at 0.
struct GridMeasure {
  double step = 0.0;
  std::vector<RMat> entries;
};

enum class Provenance { Stepping, ResolventFormula, ModalClosedForm };

struct Trajectory {
  double step = 0.0;
  double start = 0.0;
  std::vector<Vec> values;
  Provenance provenance = Provenance::Stepping;

  double time_at(long i) const { return start + step * static_cast<double>(i); }
  long index_of(double t) const;           // throws if t is off-grid or out of range
  const Vec& at_time(double t) const { return values[static_cast<size_t>(index_of(t))]; }
};

struct MatrixTrajectory {
  double step = 0.0;
  double start = 0.0;
  std::vector<RMat> values;
  Provenance provenance = Provenance::Stepping;

  double time_at(long i) const { return start + step * static_cast<double>(i); }
};

/// Checks every SystemSpec invariant; returns the list of violations
/// (empty means valid).
std::vector<std::string> validate(const SystemSpec& spec);

/// Throws std::invalid_argument with the joined violation list.
void ensure_valid(const SystemSpec& spec);

/// Nearest integer j with x ~= j*h; returns -1 when x is not commensurate
/// with the grid (relative tolerance 1e-9).
long grid_index(double x, double h);

/// Coarsest step h = tau*/m (m <= 1e6) such that every delay is an integer
/// multiple of h. Throws if no such step exists.
double suggest_step(const SystemSpec& spec);

/// Cell-aggregated measure of the spec on step h. Atoms are placed exactly;
/// kernel mass per cell comes from exact polynomial integration. Requires
/// all delays and tau* to be integer multiples of h.
GridMeasure discretize_measure(const SystemSpec& spec, double h);

/// Kernel value N(s); s = tau* evaluates the last piece (closed right end).
RMat kernel_value(const SystemSpec& spec, double s);

double measure_total_mass(const GridMeasure& mu);   // sum of operator norms
double atoms_total_mass(const SystemSpec& spec);    // sum |A_k|
double kernel_abs_mass(const SystemSpec& spec);     // integral of |N(s)| ds

/// What a spec file holds: the equation plus optional initial data.
struct SystemFile {
  SystemSpec spec;
  std::optional<HistoryFunction> history;
};

SystemFile parse_system(const std::string& json_text);
SystemFile load_system(const std::string& path);
std::string serialize_system(const SystemFile& file);
void save_system(const SystemFile& file, const std::string& path);

/// Violations of the history block against a spec (grid coverage, dimension,
/// x0 presence for DDEs).
std::vector<std::string> validate_history(const SystemSpec& spec, const HistoryFunction& h);

}  // namespace delaystab
