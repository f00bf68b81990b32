#pragma once

#include "delaystab/spectrum.hpp"
#include "delaystab/system_model.hpp"

#include <string>
#include <vector>

namespace delaystab {

/// State-space norm on partial trajectories: Lebesgue L^p (p in [1, inf]),
/// the sup norm of Borel-bounded functions, or bounded variation (total
/// variation plus sup). The sup norm is offered for IDEs only.
struct NormSpec {
  enum class Family { Lp, Sup, BV };
  Family family = Family::Sup;
  double p = 2.0;  // only read for Lp; infinity allowed

  static NormSpec lp(double p) { return {Family::Lp, p}; }
  static NormSpec sup() { return {Family::Sup, 0.0}; }
  static NormSpec bv() { return {Family::BV, 0.0}; }
};

NormSpec parse_norm(const std::string& name);  // l1 | l2 | linf | sup | bv
std::string norm_name(const NormSpec& n);

struct NormSeries {
  NormSpec norm;
  double step = 0.0;
  std::vector<double> times;      // grid points of [0, T]
  std::vector<double> values;     // ||X_t||_V
  std::vector<double> pointwise;  // |X(t)|, filled for DDE trajectories
  double history_norm = 0.0;      // ||X_0||_V, the t = 0 window
};

/// The tau*/h + 1 samples of X on [t - tau*, t]; t must be a grid point with
/// the window inside the trajectory.
std::vector<Vec> partial_trajectory(const Trajectory& traj, double t, double tau_star);

double window_norm(const std::vector<Vec>& window, const NormSpec& norm, double h);

NormSeries norm_series(const Trajectory& traj, const NormSpec& norm, double tau_star,
                       bool with_pointwise = false);

struct DecayFit {
  double nu_hat = 0.0;
  double c_hat = 1.0;
  bool envelope_hit_zero = false;  // nu_hat is +inf in that case
};

/// Envelope fit: per-window maxima over windows of length tau* starting at
/// fit_start, least squares on their logs. nu_hat is minus the slope; the
/// constant is clipped to >= 1.
DecayFit fit_decay(const NormSeries& series, double fit_start, double tau_star);

/// Same fit on ||X_t|| + |X(t)|, the combined quantity of the DDE criterion.
DecayFit fit_decay_combined(const NormSeries& series, double fit_start, double tau_star);

enum class Verdict { Stable, Unstable, Marginal, Inconsistent };
std::string verdict_name(Verdict v);

struct HistoryFit {
  std::string history_id;
  double nu_hat = 0.0;
  double c_hat = 1.0;
};

struct CriterionVerdict {
  bool has_abscissa = false;
  double windowed_abscissa = 0.0;
  double fitted_decay_rate = 0.0;  // most pessimistic over the battery
  double fitted_constant = 1.0;
  Verdict verdict = Verdict::Inconsistent;
  NormSpec norm;
  std::string notes;
  std::vector<HistoryFit> per_history;
  SpectrumReport spectrum;
};

constexpr double kMarginalTol = 1e-4;
constexpr double kFitStartWindows = 2.0;  // fit starts at 2 tau*
constexpr unsigned kDefaultBatterySeed = 12345;

/// Deterministic battery histories: constant, seeded alternating-sign
/// sawtooth, and the modal history at the rightmost certified root.
std::vector<std::pair<std::string, HistoryFunction>> battery_histories(
    const SystemSpec& spec, const SpectrumReport& report, double h,
    unsigned seed = kDefaultBatterySeed);

/// The full criterion: locate roots, simulate the battery, fit decay rates,
/// and confront the spectral verdict with the measured ones.
CriterionVerdict check_criterion(const SystemSpec& spec, const Window& window, double T, double h,
                                 const NormSpec& norm, unsigned seed = kDefaultBatterySeed,
                                 Exec exec = Exec::Parallel);

void write_norm_series_csv(const NormSeries& series, const std::string& path);

}  // namespace delaystab
