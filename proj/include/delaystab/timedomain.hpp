#pragma once

#include "delaystab/errors.hpp"
#include "delaystab/kernels.hpp"
#include "delaystab/system_model.hpp"

namespace delaystab {

/// History-induced inhomogeneity f(t) = -∫_{[t, tau*]} mu(ds) X0(t-s) on the
/// grid of [0, tau*]; zero afterwards. Values are the left limits f(t-); the
/// steppers recover the right limits by adding the atom jumps, so both
/// one-sided values of this piecewise-continuous function are available.
struct ForcingFunction {
  double step = 0.0;
  std::vector<Vec> values;
};

ForcingFunction build_forcing(const SystemSpec& spec, const HistoryFunction& history, double h);

/// Explicit time-marching of the algebraic delay equation
///   x(t) = f(t) - sum_k A_k x(t - tau_k) - ∫_0^{min(t, tau*)} N(s) x(t-s) ds
/// with trapezoidal quadrature for the distributed part; the h/2 weight at
/// lag zero makes each step an n-by-n solve with I + (h/2) N(0). The returned
/// trajectory embeds the history on [-tau*, 0).
Trajectory simulate_ide(const SystemSpec& spec, const HistoryFunction& history, double T, double h,
                        Exec exec = Exec::Parallel);

/// Trapezoidal (Crank-Nicolson type) integration of
///   x'(t) = f(t) - (mu (*) x)(t),  x(0) = x0,
/// where the convolution runs against the cell-aggregated GridMeasure. Atom
/// crossings are integrated with one-sided values on each side, keeping
/// second order through the kinks of x'.
Trajectory simulate_dde(const SystemSpec& spec, const HistoryFunction& history, double T, double h,
                        Exec exec = Exec::Parallel);

/// Resolvent of mu on the grid: the measure rho with
/// rho + mu*rho = rho + rho*mu = mu, computed by forward substitution on the
/// discrete convolution equation (cell 0 carries only kernel mass, so each
/// entry needs one small linear solve).
GridMeasure compute_resolvent(const SystemSpec& spec, double T, double h,
                              Exec exec = Exec::Parallel);

/// Differential resolvent: matrix solution of r' + mu*r = 0, r(0) = I, via
/// the same trapezoidal scheme as simulate_dde with zero history.
MatrixTrajectory differential_resolvent(const SystemSpec& spec, double T, double h,
                                        Exec exec = Exec::Parallel);

/// Evaluates the explicit solution formulas against the computed resolvents:
/// x = f - rho*f for IDEs and x = r x0 + r*f for DDEs. Cross-validates the
/// stepping routes; provenance is tagged resolvent-formula.
Trajectory solve_via_resolvent(const SystemSpec& spec, const HistoryFunction& history, double T,
                               double h, Exec exec = Exec::Parallel);

/// Unit null vector of Delta(z0) (smallest singular direction, deterministic
/// phase). Throws std::invalid_argument("not a root ...") when Delta(z0) is
/// not rank-deficient within tolerance.
CVec modal_null_vector(const SystemSpec& spec, cplx z0);

/// History sampled from the modal solution Re(e^{z0 s} v0) on [-tau*, 0];
/// for DDEs the initial value x0 = Re(v0) is attached. Simulating from it
/// must reproduce Re(e^{z0 t} v0).
HistoryFunction build_modal_history(const SystemSpec& spec, cplx z0, double h);

/// Reference modal solution sample Re(e^{z0 t} v0).
Vec modal_solution_value(cplx z0, const CVec& v0, double t);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_matrix_trajectory_csv(const MatrixTrajectory& traj, const std::string& path);

}  // namespace delaystab
