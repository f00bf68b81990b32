#include "delaystab/timedomain.hpp"

#include "delaystab/charmat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace delaystab {

namespace {

struct AtomIndex {
  long index;
  const RMat* matrix;
};

struct GridSetup {
  long cells;  // tau* / h
  long steps;  // T / h
  std::vector<AtomIndex> atoms;
};

GridSetup make_setup(const SystemSpec& spec, const HistoryFunction* history, double T, double h) {
  ensure_valid(spec);
  if (history) {
    if (std::abs(history->step - h) > 1e-12 * std::max(1.0, h))
      throw std::invalid_argument("step mismatch: history step " + std::to_string(history->step) +
                                  " differs from simulation step " + std::to_string(h));
    const auto errs = validate_history(spec, *history);
    if (!errs.empty()) {
      std::string msg = "invalid history:";
      for (const auto& e : errs) msg += "\n  - " + e;
      throw std::invalid_argument(msg);
    }
  }
  GridSetup g;
  g.cells = grid_index(spec.tau_star, h);
  if (g.cells < 1)
    throw std::invalid_argument("tau_star/h must be a positive integer (suggested h = " +
                                std::to_string(suggest_step(spec)) + ")");
  g.steps = std::lround(T / h);
  if (g.steps < g.cells) throw std::invalid_argument("horizon T must be at least tau_star");
  for (const auto& d : spec.delay_terms) {
    const long j = grid_index(d.tau, h);
    if (j < 0)
      throw std::invalid_argument("delay tau=" + std::to_string(d.tau) +
                                  " not commensurate with h (suggested h = " +
                                  std::to_string(suggest_step(spec)) + ")");
    g.atoms.push_back({j, &d.coefficient});
  }
  return g;
}

// Both one-sided value sequences of the forcing on [0, tau*]: `minus` holds
// the left limits (atoms with tau_k >= t act on the history), `plus` the
// right limits (ties move to the running solution).
struct ForcingPair {
  std::vector<Vec> minus;
  std::vector<Vec> plus;

  Vec at_minus(long j, int n) const {
    return j < static_cast<long>(minus.size()) ? minus[static_cast<size_t>(j)] : Vec(n, 0.0);
  }
  Vec at_plus(long j, int n) const {
    return j < static_cast<long>(plus.size()) ? plus[static_cast<size_t>(j)] : Vec(n, 0.0);
  }
};

ForcingPair build_forcing_pair(const SystemSpec& spec, const HistoryFunction& history,
                               const GridSetup& g, double h) {
  const int n = spec.dimension;
  const long M = g.cells;
  ForcingPair fp;
  fp.minus.assign(static_cast<size_t>(M) + 1, Vec(n, 0.0));
  fp.plus = fp.minus;

  std::vector<RMat> kernel_nodes;
  if (!spec.kernel.empty()) {
    kernel_nodes.reserve(static_cast<size_t>(M) + 1);
    for (long i = 0; i <= M; ++i) kernel_nodes.push_back(kernel_value(spec, std::min(h * i, spec.tau_star)));
  }

  for (long j = 0; j <= M; ++j) {
    Vec f(n, 0.0);
    for (const auto& a : g.atoms) {
      if (a.index >= j) matvec_add(f, *a.matrix, history.samples[static_cast<size_t>(j - a.index + M)], -1.0);
    }
    if (!spec.kernel.empty() && j < M) {
      // trapezoid of N(s) X0(t_j - s) over s in [t_j, tau*]
      for (long i = j; i <= M; ++i) {
        const double w = (i == j || i == M) ? 0.5 * h : h;
        matvec_add(f, kernel_nodes[static_cast<size_t>(i)],
                   history.samples[static_cast<size_t>(j - i + M)], -w);
      }
    }
    fp.minus[static_cast<size_t>(j)] = f;
    // right limit: atoms exactly at t_j flip to the solution side
    Vec fplus = f;
    for (const auto& a : g.atoms)
      if (a.index == j) matvec_add(fplus, *a.matrix, history.samples[static_cast<size_t>(M)], +1.0);
    fp.plus[static_cast<size_t>(j)] = std::move(fplus);
  }
  return fp;
}

Trajectory assemble_trajectory(const HistoryFunction& history, std::vector<Vec> x, long M, double h,
                               double tau_star, Provenance prov) {
  Trajectory traj;
  traj.step = h;
  traj.start = -tau_star;
  traj.provenance = prov;
  traj.values.reserve(static_cast<size_t>(M) + x.size());
  for (long i = 0; i < M; ++i) traj.values.push_back(history.samples[static_cast<size_t>(i)]);
  for (auto& v : x) traj.values.push_back(std::move(v));
  return traj;
}

RLu factor_step_matrix(const RMat& weight, int n, const char* what) {
  RMat s = RMat::identity(n);
  s += weight;
  RLu lu = lu_factor(std::move(s));
  if (lu.singular) throw NumericalError(std::string("singular step matrix in ") + what);
  return lu;
}

}  // namespace

ForcingFunction build_forcing(const SystemSpec& spec, const HistoryFunction& history, double h) {
  const GridSetup g = make_setup(spec, &history, spec.tau_star, h);
  ForcingPair fp = build_forcing_pair(spec, history, g, h);
  ForcingFunction f;
  f.step = h;
  f.values = std::move(fp.minus);
  return f;
}

Trajectory simulate_ide(const SystemSpec& spec, const HistoryFunction& history, double T, double h,
                        Exec exec) {
  if (spec.kind != Kind::IDE) throw std::invalid_argument("simulate_ide requires an IDE spec");
  const GridSetup g = make_setup(spec, &history, T, h);
  const int n = spec.dimension;
  const long M = g.cells, J = g.steps;
  const ForcingPair fp = build_forcing_pair(spec, history, g, h);

  std::vector<RMat> kernel_nodes;
  RLu step_lu;
  const bool has_kernel = !spec.kernel.empty();
  if (has_kernel) {
    kernel_nodes.reserve(static_cast<size_t>(M) + 1);
    for (long i = 0; i <= M; ++i) kernel_nodes.push_back(kernel_value(spec, std::min(h * i, spec.tau_star)));
    step_lu = factor_step_matrix(kernel_nodes[0] * (0.5 * h), n, "simulate_ide (I + h/2 N(0))");
  }

  std::vector<Vec> x(static_cast<size_t>(J) + 1, Vec(n, 0.0));
  x[0] = fp.at_plus(0, n);
  for (long j = 1; j <= J; ++j) {
    Vec rhs = fp.at_plus(j, n);
    for (const auto& a : g.atoms)
      if (a.index <= j) matvec_add(rhs, *a.matrix, x[static_cast<size_t>(j - a.index)], -1.0);
    if (has_kernel) {
      const long L = std::min(j, M);
      const Vec interior = conv_lag_sum(kernel_nodes, x, j, 1, L - 1, exec);
      for (int i = 0; i < n; ++i) rhs[static_cast<size_t>(i)] -= h * interior[static_cast<size_t>(i)];
      matvec_add(rhs, kernel_nodes[static_cast<size_t>(L)], x[static_cast<size_t>(j - L)], -0.5 * h);
      step_lu.solve_inplace(rhs);
    }
    x[static_cast<size_t>(j)] = std::move(rhs);
  }
  return assemble_trajectory(history, std::move(x), M, h, spec.tau_star, Provenance::Stepping);
}

Trajectory simulate_dde(const SystemSpec& spec, const HistoryFunction& history, double T, double h,
                        Exec exec) {
  if (spec.kind != Kind::DDE) throw std::invalid_argument("simulate_dde requires a DDE spec");
  if (!history.x0) throw std::invalid_argument("simulate_dde requires x0 in the history");
  const GridSetup g = make_setup(spec, &history, T, h);
  const int n = spec.dimension;
  const long M = g.cells, J = g.steps;
  const ForcingPair fp = build_forcing_pair(spec, history, g, h);
  const GridMeasure mu = discretize_measure(spec, h);
  const RLu step_lu = factor_step_matrix(mu.entries[0] * (0.5 * h), n, "simulate_dde (I + h/2 mu_0)");

  std::vector<Vec> x(static_cast<size_t>(J) + 1, Vec(n, 0.0));
  x[0] = *history.x0;

  // g_plus = f(t+) - (mu (*) x)(t+), the right limit of the integrand
  Vec g_plus = fp.at_plus(0, n);
  matvec_add(g_plus, mu.entries[0], x[0], -1.0);

  for (long j = 0; j < J; ++j) {
    const long jn = j + 1;
    const long L = std::min(jn, M);
    // lag sum over i in [1, L]; the full cell at lag t_{j+1} is excluded from
    // the left limit and restored for the next right limit
    Vec partial = conv_lag_sum(mu.entries, x, jn, 1, L, exec);
    if (jn <= M) matvec_add(partial, mu.entries[static_cast<size_t>(jn)], x[0], -1.0);

    Vec rhs = x[static_cast<size_t>(j)];
    const Vec fminus = fp.at_minus(jn, n);
    for (int i = 0; i < n; ++i)
      rhs[static_cast<size_t>(i)] +=
          0.5 * h *
          (g_plus[static_cast<size_t>(i)] + fminus[static_cast<size_t>(i)] - partial[static_cast<size_t>(i)]);
    step_lu.solve_inplace(rhs);
    x[static_cast<size_t>(jn)] = std::move(rhs);

    g_plus = fp.at_plus(jn, n);
    matvec_add(g_plus, mu.entries[0], x[static_cast<size_t>(jn)], -1.0);
    for (int i = 0; i < n; ++i) g_plus[static_cast<size_t>(i)] -= partial[static_cast<size_t>(i)];
    if (jn <= M) matvec_add(g_plus, mu.entries[static_cast<size_t>(jn)], x[0], -1.0);
  }
  return assemble_trajectory(history, std::move(x), M, h, spec.tau_star, Provenance::Stepping);
}

GridMeasure compute_resolvent(const SystemSpec& spec, double T, double h, Exec exec) {
  if (spec.kind != Kind::IDE) throw std::invalid_argument("compute_resolvent requires an IDE spec");
  const GridSetup g = make_setup(spec, nullptr, T, h);
  const int n = spec.dimension;
  const long M = g.cells, J = g.steps;
  const GridMeasure mu = discretize_measure(spec, h);

  RMat s = RMat::identity(n);
  s += mu.entries[0];
  RLu cell0 = lu_factor(std::move(s));
  if (cell0.singular) throw NumericalError("singular cell-0 correction matrix in compute_resolvent");

  GridMeasure rho;
  rho.step = h;
  rho.entries.assign(static_cast<size_t>(J) + 1, RMat::zero(n));
  for (long j = 0; j <= J; ++j) {
    RMat rhs = (j <= M) ? mu.entries[static_cast<size_t>(j)] : RMat::zero(n);
    if (j >= 1) rhs -= conv_lag_sum_mat(mu.entries, rho.entries, j, 1, std::min(j, M), exec);
    rho.entries[static_cast<size_t>(j)] = cell0.solve(rhs);
  }
  return rho;
}

MatrixTrajectory differential_resolvent(const SystemSpec& spec, double T, double h, Exec exec) {
  if (spec.kind != Kind::DDE)
    throw std::invalid_argument("differential_resolvent requires a DDE spec");
  const GridSetup g = make_setup(spec, nullptr, T, h);
  const int n = spec.dimension;
  const long M = g.cells, J = g.steps;
  const GridMeasure mu = discretize_measure(spec, h);
  const RLu step_lu =
      factor_step_matrix(mu.entries[0] * (0.5 * h), n, "differential_resolvent (I + h/2 mu_0)");

  MatrixTrajectory r;
  r.step = h;
  r.start = 0.0;
  r.provenance = Provenance::Stepping;
  r.values.assign(static_cast<size_t>(J) + 1, RMat::zero(n));
  r.values[0] = RMat::identity(n);

  RMat g_plus = mu.entries[0] * (-1.0);
  for (long j = 0; j < J; ++j) {
    const long jn = j + 1;
    const long L = std::min(jn, M);
    RMat partial = conv_lag_sum_mat(mu.entries, r.values, jn, 1, L, exec);
    if (jn <= M) matmul_add(partial, mu.entries[static_cast<size_t>(jn)], r.values[0], -1.0);

    RMat rhs = r.values[static_cast<size_t>(j)];
    rhs += (g_plus - partial) * (0.5 * h);
    r.values[static_cast<size_t>(jn)] = step_lu.solve(rhs);

    g_plus = partial * (-1.0);
    matmul_add(g_plus, mu.entries[0], r.values[static_cast<size_t>(jn)], -1.0);
    if (jn <= M) matmul_add(g_plus, mu.entries[static_cast<size_t>(jn)], r.values[0], -1.0);
  }
  return r;
}

Trajectory solve_via_resolvent(const SystemSpec& spec, const HistoryFunction& history, double T,
                               double h, Exec exec) {
  const GridSetup g = make_setup(spec, &history, T, h);
  const int n = spec.dimension;
  const long M = g.cells, J = g.steps;
  const ForcingPair fp = build_forcing_pair(spec, history, g, h);

  // zero-extended one-sided forcing sequences over the whole horizon
  std::vector<Vec> fplus(static_cast<size_t>(J) + 1, Vec(n, 0.0));
  std::vector<Vec> fminus(static_cast<size_t>(J) + 1, Vec(n, 0.0));
  for (long j = 0; j <= std::min(M, J); ++j) {
    fplus[static_cast<size_t>(j)] = fp.plus[static_cast<size_t>(j)];
    fminus[static_cast<size_t>(j)] = fp.minus[static_cast<size_t>(j)];
  }

  std::vector<Vec> x(static_cast<size_t>(J) + 1, Vec(n, 0.0));
  if (spec.kind == Kind::IDE) {
    const GridMeasure rho = compute_resolvent(spec, T, h, exec);
    for (long j = 0; j <= J; ++j) {
      Vec v = fplus[static_cast<size_t>(j)];
      const Vec conv = conv_lag_sum(rho.entries, fplus, j, 0, j, exec);
      for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] -= conv[static_cast<size_t>(i)];
      x[static_cast<size_t>(j)] = std::move(v);
    }
  } else {
    if (!history.x0) throw std::invalid_argument("DDE resolvent formula requires x0");
    const MatrixTrajectory r = differential_resolvent(spec, T, h, exec);
    for (long j = 0; j <= J; ++j) {
      Vec v(n, 0.0);
      matvec_add(v, r.values[static_cast<size_t>(j)], *history.x0);
      if (j >= 1) {
        // two-sided trapezoid of r(s) f(t-s): f jumps at the atoms, and each
        // cell takes the one-sided value belonging to it
        const Vec a = conv_lag_sum(r.values, fminus, j, 0, j - 1, exec);
        const Vec b = conv_lag_sum(r.values, fplus, j, 1, j, exec);
        for (int i = 0; i < n; ++i)
          v[static_cast<size_t>(i)] += 0.5 * h * (a[static_cast<size_t>(i)] + b[static_cast<size_t>(i)]);
      }
      x[static_cast<size_t>(j)] = std::move(v);
    }
  }
  return assemble_trajectory(history, std::move(x), M, h, spec.tau_star,
                             Provenance::ResolventFormula);
}

CVec modal_null_vector(const SystemSpec& spec, cplx z0) {
  const CharValue cv = eval_char(spec, z0);
  const double scale = delta_scale(cv);
  double sigma = 0.0;
  CVec v = smallest_singular_vector(cv.delta, &sigma);
  if (std::abs(cv.det) > 1e-8 * scale || sigma > 1e-6 * scale) {
    std::ostringstream os;
    os << "not a root: |det Delta| = " << std::abs(cv.det) << ", sigma_min = " << sigma << " at z = ("
       << z0.real() << ", " << z0.imag() << ")";
    throw std::invalid_argument(os.str());
  }
  return v;
}

Vec modal_solution_value(cplx z0, const CVec& v0, double t) {
  Vec out(v0.size());
  const cplx w = std::exp(z0 * t);
  for (size_t i = 0; i < v0.size(); ++i) out[i] = (w * v0[i]).real();
  return out;
}

HistoryFunction build_modal_history(const SystemSpec& spec, cplx z0, double h) {
  ensure_valid(spec);
  const long M = grid_index(spec.tau_star, h);
  if (M < 1) throw std::invalid_argument("tau_star/h must be a positive integer");
  const CVec v0 = modal_null_vector(spec, z0);

  HistoryFunction hist;
  hist.step = h;
  hist.samples.reserve(static_cast<size_t>(M) + 1);
  for (long i = 0; i <= M; ++i)
    hist.samples.push_back(modal_solution_value(z0, v0, -spec.tau_star + h * static_cast<double>(i)));
  if (spec.kind == Kind::DDE) hist.x0 = modal_solution_value(z0, v0, 0.0);
  return hist;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int n = traj.values.empty() ? 0 : static_cast<int>(traj.values[0].size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << "\n";
  char buf[64];
  for (size_t j = 0; j < traj.values.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.time_at(static_cast<long>(j)));
    out << buf;
    for (double v : traj.values[j]) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

void write_matrix_trajectory_csv(const MatrixTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int n = traj.values.empty() ? 0 : traj.values[0].rows();
  out << "t";
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) out << ",r" << i << j;
  out << "\n";
  char buf[64];
  for (size_t k = 0; k < traj.values.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.time_at(static_cast<long>(k)));
    out << buf;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", traj.values[k](i, j));
        out << buf;
      }
    out << "\n";
  }
}

}  // namespace delaystab
