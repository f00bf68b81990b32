#include "delaystab/stability.hpp"

#include "delaystab/timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace delaystab {

NormSpec parse_norm(const std::string& name) {
  if (name == "l1") return NormSpec::lp(1.0);
  if (name == "l2") return NormSpec::lp(2.0);
  if (name == "linf") return NormSpec::lp(std::numeric_limits<double>::infinity());
  if (name == "sup") return NormSpec::sup();
  if (name == "bv") return NormSpec::bv();
  throw std::invalid_argument("unknown norm \"" + name + "\" (expected l1|l2|linf|sup|bv)");
}

std::string norm_name(const NormSpec& n) {
  switch (n.family) {
    case NormSpec::Family::Sup:
      return "sup";
    case NormSpec::Family::BV:
      return "bv";
    case NormSpec::Family::Lp:
      if (std::isinf(n.p)) return "linf";
      if (n.p == 1.0) return "l1";
      if (n.p == 2.0) return "l2";
      return "l" + std::to_string(n.p);
  }
  return "?";
}

std::vector<Vec> partial_trajectory(const Trajectory& traj, double t, double tau_star) {
  if (t < 0.0) throw std::invalid_argument("partial trajectory requires t >= 0");
  const long i1 = traj.index_of(t);
  const long m = grid_index(tau_star, traj.step);
  if (m < 1) throw std::invalid_argument("tau_star is not a multiple of the trajectory step");
  const long i0 = i1 - m;
  if (i0 < 0) throw std::out_of_range("window [t - tau*, t] leaves the trajectory");
  return {traj.values.begin() + i0, traj.values.begin() + i1 + 1};
}

double window_norm(const std::vector<Vec>& window, const NormSpec& norm, double h) {
  if (window.empty()) throw std::invalid_argument("empty window");
  auto sup = [&] {
    double s = 0.0;
    for (const auto& v : window) s = std::max(s, norm2(v));
    return s;
  };
  switch (norm.family) {
    case NormSpec::Family::Sup:
      return sup();
    case NormSpec::Family::BV: {
      double tv = 0.0;
      for (size_t i = 0; i + 1 < window.size(); ++i) {
        double d = 0.0;
        for (size_t c = 0; c < window[i].size(); ++c) {
          const double diff = window[i + 1][c] - window[i][c];
          d += diff * diff;
        }
        tv += std::sqrt(d);
      }
      return tv + sup();
    }
    case NormSpec::Family::Lp: {
      if (norm.p < 1.0) throw std::invalid_argument("Lp norm requires p >= 1");
      if (std::isinf(norm.p)) return sup();
      // trapezoid of |X(s)|^p, then the p-th root
      double acc = 0.0;
      for (size_t i = 0; i < window.size(); ++i) {
        const double w = (i == 0 || i + 1 == window.size()) ? 0.5 * h : h;
        acc += w * std::pow(norm2(window[i]), norm.p);
      }
      return std::pow(acc, 1.0 / norm.p);
    }
  }
  throw std::logic_error("unreachable norm family");
}

NormSeries norm_series(const Trajectory& traj, const NormSpec& norm, double tau_star,
                       bool with_pointwise) {
  NormSeries s;
  s.norm = norm;
  s.step = traj.step;
  const long m = grid_index(tau_star, traj.step);
  if (m < 1) throw std::invalid_argument("tau_star is not a multiple of the trajectory step");
  const long count = static_cast<long>(traj.values.size());
  std::vector<Vec> window(traj.values.begin(), traj.values.begin() + m + 1);
  for (long i1 = m; i1 < count; ++i1) {
    // slide the window one step
    if (i1 > m) {
      window.erase(window.begin());
      window.push_back(traj.values[static_cast<size_t>(i1)]);
    }
    const double t = traj.time_at(i1);
    s.times.push_back(t);
    s.values.push_back(window_norm(window, norm, traj.step));
    if (with_pointwise) s.pointwise.push_back(norm2(traj.values[static_cast<size_t>(i1)]));
  }
  s.history_norm = s.values.empty() ? 0.0 : s.values.front();
  return s;
}

namespace {

DecayFit fit_envelope(const NormSeries& series, const std::vector<double>& vals, double fit_start,
                      double tau_star) {
  const double h = series.step;
  const long w = std::lround(tau_star / h);
  long start = 0;
  while (start < static_cast<long>(series.times.size()) && series.times[start] < fit_start - 1e-12)
    ++start;

  std::vector<double> maxima, mids;
  for (long i0 = start; i0 + w <= static_cast<long>(vals.size()); i0 += w) {
    double m = 0.0;
    for (long k = i0; k < i0 + w; ++k) m = std::max(m, vals[static_cast<size_t>(k)]);
    maxima.push_back(m);
    mids.push_back(series.times[static_cast<size_t>(i0)] + 0.5 * tau_star);
  }
  if (maxima.size() < 3)
    throw std::invalid_argument("series too short: need at least 3 envelope windows after fit_start");

  DecayFit fit;
  for (double m : maxima)
    if (m == 0.0) {
      fit.nu_hat = std::numeric_limits<double>::infinity();
      fit.c_hat = 1.0;
      fit.envelope_hit_zero = true;
      return fit;
    }

  // least squares on log maxima vs window midpoints
  const double n = static_cast<double>(maxima.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < maxima.size(); ++i) {
    const double y = std::log(maxima[i]);
    st += mids[i];
    sy += y;
    stt += mids[i] * mids[i];
    sty += mids[i] * y;
  }
  const double denom = n * stt - st * st;
  const double slope = (n * sty - st * sy) / denom;
  const double intercept = (sy * stt - st * sty) / denom;
  fit.nu_hat = -slope;
  double c = std::exp(intercept);
  if (series.history_norm > 0.0) c *= std::max(1.0, 1.0 / series.history_norm);
  fit.c_hat = std::max(1.0, c);
  return fit;
}

}  // namespace

DecayFit fit_decay(const NormSeries& series, double fit_start, double tau_star) {
  return fit_envelope(series, series.values, fit_start, tau_star);
}

DecayFit fit_decay_combined(const NormSeries& series, double fit_start, double tau_star) {
  if (series.pointwise.size() != series.values.size())
    throw std::invalid_argument("series has no pointwise values; build it from a DDE trajectory");
  std::vector<double> combined(series.values.size());
  for (size_t i = 0; i < combined.size(); ++i) combined[i] = series.values[i] + series.pointwise[i];
  return fit_envelope(series, combined, fit_start, tau_star);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Marginal: return "marginal";
    case Verdict::Inconsistent: return "inconsistent";
  }
  return "?";
}

std::vector<std::pair<std::string, HistoryFunction>> battery_histories(
    const SystemSpec& spec, const SpectrumReport& report, double h, unsigned seed) {
  const int n = spec.dimension;
  const long m = grid_index(spec.tau_star, h);
  if (m < 1) throw std::invalid_argument("tau_star/h must be a positive integer");

  std::vector<std::pair<std::string, HistoryFunction>> out;

  HistoryFunction constant;
  constant.step = h;
  constant.samples.assign(static_cast<size_t>(m) + 1, Vec(n, 1.0));
  if (spec.kind == Kind::DDE) constant.x0 = Vec(n, 1.0);
  out.emplace_back("constant", std::move(constant));

  auto sawtooth = [&](unsigned salt) {
    std::mt19937 rng(seed + salt);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec phase(n);
    for (int c = 0; c < n; ++c) phase[static_cast<size_t>(c)] = unif(rng);
    HistoryFunction hist;
    hist.step = h;
    for (long i = 0; i <= m; ++i) {
      const double s = -spec.tau_star + h * static_cast<double>(i);
      Vec v(n);
      for (int c = 0; c < n; ++c) {
        const double u = 4.0 * (s + spec.tau_star) / spec.tau_star + phase[static_cast<size_t>(c)];
        const double k = std::floor(u);
        const double tooth = 2.0 * (u - k) - 1.0;
        v[static_cast<size_t>(c)] = (static_cast<long>(k) % 2 == 0) ? tooth : -tooth;
      }
      hist.samples.push_back(std::move(v));
    }
    if (spec.kind == Kind::DDE) hist.x0 = hist.samples.back();
    return hist;
  };
  out.emplace_back("sawtooth", sawtooth(0));

  // modal history at the rightmost certified root, when one exists
  const RootInfo* best = nullptr;
  for (const auto& r : report.roots)
    if (!r.is_cluster && (!best || r.z.real() > best->z.real())) best = &r;
  if (best) {
    out.emplace_back("modal", build_modal_history(spec, best->z, h));
  } else {
    out.emplace_back("sawtooth2", sawtooth(1));
  }
  return out;
}

CriterionVerdict check_criterion(const SystemSpec& spec, const Window& window, double T, double h,
                                 const NormSpec& norm, unsigned seed, Exec exec) {
  ensure_valid(spec);
  if (spec.kind == Kind::DDE && norm.family == NormSpec::Family::Sup)
    throw std::invalid_argument("the sup (B-infinity) norm is offered for IDEs only; use linf for DDEs");

  CriterionVerdict out;
  out.norm = norm;
  out.spectrum = find_roots(spec, window);
  out.has_abscissa = out.spectrum.abscissa.has_value();
  out.windowed_abscissa = out.spectrum.abscissa.value_or(
      -std::numeric_limits<double>::infinity());

  const double fit_start = kFitStartWindows * spec.tau_star;
  std::ostringstream notes;
  notes << out.spectrum.truncation_note;

  const auto battery = battery_histories(spec, out.spectrum, h, seed);
  bool all_positive = true, any_negative = false;
  double worst_nu = std::numeric_limits<double>::infinity();
  double worst_c = 1.0;
  for (const auto& [id, hist] : battery) {
    const Trajectory traj = (spec.kind == Kind::IDE) ? simulate_ide(spec, hist, T, h, exec)
                                                     : simulate_dde(spec, hist, T, h, exec);
    const NormSeries series = norm_series(traj, norm, spec.tau_star, spec.kind == Kind::DDE);
    const DecayFit fit = (spec.kind == Kind::DDE) ? fit_decay_combined(series, fit_start, spec.tau_star)
                                                  : fit_decay(series, fit_start, spec.tau_star);
    out.per_history.push_back({id, fit.nu_hat, fit.c_hat});
    if (!(fit.nu_hat > 0.0)) all_positive = false;
    if (fit.nu_hat < 0.0) any_negative = true;
    worst_nu = std::min(worst_nu, fit.nu_hat);
    worst_c = std::max(worst_c, fit.c_hat);

    // margin checks of the criterion statements: for IDEs every nu below the
    // abscissa magnitude must come with a finite constant; for DDEs the rate
    // nu0 itself requires no margin
    if (out.has_abscissa && out.windowed_abscissa < -kMarginalTol) {
      const double nu0 = -out.windowed_abscissa;
      const auto weighted_sup = [&](double nu, const std::vector<double>& vals) {
        double c = 0.0;
        for (size_t i = 0; i < vals.size(); ++i)
          c = std::max(c, std::exp(nu * series.times[i]) * vals[i]);
        const double denom = spec.kind == Kind::DDE
                                 ? series.history_norm + series.pointwise.front()
                                 : series.history_norm;
        return denom > 0.0 ? c / denom : c;
      };
      if (spec.kind == Kind::IDE) {
        notes << "; " << id << ": C(nu)=";
        for (double fac : {0.5, 0.9}) {
          notes << " " << weighted_sup(fac * nu0, series.values) << " (nu=" << fac * nu0 << ")";
        }
      } else {
        std::vector<double> combined(series.values.size());
        for (size_t i = 0; i < combined.size(); ++i)
          combined[i] = series.values[i] + series.pointwise[i];
        notes << "; " << id << ": C(nu0=" << nu0 << ")=" << weighted_sup(nu0, combined);
      }
    }
  }
  out.fitted_decay_rate = worst_nu;
  out.fitted_constant = worst_c;

  if (out.has_abscissa && std::abs(out.windowed_abscissa) <= kMarginalTol) {
    out.verdict = Verdict::Marginal;
  } else if ((!out.has_abscissa || out.windowed_abscissa < -kMarginalTol) && all_positive) {
    out.verdict = Verdict::Stable;
  } else if (out.has_abscissa && out.windowed_abscissa > kMarginalTol && any_negative) {
    out.verdict = Verdict::Unstable;
  } else {
    out.verdict = Verdict::Inconsistent;
    notes << "; spectral abscissa and fitted decay rates disagree";
  }
  out.notes = notes.str();
  return out;
}

void write_norm_series_csv(const NormSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,norm\n";
  char buf[80];
  for (size_t i = 0; i < series.times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", series.times[i], series.values[i]);
    out << buf;
  }
}

}  // namespace delaystab
