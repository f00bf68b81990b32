#include "delaystab/cli.hpp"

#include "delaystab/charmat.hpp"
#include "delaystab/errors.hpp"
#include "delaystab/spectrum.hpp"
#include "delaystab/stability.hpp"
#include "delaystab/timedomain.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

namespace delaystab {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct RunConfig {
  std::string spec_path;
  std::vector<double> window_args;  // XMIN XMAX YMAX
  std::optional<double> horizon;
  std::optional<double> step;
  std::string norm;
  double tol = 1e-10;
  std::string out_dir = ".";
  std::string probe_kind = "levin";
  double beta = 1.0;
  double delta = 0.1;
  std::vector<double> z_args;  // RE IM for char-eval
  unsigned seed = kDefaultBatterySeed;
};

Window window_from(const RunConfig& cfg, const SystemSpec& spec) {
  if (cfg.window_args.empty()) return default_window(spec);
  Window w;
  w.x_min = cfg.window_args[0];
  w.x_max = cfg.window_args[1];
  w.y_min = 0.0;
  w.y_max = cfg.window_args[2];
  if (!(w.width() > 0.0) || !(w.height() > 0.0))
    throw std::invalid_argument("window must satisfy x_min < x_max and y_max > 0");
  return w;
}

double step_from(const RunConfig& cfg, const SystemSpec& spec) {
  if (cfg.step) {
    if (!(*cfg.step > 0.0)) throw std::invalid_argument("step must be positive");
    return *cfg.step;
  }
  // refine the coarsest commensurate step to at least 100 cells per tau*
  const double coarse = suggest_step(spec);
  const long m = std::lround(spec.tau_star / coarse);
  const long factor = (m >= 100) ? 1 : (100 + m - 1) / m;
  return spec.tau_star / static_cast<double>(m * factor);
}

double horizon_from(const RunConfig& cfg, const SystemSpec& spec,
                    const std::optional<double>& abscissa) {
  if (cfg.horizon) {
    if (!(*cfg.horizon >= spec.tau_star))
      throw std::invalid_argument("horizon must be at least tau_star");
    return *cfg.horizon;
  }
  double t = 10.0 * spec.tau_star;
  if (abscissa) t = std::max(t, 20.0 / std::max(std::abs(*abscissa), 1e-3));
  return std::min(t, 1e4 * spec.tau_star);
}

NormSpec norm_from(const RunConfig& cfg, const SystemSpec& spec) {
  if (!cfg.norm.empty()) return parse_norm(cfg.norm);
  return spec.kind == Kind::IDE ? NormSpec::sup()
                                : NormSpec::lp(std::numeric_limits<double>::infinity());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

SystemFile load_and_validate(const RunConfig& cfg) {
  SystemFile file = load_system(cfg.spec_path);
  const auto errs = validate(file.spec);
  if (!errs.empty()) {
    std::string msg = "spec validation failed:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  if (file.history) {
    const auto herrs = validate_history(file.spec, *file.history);
    if (!herrs.empty()) {
      std::string msg = "history validation failed:";
      for (const auto& e : herrs) msg += "\n  - " + e;
      throw std::invalid_argument(msg);
    }
  }
  return file;
}

int cmd_analyze(const RunConfig& cfg) {
  const SystemFile file = load_and_validate(cfg);
  const Window w = window_from(cfg, file.spec);
  const SpectrumReport report = find_roots(file.spec, w, cfg.tol);
  write_spectrum_csv(report, out_path(cfg, "spectrum.csv"));
  if (report.abscissa)
    std::cout << "abscissa=" << fmt17(*report.abscissa) << " windowed=true\n";
  else
    std::cout << "abscissa=none-in-window windowed=true\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  const SystemFile file = load_and_validate(cfg);
  if (!file.history) throw std::invalid_argument("simulate requires a history block in the spec file");
  const SystemSpec& spec = file.spec;
  const NormSpec norm = norm_from(cfg, spec);
  if (spec.kind == Kind::DDE && norm.family == NormSpec::Family::Sup)
    throw std::invalid_argument("the sup norm is offered for IDEs only; use --norm linf for DDEs");
  const double h = file.history->step;  // trajectory lives on the history grid
  if (cfg.step && std::abs(*cfg.step - h) > 1e-12)
    throw std::invalid_argument("--step must match the history step " + fmt17(h));
  const double T = horizon_from(cfg, spec, std::nullopt);

  const Trajectory traj = (spec.kind == Kind::IDE) ? simulate_ide(spec, *file.history, T, h)
                                                   : simulate_dde(spec, *file.history, T, h);
  write_trajectory_csv(traj, out_path(cfg, "trajectory.csv"));
  const NormSeries series = norm_series(traj, norm, spec.tau_star, spec.kind == Kind::DDE);
  write_norm_series_csv(series, out_path(cfg, "norms.csv"));
  const DecayFit fit = (spec.kind == Kind::DDE)
                           ? fit_decay_combined(series, kFitStartWindows * spec.tau_star, spec.tau_star)
                           : fit_decay(series, kFitStartWindows * spec.tau_star, spec.tau_star);
  std::cout << "nu_hat=" << fmt17(fit.nu_hat) << " C_hat=" << fmt17(fit.c_hat) << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const SystemFile file = load_and_validate(cfg);
  const SystemSpec& spec = file.spec;
  const Window w = window_from(cfg, spec);
  const double h = step_from(cfg, spec);
  const NormSpec norm = norm_from(cfg, spec);

  // size the horizon from a first spectral pass
  std::optional<double> abscissa_guess;
  {
    const auto [a, note] = spectral_abscissa(spec, w);
    (void)note;
    abscissa_guess = a;
  }
  const double T = horizon_from(cfg, spec, abscissa_guess);

  const CriterionVerdict verdict = check_criterion(spec, w, T, h, norm, cfg.seed);
  const std::string roots_csv = out_path(cfg, "spectrum.csv");
  write_spectrum_csv(verdict.spectrum, roots_csv);

  // per-history norm series for plotting
  const auto battery = battery_histories(spec, verdict.spectrum, h, cfg.seed);
  for (const auto& [id, hist] : battery) {
    const Trajectory traj = (spec.kind == Kind::IDE) ? simulate_ide(spec, hist, T, h)
                                                     : simulate_dde(spec, hist, T, h);
    const NormSeries series = norm_series(traj, norm, spec.tau_star, spec.kind == Kind::DDE);
    write_norm_series_csv(series, out_path(cfg, "norms_" + id + ".csv"));
  }

  nlohmann::ordered_json j;
  if (verdict.has_abscissa)
    j["windowed_abscissa"] = verdict.windowed_abscissa;
  else
    j["windowed_abscissa"] = "none-in-window";
  j["roots_csv_path"] = roots_csv;
  nlohmann::ordered_json hist_arr = nlohmann::ordered_json::array();
  for (const auto& hf : verdict.per_history) {
    nlohmann::ordered_json e;
    e["history_id"] = hf.history_id;
    e["norm_kind"] = norm_name(norm);
    e["nu_hat"] = hf.nu_hat;
    e["C_hat"] = hf.c_hat;
    hist_arr.push_back(std::move(e));
  }
  j["per_history"] = std::move(hist_arr);
  j["verdict"] = verdict_name(verdict.verdict);
  j["notes"] = verdict.notes;
  {
    std::ofstream out(out_path(cfg, "report.json"));
    if (!out) throw std::runtime_error("cannot write report.json");
    out << j.dump(2) << "\n";
  }

  std::cout << "verdict=" << verdict_name(verdict.verdict);
  if (verdict.has_abscissa) std::cout << " abscissa=" << fmt17(verdict.windowed_abscissa);
  std::cout << "\n";
  return verdict.verdict == Verdict::Inconsistent ? 4 : 0;
}

int cmd_probe(const RunConfig& cfg) {
  const SystemFile file = load_and_validate(cfg);
  const SystemSpec& spec = file.spec;
  if (cfg.probe_kind == "levin") {
    if (!(cfg.delta > 0.0) || cfg.delta >= cfg.beta)
      throw std::invalid_argument("levin probe requires 0 < delta < beta");
    std::ofstream out(out_path(cfg, "levin.csv"));
    out << "y_max,empirical_min\n";
    for (double y_max : {20.0, 40.0, 80.0}) {
      const LevinProbeResult r = levin_lower_bound_probe(spec, cfg.beta, cfg.delta, y_max, 0.05);
      out << fmt17(y_max) << "," << fmt17(r.empirical_min) << "\n";
      std::cout << "y_max=" << fmt17(y_max) << " empirical_min=" << fmt17(r.empirical_min) << "\n";
    }
    return 0;
  }
  if (cfg.probe_kind == "rl") {
    const std::vector<double> ys = {10.0, 100.0, 1000.0};
    const auto rows = riemann_lebesgue_probe(spec, cfg.beta, ys);
    std::ofstream out(out_path(cfg, "rl.csv"));
    out << "y,sup_x_absR\n";
    for (const auto& [y, v] : rows) {
      out << fmt17(y) << "," << fmt17(v) << "\n";
      std::cout << "y=" << fmt17(y) << " sup_x_absR=" << fmt17(v) << "\n";
    }
    return 0;
  }
  throw std::invalid_argument("unknown probe \"" + cfg.probe_kind + "\" (expected levin|rl)");
}

int cmd_char_eval(const RunConfig& cfg) {
  const SystemFile file = load_and_validate(cfg);
  if (cfg.z_args.size() != 2) throw std::invalid_argument("char-eval requires --z RE IM");
  const cplx z(cfg.z_args[0], cfg.z_args[1]);
  const CharValue cv = eval_char(file.spec, z);
  std::cout << "z=(" << fmt17(z.real()) << "," << fmt17(z.imag()) << ") det=("
            << fmt17(cv.det.real()) << "," << fmt17(cv.det.imag())
            << ") abs_det=" << fmt17(std::abs(cv.det)) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"delaystab: exponential stability of integral and delay difference equations"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("spec", cfg.spec_path, "system spec JSON file")->required();
    sub->add_option("--window", cfg.window_args, "search window XMIN XMAX YMAX")->expected(3);
    sub->add_option("--horizon", cfg.horizon, "simulation horizon T");
    sub->add_option("--step", cfg.step, "grid step h");
    sub->add_option("--norm", cfg.norm, "state-space norm: l1|l2|linf|sup|bv");
    sub->add_option("--tol", cfg.tol, "root residual tolerance");
    sub->add_option("--out", cfg.out_dir, "output directory");
    return sub;
  };
  CLI::App* analyze = add_common(app.add_subcommand("analyze", "locate characteristic roots"));
  CLI::App* simulate = add_common(app.add_subcommand("simulate", "march a trajectory and fit its decay"));
  CLI::App* verify = add_common(app.add_subcommand("verify", "full criterion: spectrum vs measured decay"));
  CLI::App* probe = add_common(app.add_subcommand("probe", "numerical probes of the determinant tails"));
  probe->add_option("--probe", cfg.probe_kind, "levin|rl");
  probe->add_option("--beta", cfg.beta, "strip half-width");
  probe->add_option("--delta", cfg.delta, "root exclusion radius (levin)");
  CLI::App* chareval = add_common(app.add_subcommand("char-eval", "print det Delta(z)"));
  chareval->add_option("--z", cfg.z_args, "evaluation point RE IM")->expected(2);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (probe->parsed()) return cmd_probe(cfg);
    if (chareval->parsed()) return cmd_char_eval(cfg);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}

}  // namespace delaystab
