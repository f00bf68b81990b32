#include "delaystab/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace delaystab {

namespace {

bool near_integer(double x, long* out) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) {
    if (out) *out = static_cast<long>(r);
    return true;
  }
  return false;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

long Trajectory::index_of(double t) const {
  long i = -1;
  if (!near_integer((t - start) / step, &i))
    throw std::invalid_argument("time " + fmt(t) + " is not on the trajectory grid");
  if (i < 0 || static_cast<size_t>(i) >= values.size())
    throw std::out_of_range("time " + fmt(t) + " outside the trajectory range");
  return i;
}

std::vector<std::string> validate(const SystemSpec& spec) {
  std::vector<std::string> errs;
  const int n = spec.dimension;
  if (n <= 0) errs.push_back("dimension must be a positive integer");
  if (!(spec.tau_star > 0.0)) errs.push_back("tau_star must be positive");

  double prev = 0.0;
  for (size_t k = 0; k < spec.delay_terms.size(); ++k) {
    const auto& d = spec.delay_terms[k];
    if (!(d.tau > 0.0) || d.tau > spec.tau_star + 1e-12 * spec.tau_star)
      errs.push_back("delay tau=" + fmt(d.tau) + " outside (0, tau_star]");
    if (k > 0 && !(d.tau > prev)) {
      errs.push_back("delays not strictly increasing at index " + std::to_string(k));
    }
    prev = d.tau;
    if (d.coefficient.rows() != n || d.coefficient.cols() != n)
      errs.push_back("delay matrix at tau=" + fmt(d.tau) + " has wrong dimension");
  }

  const auto& pieces = spec.kernel.pieces;
  for (size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (!(p.lower < p.upper))
      errs.push_back("kernel piece " + std::to_string(i) + " has empty interval");
    if (p.coefficients.empty())
      errs.push_back("kernel piece " + std::to_string(i) + " has no coefficients");
    if (static_cast<int>(p.coefficients.size()) > kMaxKernelDegree + 1)
      errs.push_back("kernel piece " + std::to_string(i) + " exceeds degree " + std::to_string(kMaxKernelDegree));
    for (const auto& c : p.coefficients)
      if (c.rows() != n || c.cols() != n)
        errs.push_back("kernel coefficient in piece " + std::to_string(i) + " has wrong dimension");
  }
  if (!pieces.empty()) {
    const double tol = 1e-12 * std::max(1.0, spec.tau_star);
    if (std::abs(pieces.front().lower) > tol)
      errs.push_back("kernel gap at [0," + fmt(pieces.front().lower) + ")");
    for (size_t i = 0; i + 1 < pieces.size(); ++i) {
      const double b = pieces[i].upper, a = pieces[i + 1].lower;
      if (a > b + tol)
        errs.push_back("kernel gap at [" + fmt(b) + "," + fmt(a) + ")");
      else if (a < b - tol)
        errs.push_back("kernel overlap at [" + fmt(a) + "," + fmt(b) + ")");
    }
    if (std::abs(pieces.back().upper - spec.tau_star) > tol)
      errs.push_back("kernel does not reach tau_star: ends at " + fmt(pieces.back().upper));
  }
  return errs;
}

void ensure_valid(const SystemSpec& spec) {
  const auto errs = validate(spec);
  if (errs.empty()) return;
  std::string msg = "invalid system spec:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw std::invalid_argument(msg);
}

long grid_index(double x, double h) {
  long i = -1;
  if (!near_integer(x / h, &i)) return -1;
  return i;
}

double suggest_step(const SystemSpec& spec) {
  for (long m = 1; m <= 1000000; ++m) {
    const double h = spec.tau_star / static_cast<double>(m);
    bool ok = true;
    for (const auto& d : spec.delay_terms)
      if (grid_index(d.tau, h) < 0) { ok = false; break; }
    if (ok) return h;
  }
  throw std::invalid_argument("delays are not commensurate with tau_star; no grid step found");
}

namespace {

// Exact integral of the kernel polynomial over [a, b] within a single piece.
RMat piece_integral(const KernelPiece& p, double a, double b, int n) {
  RMat acc(n, n);
  double pa = a, pb = b;  // a^{m+1}, b^{m+1}
  for (size_t m = 0; m < p.coefficients.size(); ++m) {
    acc += p.coefficients[m] * ((pb - pa) / double(m + 1));
    pa *= a;
    pb *= b;
  }
  return acc;
}

}  // namespace

GridMeasure discretize_measure(const SystemSpec& spec, double h) {
  ensure_valid(spec);
  const long cells = grid_index(spec.tau_star, h);
  if (cells < 1)
    throw std::invalid_argument("tau_star/h is not an integer; adjust h (suggested h = " +
                                std::to_string(suggest_step(spec)) + ")");
  const int n = spec.dimension;

  GridMeasure mu;
  mu.step = h;
  mu.entries.assign(static_cast<size_t>(cells) + 1, RMat::zero(n));

  for (const auto& d : spec.delay_terms) {
    const long j = grid_index(d.tau, h);
    if (j < 0)
      throw std::invalid_argument("delay tau=" + std::to_string(d.tau) +
                                  " is not a multiple of h=" + std::to_string(h) +
                                  " (suggested h = " + std::to_string(suggest_step(spec)) + ")");
    mu.entries[static_cast<size_t>(j)] += d.coefficient;
  }

  for (const auto& p : spec.kernel.pieces) {
    // split the piece across the cells it overlaps
    long j0 = static_cast<long>(std::floor(p.lower / h + 1e-12));
    for (long j = j0; j < cells; ++j) {
      const double c0 = std::max(p.lower, h * static_cast<double>(j));
      const double c1 = std::min(p.upper, h * static_cast<double>(j + 1));
      if (c1 <= c0) {
        if (c0 >= p.upper) break;
        continue;
      }
      mu.entries[static_cast<size_t>(j)] += piece_integral(p, c0, c1, n);
    }
  }
  return mu;
}

RMat kernel_value(const SystemSpec& spec, double s) {
  if (s < 0.0 || s > spec.tau_star)
    throw std::domain_error("kernel argument s=" + fmt(s) + " outside [0, tau_star]");
  const int n = spec.dimension;
  if (spec.kernel.empty()) return RMat::zero(n);
  const auto& pieces = spec.kernel.pieces;
  const KernelPiece* owner = nullptr;
  for (const auto& p : pieces)
    if (s >= p.lower && s < p.upper) { owner = &p; break; }
  if (!owner) owner = &pieces.back();  // s == tau_star: closed right endpoint
  RMat v(n, n);
  double pw = 1.0;
  for (const auto& c : owner->coefficients) {
    v += c * pw;
    pw *= s;
  }
  return v;
}

double measure_total_mass(const GridMeasure& mu) {
  double s = 0.0;
  for (const auto& m : mu.entries) s += spectral_norm(m);
  return s;
}

double atoms_total_mass(const SystemSpec& spec) {
  double s = 0.0;
  for (const auto& d : spec.delay_terms) s += spectral_norm(d.coefficient);
  return s;
}

double kernel_abs_mass(const SystemSpec& spec) {
  // |N(s)| is piecewise smooth; composite Simpson per piece is plenty here.
  double total = 0.0;
  for (const auto& p : spec.kernel.pieces) {
    const int cells = 128;
    const double w = (p.upper - p.lower) / cells;
    double acc = 0.0;
    auto absval = [&](double s) { return spectral_norm(kernel_value(spec, std::min(s, spec.tau_star))); };
    for (int i = 0; i < cells; ++i) {
      const double a = p.lower + i * w;
      acc += (w / 6.0) * (absval(a) + 4.0 * absval(a + 0.5 * w) + absval(a + w));
    }
    total += acc;
  }
  return total;
}

std::vector<std::string> validate_history(const SystemSpec& spec, const HistoryFunction& h) {
  std::vector<std::string> errs;
  if (!(h.step > 0.0)) {
    errs.push_back("history step must be positive");
    return errs;
  }
  const long cells = grid_index(spec.tau_star, h.step);
  if (cells < 1) {
    errs.push_back("tau_star is not an integer multiple of the history step");
  } else if (h.samples.size() != static_cast<size_t>(cells) + 1) {
    errs.push_back("history has " + std::to_string(h.samples.size()) + " samples, expected " +
                   std::to_string(cells + 1) + " covering [-tau_star, 0]");
  }
  for (const auto& v : h.samples)
    if (static_cast<int>(v.size()) != spec.dimension) {
      errs.push_back("history sample dimension mismatch");
      break;
    }
  if (spec.kind == Kind::DDE) {
    if (!h.x0)
      errs.push_back("DDE requires x0");
    else if (static_cast<int>(h.x0->size()) != spec.dimension)
      errs.push_back("x0 dimension mismatch");
  } else if (h.x0) {
    errs.push_back("x0 is only meaningful for DDE specs");
  }
  return errs;
}

}  // namespace delaystab
