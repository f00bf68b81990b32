#pragma once

#include "delaystab/charmat.hpp"
#include "delaystab/errors.hpp"
#include "delaystab/kernels.hpp"
#include "delaystab/system_model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace delaystab {

struct Window {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  cplx center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool contains(cplx z, double slack = 0.0) const {
    return z.real() >= x_min - slack && z.real() <= x_max + slack && z.imag() >= y_min - slack &&
           z.imag() <= y_max + slack;
  }
};

struct RootFindingParams {
  double cluster_size = 1e-6;
  double root_residual_tol = 1e-10;
  double boundary_tol = 1e-12;
  int newton_max_iter = 100;
  long max_boundary_samples = 20000;
  int max_dilations = 5;
};

struct RootInfo {
  cplx z;
  double residual = 0.0;
  int cluster_count = 1;
  bool is_cluster = false;  // multi-winding box at minimum size, or Newton gave up
};

struct SpectrumReport {
  Window window;
  std::vector<RootInfo> roots;   // sorted by (Re, Im) ascending
  long total_winding = 0;
  std::optional<double> abscissa;  // empty means none-in-window
  std::string truncation_note;
};

/// Argument-principle winding of det Delta around the box boundary, by
/// adaptive phase tracking (refine until consecutive increments stay under
/// pi/2). Throws RootNearBoundaryError when |det| dips below boundary_tol on
/// a sample, NumericalError past the sample cap.
long winding_number(const SystemSpec& spec, const Window& box, double boundary_tol);

/// Certified root localization: recursive quadrisection with winding
/// conservation at every split, Newton refinement inside winding-1 boxes.
SpectrumReport find_roots(const SystemSpec& spec, const Window& window, double tol = 1e-10,
                          const RootFindingParams& params = {});

/// Max real part over the found roots plus the truncation note (strip above
/// the window is unexplored; the Riemann-Lebesgue probe supplies the tail
/// evidence when a kernel is present).
std::pair<std::optional<double>, std::string> spectral_abscissa(const SystemSpec& spec,
                                                                const Window& window);

struct LevinProbeResult {
  double empirical_min = 0.0;
  cplx argmin;
};

/// Samples |det Delta| over the strip {|Re z| <= beta - delta, 0 <= Im z <=
/// y_max} minus delta-disks around every root found there (and conjugates);
/// the strictly positive minimum is the empirical version of the lower-bound
/// lemma for the characteristic determinant.
LevinProbeResult levin_lower_bound_probe(const SystemSpec& spec, double beta, double delta,
                                         double y_max, double grid_step,
                                         Exec exec = Exec::Parallel);

/// For each y, maximizes |R(x+iy)| over x in [-beta, beta] (grid step
/// beta/100 with two local refinement rounds). The values decay to zero as
/// |y| grows when the kernel is integrable.
std::vector<std::pair<double, double>> riemann_lebesgue_probe(const SystemSpec& spec, double beta,
                                                              const std::vector<double>& y_list,
                                                              Exec exec = Exec::Parallel);

/// Default search window: x in [-2*guess, 1] with guess derived from the
/// total measure mass and the first delay, y in [0, max(20, 10*2pi/tau_1)].
Window default_window(const SystemSpec& spec);

void write_spectrum_csv(const SpectrumReport& report, const std::string& path);

}  // namespace delaystab
