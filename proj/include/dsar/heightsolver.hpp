#pragma once

// Height recovery by grid search over the three measurement surfaces.
//
// Wideband, with gamma_i at their zero-Doppler times:
//   range:  |z - gamma_1| = R1
//   dopp:   L1(z) . gamma_1' = doppler1
//   phase:  |z - gamma_1| - |z - gamma_2| = (c / 2 omega0) Phi        (exact)
//           L1(z) . b                     = (c / 2 omega0) Phi        (linearized)
//
// UNB, at the zero-Doppler-rate times, k = c / (2 s_d1 T omega0):
//   dopp:   L1(z) . gamma_1' = -(c / omega0) f1
//   rate:   L1 . gamma_1'' - gamma_1' . gamma_1'_perp / R1 = -(c / omega0) f1_rate
//   phase:  L1 . gamma_1' - L2 . gamma_2'       = -k Phi               (exact)
//           L1 . v - b_perp . gamma_2' / R1     =  k Phi               (linearized)
// Residuals are absolute differences of the two sides.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsar/geometry.hpp"
#include "dsar/imaging.hpp"
#include "dsar/interferometry.hpp"

namespace dsar {

enum class PhaseSurface { Exact, Linearized };

std::string to_string(PhaseSurface s);

struct WbGeometry {
  Trajectory traj1;
  Trajectory traj2;
  double omega0 = 0.0;
  PhysicalConstants consts{};
};

struct UnbGeometry {
  Trajectory traj1;
  Trajectory traj2;
  double omega0 = 0.0;
  double t_phi = 0.0;
  PhysicalConstants consts{};
};

struct WBMeasurement {
  double R1 = 0.0;        // [m]
  double doppler1 = 0.0;  // L . gamma_1' at s01 [m/s]
  PhaseMeasurement phi;
  double s01 = 0.0;
  double s02 = 0.0;
};

struct UNBMeasurement {
  double f1 = 0.0;       // [rad/s]
  double f1_rate = 0.0;  // [rad/s^2]
  PhaseMeasurement phi;
  double s_d1 = 0.0;
  double s_d2 = 0.0;
};

/// Fixed-y plane by default; full_3d also scans y.
struct SearchGrid {
  double x_min = -64.0;
  double x_max = 63.0;
  double x_step = 1.0;
  double h_min = 1.0;
  double h_max = 100.0;
  double h_step = 0.5;
  double fixed_y = 0.0;
  bool full_3d = false;
  double y_min = -64.0;
  double y_max = 63.0;
  double y_step = 1.0;

  void validate() const;
  std::vector<double> xs() const;
  std::vector<double> hs() const;
  std::vector<double> ys() const;  // {fixed_y} unless full_3d
  std::size_t size() const;
};

/// Values laid out [y][h][x], x fastest.
struct ResidualMap {
  std::string name;
  std::string unit;
  std::size_t ny = 0, nh = 0, nx = 0;
  std::vector<double> values;

  double at(std::size_t iy, std::size_t ih, std::size_t ix) const {
    return values[(iy * nh + ih) * nx + ix];
  }
};

struct ResidualSet {
  std::array<ResidualMap, 3> maps;
  ResidualMap combined;
  std::array<double, 3> medians{};
  std::array<bool, 3> informative{};
  bool wrapped_phase = false;  // phase residual taken modulo 2 pi
};

struct Solution {
  Vec3 position{};
  double combined = 0.0;
  std::array<double, 3> residuals{};
  std::array<std::string, 3> names;
  std::array<bool, 3> informative{};
  bool degenerate = false;  // interferometric residual carries no information
  bool wrapped_fallback = false;
  std::vector<Vec3> candidates;  // local minima, best first (fallback only)
};

// ----------------------------------------------------------- measurements

WBMeasurement measure_wb_truth(const Vec3& x, const WbGeometry& geom);
UNBMeasurement measure_unb_truth(const Vec3& x, const UnbGeometry& geom);

struct WbImageMeasurement {
  WBMeasurement meas;
  Peak peak1, peak2;
  RegistrationOffset offset;
  Vec3 refined1{}, refined2{};
  double predicted_phase = 0.0;
  double pixel_phase = 0.0;  // wrapped interferogram phase at the co-registered peak
};

struct UnbImageMeasurement {
  UNBMeasurement meas;
  Peak peak1, peak2;
  RegistrationOffset offset;
  Vec3 refined1{}, refined2{};
  double predicted_phase = 0.0;
  double pixel_phase = 0.0;
  double equalization_ratio = 1.0;
};

using PointEvaluator = std::function<cdouble(const Vec3&)>;

/// Peaks, registration and the phase at the peak, with off-grid peak
/// refinement through direct image evaluations.
WbImageMeasurement measure_wb(const ComplexImage& img1, const ComplexImage& img2,
                              const PointEvaluator& eval1, const PointEvaluator& eval2,
                              const WbGeometry& geom);

/// Image 2 is equalized to s_d1 before the interferogram is formed.
UnbImageMeasurement measure_unb(const ComplexImage& img1, const ComplexImage& img2,
                                const PointEvaluator& eval1, const PointEvaluator& eval2,
                                const UnbGeometry& geom);

// -------------------------------------------------------------- residuals

ResidualSet residuals_wb(const WBMeasurement& meas, const WbGeometry& geom, const SearchGrid& grid,
                         PhaseSurface surface = PhaseSurface::Exact);
ResidualSet residuals_unb(const UNBMeasurement& meas, const UnbGeometry& geom,
                          const SearchGrid& grid, PhaseSurface surface = PhaseSurface::Exact);

/// Argmin of the combined map; ties go to the lowest height, then lowest y,
/// then lowest x.
Solution pick_solution(const ResidualSet& set, const SearchGrid& grid);

Solution solve_wb(const WBMeasurement& meas, const WbGeometry& geom, const SearchGrid& grid,
                  PhaseSurface surface = PhaseSurface::Exact);
Solution solve_unb(const UNBMeasurement& meas, const UnbGeometry& geom, const SearchGrid& grid,
                   PhaseSurface surface = PhaseSurface::Exact);

}  // namespace dsar
