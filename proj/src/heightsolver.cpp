#include "dsar/heightsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsar/errors.hpp"
#include "dsar/parallel.hpp"

namespace dsar {

namespace {

// A map whose median sits at rounding level (natural units) carries no
// information, e.g. the Doppler cone on a fixed-y plane through s0.
constexpr double kInformativeFloor = 1e-9;

std::vector<double> axis_values(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

void check_axis(double lo, double hi, double step, const char* name) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step))
    throw ValidationError(std::string("search ") + name + " axis must be finite");
  if (!(step > 0.0)) throw ValidationError(std::string("search ") + name + " step must be positive");
  if (!(hi >= lo)) throw ValidationError(std::string("search ") + name + " interval is empty");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

ResidualMap make_map(const SearchGrid& grid, std::string name, std::string unit) {
  ResidualMap m;
  m.name = std::move(name);
  m.unit = std::move(unit);
  m.ny = grid.ys().size();
  m.nh = grid.hs().size();
  m.nx = grid.xs().size();
  m.values.assign(m.ny * m.nh * m.nx, 0.0);
  return m;
}

// Evaluates fn(z) -> three residuals at every grid point.
template <class Fn>
ResidualSet fill(const SearchGrid& grid, std::array<const char*, 3> names,
                 std::array<const char*, 3> units, Fn&& fn) {
  grid.validate();
  ResidualSet set;
  for (int i = 0; i < 3; ++i) set.maps[i] = make_map(grid, names[i], units[i]);
  const auto xs = grid.xs(), hs = grid.hs(), ys = grid.ys();
  const std::size_t nx = xs.size(), nh = hs.size();
  parallel_for(ys.size() * nh, [&](std::size_t yh) {
    const std::size_t iy = yh / nh, ih = yh % nh;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const auto r = fn(Vec3{xs[ix], ys[iy], hs[ih]});
      const std::size_t idx = (iy * nh + ih) * nx + ix;
      for (int i = 0; i < 3; ++i) set.maps[i].values[idx] = std::abs(r[i]);
    }
  });
  set.combined = make_map(grid, "combined", "1");
  for (int i = 0; i < 3; ++i) {
    set.medians[i] = median(set.maps[i].values);
    set.informative[i] = std::isfinite(set.medians[i]) && set.medians[i] > kInformativeFloor;
    if (!set.informative[i]) continue;
    const double inv = 1.0 / set.medians[i];
    for (std::size_t k = 0; k < set.combined.values.size(); ++k)
      set.combined.values[k] += set.maps[i].values[k] * inv;
  }
  return set;
}

std::vector<Vec3> local_minima(const ResidualMap& m, const SearchGrid& grid, std::size_t limit) {
  const auto xs = grid.xs(), hs = grid.hs(), ys = grid.ys();
  std::vector<std::pair<double, Vec3>> found;
  for (std::size_t iy = 0; iy < m.ny; ++iy) {
    for (std::size_t ih = 0; ih < m.nh; ++ih) {
      for (std::size_t ix = 0; ix < m.nx; ++ix) {
        const double v = m.at(iy, ih, ix);
        bool minimum = true;
        auto probe = [&](long dy, long dh, long dx) {
          const long y = static_cast<long>(iy) + dy, h = static_cast<long>(ih) + dh,
                     x = static_cast<long>(ix) + dx;
          if (y < 0 || h < 0 || x < 0 || y >= static_cast<long>(m.ny) ||
              h >= static_cast<long>(m.nh) || x >= static_cast<long>(m.nx))
            return;
          if (m.at(static_cast<std::size_t>(y), static_cast<std::size_t>(h),
                   static_cast<std::size_t>(x)) < v)
            minimum = false;
        };
        probe(0, -1, 0), probe(0, 1, 0), probe(0, 0, -1), probe(0, 0, 1);
        probe(-1, 0, 0), probe(1, 0, 0);
        if (minimum) found.push_back({v, Vec3{xs[ix], ys[iy], hs[ih]}});
      }
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < found.size() && i < limit; ++i) out.push_back(found[i].second);
  return out;
}

}  // namespace

std::string to_string(PhaseSurface s) { return s == PhaseSurface::Exact ? "exact" : "linearized"; }

void SearchGrid::validate() const {
  check_axis(x_min, x_max, x_step, "x");
  check_axis(h_min, h_max, h_step, "height");
  if (full_3d) {
    check_axis(y_min, y_max, y_step, "y");
  } else if (!std::isfinite(fixed_y)) {
    throw ValidationError("search fixed y must be finite");
  }
}

std::vector<double> SearchGrid::xs() const { return axis_values(x_min, x_max, x_step); }
std::vector<double> SearchGrid::hs() const { return axis_values(h_min, h_max, h_step); }
std::vector<double> SearchGrid::ys() const {
  return full_3d ? axis_values(y_min, y_max, y_step) : std::vector<double>{fixed_y};
}
std::size_t SearchGrid::size() const { return xs().size() * hs().size() * ys().size(); }

// ----------------------------------------------------------- measurements

WBMeasurement measure_wb_truth(const Vec3& x, const WbGeometry& geom) {
  WBMeasurement m;
  m.s01 = zero_doppler_time(geom.traj1, x);
  m.s02 = zero_doppler_time(geom.traj2, x);
  m.R1 = range(geom.traj1, m.s01, x);
  m.doppler1 = look_dot_velocity(geom.traj1, m.s01, x);
  const double phi = wb_phase_model(x, geom.traj1, m.s01, geom.traj2, m.s02, geom.omega0, geom.consts);
  m.phi = resolve_ambiguity(wrap_phase(phi), phi, Modality::Wideband);
  m.phi.unwrapped = phi;
  return m;
}

UNBMeasurement measure_unb_truth(const Vec3& x, const UnbGeometry& geom) {
  UNBMeasurement m;
  m.s_d1 = zero_doppler_rate_time(geom.traj1, x);
  m.s_d2 = zero_doppler_rate_time(geom.traj2, x);
  m.f1 = doppler(geom.traj1, m.s_d1, x, geom.omega0, geom.consts);
  m.f1_rate = doppler_rate(geom.traj1, m.s_d1, x, geom.omega0, geom.consts);
  const double phi = unb_phase_model(x, geom.traj1, m.s_d1, geom.traj2, m.s_d2, geom.omega0,
                                     geom.t_phi, geom.consts);
  m.phi = resolve_ambiguity(wrap_phase(phi), phi, Modality::UNB);
  m.phi.unwrapped = phi;
  return m;
}

WbImageMeasurement measure_wb(const ComplexImage& img1, const ComplexImage& img2,
                              const PointEvaluator& eval1, const PointEvaluator& eval2,
                              const WbGeometry& geom) {
  WbImageMeasurement out;
  const auto pair = coregister(img1, img2);
  out.offset = pair.offset;
  out.peak1 = find_peak(img1);
  out.peak2 = find_peak(img2);
  out.pixel_phase = std::arg(out.peak1.value * std::conj(out.peak2.value));
  out.refined1 = refine_peak(eval1, out.peak1, img1.grid.spacing);
  out.refined2 = refine_peak(eval2, out.peak2, img2.grid.spacing);

  const double k = 2.0 * geom.omega0 / geom.consts.c;
  auto& m = out.meas;
  m.s01 = zero_doppler_time(geom.traj1, out.refined1);
  m.s02 = zero_doppler_time(geom.traj2, out.refined2);
  const double r1 = range(geom.traj1, m.s01, out.refined1);
  const double r2 = range(geom.traj2, m.s02, out.refined2);
  const cdouble v1 = eval1(out.refined1);
  const cdouble v2 = eval2(out.refined2);
  // Range to within a fraction of a wavelength from the image phase.
  m.R1 = r1 + wrap_phase(std::arg(v1) - k * r1) / k;
  m.doppler1 = look_dot_velocity(geom.traj1, m.s01, out.refined1);
  out.predicted_phase = k * (r1 - r2);
  m.phi = resolve_ambiguity(std::arg(v1 * std::conj(v2)), out.predicted_phase, Modality::Wideband);
  return out;
}

UnbImageMeasurement measure_unb(const ComplexImage& img1, const ComplexImage& img2,
                                const PointEvaluator& eval1, const PointEvaluator& eval2,
                                const UnbGeometry& geom) {
  UnbImageMeasurement out;
  out.peak1 = find_peak(img1);
  out.peak2 = find_peak(img2);
  auto& m = out.meas;
  m.s_d1 = zero_doppler_rate_time(geom.traj1, out.peak1.position);
  m.s_d2 = zero_doppler_rate_time(geom.traj2, out.peak2.position);
  if (m.s_d2 == 0.0) throw DomainError("zero-Doppler-rate time of image 2 is zero");
  out.equalization_ratio = m.s_d1 / m.s_d2;
  const auto eq2 = equalize_doppler_rate_factor(img2, m.s_d2, m.s_d1);
  out.offset = coregister(img1, eq2).offset;
  auto equalize = [&](cdouble v) { return std::polar(std::abs(v), out.equalization_ratio * std::arg(v)); };
  out.pixel_phase = std::arg(out.peak1.value * std::conj(equalize(out.peak2.value)));

  out.refined1 = refine_peak(eval1, out.peak1, img1.grid.spacing);
  out.refined2 = refine_peak(eval2, out.peak2, img2.grid.spacing);
  const double scale = 2.0 * m.s_d1 * geom.t_phi;
  const double f1_pred = doppler(geom.traj1, m.s_d1, out.refined1, geom.omega0, geom.consts);
  const double f2_pred = doppler(geom.traj2, m.s_d2, out.refined2, geom.omega0, geom.consts);
  const cdouble v1 = eval1(out.refined1);
  const cdouble v2 = equalize(eval2(out.refined2));
  const auto f1_phase = resolve_ambiguity(std::arg(v1), scale * f1_pred, Modality::UNB);
  m.f1 = f1_phase.unwrapped / scale;
  m.f1_rate = doppler_rate(geom.traj1, m.s_d1, out.refined1, geom.omega0, geom.consts);
  out.predicted_phase = scale * (f1_pred - f2_pred);
  m.phi = resolve_ambiguity(std::arg(v1 * std::conj(v2)), out.predicted_phase, Modality::UNB);
  return out;
}

// -------------------------------------------------------------- residuals

ResidualSet residuals_wb(const WBMeasurement& meas, const WbGeometry& geom, const SearchGrid& grid,
                         PhaseSurface surface) {
  const Vec3 g1 = geom.traj1.position(meas.s01);
  const Vec3 g2 = geom.traj2.position(meas.s02);
  const Vec3 v1 = geom.traj1.velocity(meas.s01);
  const Vec3 b = g2 - g1;
  const double half_wave = geom.consts.c / (2.0 * geom.omega0);
  const bool wrapped = !meas.phi.resolved;
  auto set = fill(grid, {"range", "doppler", "phase"}, {"m", "m/s", "m"}, [&](const Vec3& z) {
    const Vec3 d1 = z - g1;
    const double r1 = norm(d1);
    const Vec3 look = d1 / r1;
    std::array<double, 3> r{};
    r[0] = r1 - meas.R1;
    r[1] = dot(look, v1) - meas.doppler1;
    const double diff = surface == PhaseSurface::Exact ? r1 - norm(z - g2) : dot(look, b);
    r[2] = wrapped ? wrap_phase((diff - half_wave * meas.phi.wrapped) / half_wave) * half_wave
                   : diff - half_wave * meas.phi.unwrapped;
    return r;
  });
  set.wrapped_phase = wrapped;
  return set;
}

ResidualSet residuals_unb(const UNBMeasurement& meas, const UnbGeometry& geom,
                          const SearchGrid& grid, PhaseSurface surface) {
  const Vec3 g1 = geom.traj1.position(meas.s_d1);
  const Vec3 g2 = geom.traj2.position(meas.s_d2);
  const Vec3 v1 = geom.traj1.velocity(meas.s_d1);
  const Vec3 v2 = geom.traj2.velocity(meas.s_d2);
  const Vec3 a1 = geom.traj1.acceleration(meas.s_d1);
  const Vec3 b = g2 - g1;
  const Vec3 v = v2 - v1;
  const double to_speed = geom.consts.c / geom.omega0;
  const double k = geom.consts.c / (2.0 * meas.s_d1 * geom.t_phi * geom.omega0);
  const bool wrapped = !meas.phi.resolved;
  auto set = fill(grid, {"doppler", "doppler_rate", "phase"}, {"m/s", "m/s^2", "m/s"},
                  [&](const Vec3& z) {
                    const Vec3 d1 = z - g1;
                    const double r1 = norm(d1);
                    const Vec3 l1 = d1 / r1;
                    const Vec3 v1_perp = v1 - l1 * dot(l1, v1);
                    std::array<double, 3> r{};
                    r[0] = dot(l1, v1) + to_speed * meas.f1;
                    r[1] = dot(l1, a1) - dot(v1, v1_perp) / r1 + to_speed * meas.f1_rate;
                    double lhs, target;
                    if (surface == PhaseSurface::Exact) {
                      const Vec3 d2 = z - g2;
                      lhs = dot(l1, v1) - dot(d2, v2) / norm(d2);
                      target = -k * (wrapped ? meas.phi.wrapped : meas.phi.unwrapped);
                    } else {
                      const Vec3 b_perp = b - l1 * dot(l1, b);
                      lhs = dot(l1, v) - dot(b_perp, v2) / r1;
                      target = k * (wrapped ? meas.phi.wrapped : meas.phi.unwrapped);
                    }
                    r[2] = wrapped ? wrap_phase((lhs - target) / k) * k : lhs - target;
                    return r;
                  });
  set.wrapped_phase = wrapped;
  return set;
}

Solution pick_solution(const ResidualSet& set, const SearchGrid& grid) {
  const auto& c = set.combined;
  if (c.values.empty()) throw ValidationError("search grid is empty");
  const auto xs = grid.xs(), hs = grid.hs(), ys = grid.ys();
  double best = std::numeric_limits<double>::infinity();
  std::size_t by = 0, bh = 0, bx = 0;
  bool found = false;
  for (std::size_t ih = 0; ih < c.nh; ++ih)
    for (std::size_t iy = 0; iy < c.ny; ++iy)
      for (std::size_t ix = 0; ix < c.nx; ++ix) {
        const double v = c.at(iy, ih, ix);
        if (v < best) {
          best = v;
          by = iy, bh = ih, bx = ix;
          found = true;
        }
      }
  if (!found) throw NotFoundError("combined residual has no finite minimum");
  Solution s;
  s.position = {xs[bx], ys[by], hs[bh]};
  s.combined = best;
  for (int i = 0; i < 3; ++i) {
    s.residuals[i] = set.maps[i].at(by, bh, bx);
    s.names[i] = set.maps[i].name;
    s.informative[i] = set.informative[i];
  }
  s.degenerate = !set.informative[2];
  s.wrapped_fallback = set.wrapped_phase;
  if (s.wrapped_fallback) s.candidates = local_minima(c, grid, 10);
  return s;
}

Solution solve_wb(const WBMeasurement& meas, const WbGeometry& geom, const SearchGrid& grid,
                  PhaseSurface surface) {
  return pick_solution(residuals_wb(meas, geom, grid, surface), grid);
}

Solution solve_unb(const UNBMeasurement& meas, const UnbGeometry& geom, const SearchGrid& grid,
                   PhaseSurface surface) {
  return pick_solution(residuals_unb(meas, geom, grid, surface), grid);
}

}  // namespace dsar
