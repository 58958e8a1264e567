#include "dsar/interferometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dsar/errors.hpp"
#include "dsar/parallel.hpp"

namespace dsar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_far_field(const Vec3& l, double r, std::vector<std::string>* warnings) {
  if (norm(l) < r / 100.0 || warnings == nullptr) return;
  std::ostringstream msg;
  msg << "offset |l| = " << norm(l) << " m is not small against the range " << r
      << " m; linear flattening is inaccurate";
  warnings->push_back(msg.str());
}

}  // namespace

double wrap_phase(double phase) {
  double w = std::remainder(phase, kTwoPi);  // [-pi, pi]
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

CoregisteredPair coregister(const ComplexImage& i1, const ComplexImage& i2) {
  if (!(i1.grid == i2.grid) || i1.pixels.rows() != i2.pixels.rows() ||
      i1.pixels.cols() != i2.pixels.cols())
    throw ContractError("images must share a grid to be co-registered");
  const Peak p1 = find_peak(i1);
  const Peak p2 = find_peak(i2);
  CoregisteredPair out{i1, i2, {}};
  out.offset.dx = static_cast<long>(p1.col) - static_cast<long>(p2.col);
  out.offset.dy = static_cast<long>(p1.row) - static_cast<long>(p2.row);
  const long rows = static_cast<long>(i2.pixels.rows());
  const long cols = static_cast<long>(i2.pixels.cols());
  ComplexMatrix shifted(i2.pixels.rows(), i2.pixels.cols());
  for (long r = 0; r < rows; ++r) {
    const long sr = r - out.offset.dy;
    if (sr < 0 || sr >= rows) continue;
    for (long c = 0; c < cols; ++c) {
      const long sc = c - out.offset.dx;
      if (sc < 0 || sc >= cols) continue;
      shifted(r, c) = i2.pixels(sr, sc);
    }
  }
  out.second.pixels = std::move(shifted);
  out.second.excluded_pixels.clear();
  std::ostringstream note;
  note << "translated by (" << out.offset.dx << ", " << out.offset.dy << ") pixels";
  out.second.provenance.notes.push_back(note.str());
  return out;
}

Interferogram interferogram(const ComplexImage& i1, const ComplexImage& i2) {
  if (!(i1.grid == i2.grid) || i1.pixels.rows() != i2.pixels.rows() ||
      i1.pixels.cols() != i2.pixels.cols())
    throw ContractError("interferogram inputs must share a grid");
  Interferogram out;
  out.image.grid = i1.grid;
  out.image.provenance = i1.provenance;
  out.image.provenance.notes.push_back("interferogram I1 conj(I2)");
  out.image.pixels = ComplexMatrix(i1.pixels.rows(), i1.pixels.cols());
  const auto& a = i1.pixels.data();
  const auto& b = i2.pixels.data();
  auto& o = out.image.pixels.data();
  parallel_for(o.size(), [&](std::size_t i) { o[i] = a[i] * std::conj(b[i]); });
  return out;
}

Interferogram interferogram(const CoregisteredPair& pair) {
  Interferogram out = interferogram(pair.first, pair.second);
  out.offset = pair.offset;
  return out;
}

PhaseMeasurement resolve_ambiguity(double wrapped, double predicted, Modality modality) {
  if (!std::isfinite(wrapped) || !std::isfinite(predicted))
    throw DomainError("phase values must be finite");
  PhaseMeasurement m;
  m.modality = modality;
  m.wrapped = wrap_phase(wrapped);
  const double kf = std::floor((predicted - m.wrapped) / kTwoPi);
  const long lo = static_cast<long>(kf);
  const long hi = lo + 1;
  const double e_lo = std::abs(m.wrapped + kTwoPi * static_cast<double>(lo) - predicted);
  const double e_hi = std::abs(m.wrapped + kTwoPi * static_cast<double>(hi) - predicted);
  const double tie_tol = 1e-9 * std::max(1.0, std::abs(predicted));
  long k;
  if (std::abs(e_lo - e_hi) <= tie_tol) {
    k = std::abs(lo) <= std::abs(hi) ? lo : hi;
  } else {
    k = e_lo < e_hi ? lo : hi;
  }
  m.ambiguity_index = k;
  m.unwrapped = m.wrapped + kTwoPi * static_cast<double>(k);
  m.resolved = true;
  return m;
}

double wb_phase_model(const Vec3& x, const Trajectory& traj1, double s01, const Trajectory& traj2,
                      double s02, double omega0, const PhysicalConstants& consts) {
  const double r1 = range(traj1, s01, x);
  const double r2 = range(traj2, s02, x);
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw SingularityError("point coincides with an antenna");
  return 2.0 * (omega0 / consts.c) * (r1 - r2);
}

double unb_phase_model(const Vec3& x, const Trajectory& traj1, double s_d1, const Trajectory& traj2,
                       double s_d2, double omega0, double t_phi, const PhysicalConstants& consts) {
  const double f1 = doppler(traj1, s_d1, x, omega0, consts);
  const double f2 = doppler(traj2, s_d2, x, omega0, consts);
  return 2.0 * s_d1 * t_phi * (f1 - f2);
}

FlattenedPhase flatten_wb(const PhaseMeasurement& phase, const Vec3& z0, const Trajectory& traj1,
                          double s01, const Vec3& b, double omega0, const PhysicalConstants& consts) {
  const Vec3 g1 = traj1.position(s01);
  const double r1 = norm(z0 - g1);
  const double r2 = norm(z0 - (g1 + b));
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw SingularityError("reference point coincides with an antenna");
  FlattenedPhase out;
  out.reference = 2.0 * (omega0 / consts.c) * (r1 - r2);
  out.value = phase.unwrapped - out.reference;
  if (!phase.resolved) out.warnings.push_back("phase ambiguity unresolved; flattened value is wrapped");
  return out;
}

FlattenedPhase flatten_unb(const PhaseMeasurement& phase, const Vec3& z0, const Trajectory& traj1,
                           double s_d1, const Trajectory& traj2, double s_d2, double omega0,
                           double t_phi, const PhysicalConstants& consts) {
  FlattenedPhase out;
  out.reference = unb_phase_model(z0, traj1, s_d1, traj2, s_d2, omega0, t_phi, consts);
  out.value = phase.unwrapped - out.reference;
  if (!phase.resolved) out.warnings.push_back("phase ambiguity unresolved; flattened value is wrapped");
  return out;
}

double flatten_wb_linear(const Vec3& l, const Vec3& z0, const Trajectory& traj1, double s01,
                         const Vec3& b, double omega0, const PhysicalConstants& consts,
                         ProjectionForm form, std::vector<std::string>* warnings) {
  const Vec3 look = look_direction(traj1, s01, z0);
  const double r = range(traj1, s01, z0);
  check_far_field(l, r, warnings);
  const double proj = form == ProjectionForm::ProjectBaseline ? dot(perp_component(b, look), l)
                                                               : dot(perp_component(l, look), b);
  return 2.0 * (omega0 / consts.c) * proj / r;
}

double flatten_unb_linear(const Vec3& l, const Vec3& z0, const Trajectory& traj1, double s_d1,
                          const Vec3& v, double omega0, double t_phi, const PhysicalConstants& consts,
                          ProjectionForm form, std::vector<std::string>* warnings) {
  const Vec3 look = look_direction(traj1, s_d1, z0);
  const double r = range(traj1, s_d1, z0);
  check_far_field(l, r, warnings);
  const double proj = form == ProjectionForm::ProjectBaseline ? dot(perp_component(v, look), l)
                                                               : dot(perp_component(l, look), v);
  return 2.0 * (omega0 / consts.c) * s_d1 * t_phi * proj / r;
}

}  // namespace dsar
