#include "dsar/geometry.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "dsar/errors.hpp"

namespace dsar {

namespace {

// Slack for slow times produced by arithmetic on the interval endpoints.
constexpr double kTimeSlack = 1e-9;
constexpr int kScanSamples = 2048;

double checked_range(const Vec3& d) {
  const double r = norm(d);
  if (!(r > 0.0)) throw SingularityError("point coincides with the antenna");
  return r;
}

// Golden-section minimization of a unimodal function on [a, b].
template <class Fn>
double golden_minimize(Fn&& f, double a, double b, int iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations && (b - a) > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

void PhysicalConstants::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("propagation speed must be positive");
}

Trajectory::Trajectory(TrajectoryKind kind, const Vec3& start, const Vec3& velocity,
                       const Vec3& acceleration, double s_begin, double s_end)
    : kind_(kind),
      start_(start),
      velocity_(velocity),
      acceleration_(acceleration),
      s_begin_(s_begin),
      s_end_(s_end) {
  if (!(s_begin < s_end)) throw ValidationError("trajectory interval requires S1 < S2");
  if (!is_finite(start) || !is_finite(velocity) || !is_finite(acceleration))
    throw ValidationError("trajectory parameters must be finite");
  if (kind == TrajectoryKind::Linear && !(acceleration == Vec3{}))
    throw ValidationError("linear trajectory must have zero acceleration");
}

Trajectory Trajectory::linear(const Vec3& start, const Vec3& velocity, double s_begin, double s_end) {
  return Trajectory(TrajectoryKind::Linear, start, velocity, {}, s_begin, s_end);
}

Trajectory Trajectory::constant_acceleration(const Vec3& start, const Vec3& velocity,
                                             const Vec3& acceleration, double s_begin,
                                             double s_end) {
  return Trajectory(TrajectoryKind::ConstantAcceleration, start, velocity, acceleration, s_begin,
                    s_end);
}

Trajectory Trajectory::y_pass(double x, double height, double speed, double length) {
  if (!(speed > 0.0) || !(length > 0.0)) throw ValidationError("pass speed and length must be positive");
  const double half = 0.5 * length / speed;
  return linear({x, -0.5 * length, height}, {0.0, speed, 0.0}, -half, half);
}

bool Trajectory::contains(double s) const {
  const double slack = kTimeSlack * std::max(1.0, std::abs(s_begin_) + std::abs(s_end_));
  return s >= s_begin_ - slack && s <= s_end_ + slack;
}

double Trajectory::elapsed(double s) const {
  if (!contains(s)) {
    throw DomainError("slow time " + std::to_string(s) + " s outside trajectory interval [" +
                      std::to_string(s_begin_) + ", " + std::to_string(s_end_) + "]");
  }
  return s - s_begin_;
}

Vec3 Trajectory::position(double s) const {
  const double t = elapsed(s);
  return start_ + velocity_ * t + acceleration_ * (0.5 * t * t);
}

Vec3 Trajectory::velocity(double s) const { return velocity_ + acceleration_ * elapsed(s); }

Vec3 Trajectory::acceleration(double s) const {
  elapsed(s);
  return acceleration_;
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Linear:
      return "linear";
    case TrajectoryKind::ConstantAcceleration:
      return "constant_acceleration";
  }
  return "unknown";
}

Vec3 position(const Trajectory& traj, double s) { return traj.position(s); }

double range(const Trajectory& traj, double s, const Vec3& x) { return norm(x - traj.position(s)); }

Vec3 look_direction(const Trajectory& traj, double s, const Vec3& x) {
  const Vec3 d = x - traj.position(s);
  return d / checked_range(d);
}

double look_dot_velocity(const Trajectory& traj, double s, const Vec3& x) {
  return dot(look_direction(traj, s, x), traj.velocity(s));
}

double range_rate(const Trajectory& traj, double s, const Vec3& x) {
  return -look_dot_velocity(traj, s, x);
}

double zero_doppler_time(const Trajectory& traj, const Vec3& x) {
  if (traj.kind() == TrajectoryKind::Linear) {
    const Vec3 v = traj.velocity(traj.s_begin());
    const double speed2 = dot(v, v);
    if (speed2 == 0.0) throw NotFoundError("stationary antenna has no zero-Doppler time");
    const double s0 = traj.s_begin() + dot(v, x - traj.start()) / speed2;
    if (!traj.contains(s0)) throw NotFoundError("zero-Doppler time outside the pass");
    return std::clamp(s0, traj.s_begin(), traj.s_end());
  }

  // (x - gamma) . gamma' has the sign of L . gamma' and no 1/R factor.
  auto g = [&](double s) { return dot(x - traj.position(s), traj.velocity(s)); };
  const double a = traj.s_begin();
  const double step = (traj.s_end() - a) / kScanSamples;
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_range = std::numeric_limits<double>::infinity();
  double prev_s = a;
  double prev_g = g(a);
  for (int i = 1; i <= kScanSamples; ++i) {
    const double s = i == kScanSamples ? traj.s_end() : a + i * step;
    const double gs = g(s);
    double root = std::numeric_limits<double>::quiet_NaN();
    if (prev_g == 0.0) {
      root = prev_s;
    } else if ((prev_g < 0.0) != (gs < 0.0) || gs == 0.0) {
      double lo = prev_s, hi = s, glo = prev_g;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0) && gm != 0.0) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      root = 0.5 * (lo + hi);
    }
    if (!std::isnan(root)) {
      const double r = range(traj, root, x);
      if (r < best_range) {
        best_range = r;
        best = root;
      }
    }
    prev_s = s;
    prev_g = gs;
  }
  if (std::isnan(best)) throw NotFoundError("zero-Doppler time outside the pass");
  return best;
}

double doppler(const Trajectory& traj, double s, const Vec3& x, double omega0,
               const PhysicalConstants& consts) {
  return -(omega0 / consts.c) * look_dot_velocity(traj, s, x);
}

double doppler_rate_geometry(const Trajectory& traj, double s, const Vec3& x) {
  const Vec3 d = x - traj.position(s);
  const double r = checked_range(d);
  const Vec3 look = d / r;
  const Vec3 v = traj.velocity(s);
  const Vec3 v_perp = v - look * dot(look, v);
  return dot(look, traj.acceleration(s)) - dot(v, v_perp) / r;
}

double doppler_rate(const Trajectory& traj, double s, const Vec3& x, double omega0,
                    const PhysicalConstants& consts) {
  return -(omega0 / consts.c) * doppler_rate_geometry(traj, s, x);
}

double zero_doppler_rate_time(const Trajectory& traj, const Vec3& x) {
  if (traj.kind() == TrajectoryKind::Linear) {
    const double d_begin = range(traj, traj.s_begin(), x);
    const double d_end = range(traj, traj.s_end(), x);
    const double tol = 1e-12 * std::max(d_begin, d_end);
    return d_begin > d_end + tol ? traj.s_begin() : traj.s_end();
  }

  auto objective = [&](double s) { return std::abs(doppler_rate_geometry(traj, s, x)); };
  const double a = traj.s_begin();
  const double step = (traj.s_end() - a) / kScanSamples;
  int best_i = 0;
  double best_v = objective(a);
  for (int i = 1; i <= kScanSamples; ++i) {
    const double s = i == kScanSamples ? traj.s_end() : a + i * step;
    const double v = objective(s);
    if (v <= best_v) {
      best_v = v;
      best_i = i;
    }
  }
  const double lo = std::max(a, a + (best_i - 1) * step);
  const double hi = std::min(traj.s_end(), a + (best_i + 1) * step);
  const double refined = golden_minimize(objective, lo, hi);
  return objective(refined) < best_v ? refined
                                     : (best_i == kScanSamples ? traj.s_end() : a + best_i * step);
}

Vec3 perp_component(const Vec3& a, const Vec3& u) {
  if (std::abs(norm(u) - 1.0) > 1e-9) throw ContractError("perp_component requires a unit vector");
  return a - u * dot(u, a);
}

double far_field_range(const Vec3& x, const Vec3& y) {
  const double r = norm(x);
  if (!(r > 0.0)) throw SingularityError("far-field range undefined at |x| = 0");
  return r - dot(x / r, y);
}

Vec3 look_direction_difference(const Vec3& x, const Vec3& y, const Vec3& antenna) {
  const Vec3 d = y - antenna;
  const double r = checked_range(d);
  return perp_component(x - y, d / r) / r;
}

Vec3 baseline(const Trajectory& traj1, double s1, const Trajectory& traj2, double s2) {
  return traj2.position(s2) - traj1.position(s1);
}

Vec3 baseline_velocity(const Trajectory& traj1, double s1, const Trajectory& traj2, double s2) {
  return traj2.velocity(s2) - traj1.velocity(s1);
}

}  // namespace dsar
