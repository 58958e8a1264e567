#pragma once

// Kinematics and vector geometry for monostatic SAR passes: ranges,
// look-directions, Doppler and Doppler-rate, reference times, baselines.
//
// Sign conventions, used everywhere downstream:
//   L(x, s)      = (x - gamma(s)) / |x - gamma(s)|          look-direction
//   f_d(x, s)    = -(omega0 / c) * L(x, s) . gamma'(s)     Doppler [rad/s]
//   d/ds f_d     = -(omega0 / c) * [L . gamma'' - gamma' . gamma'_perp / R]

#include <cmath>
#include <string>

namespace dsar {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double k) {
    x *= k;
    y *= k;
    z *= k;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double k) { return a *= k; }
constexpr Vec3 operator*(double k, Vec3 a) { return a *= k; }
constexpr Vec3 operator/(const Vec3& a, double k) { return {a.x / k, a.y / k, a.z / k}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

struct PhysicalConstants {
  double c = 3.0e8;  // propagation speed [m/s]

  void validate() const;
};

enum class TrajectoryKind { Linear, ConstantAcceleration };

/// Antenna path gamma(s) = start + v (s - S1) + a (s - S1)^2 / 2 on [S1, S2].
class Trajectory {
 public:
  Trajectory() = default;

  static Trajectory linear(const Vec3& start, const Vec3& velocity, double s_begin, double s_end);
  static Trajectory constant_acceleration(const Vec3& start, const Vec3& velocity,
                                          const Vec3& acceleration, double s_begin, double s_end);

  /// Straight pass parallel to the y-axis at (x, *, height), centred on y = 0,
  /// with slow time in seconds and s = 0 at the midpoint.
  static Trajectory y_pass(double x, double height, double speed, double length);

  TrajectoryKind kind() const { return kind_; }
  const Vec3& start() const { return start_; }
  double s_begin() const { return s_begin_; }
  double s_end() const { return s_end_; }
  bool contains(double s) const;

  Vec3 position(double s) const;
  Vec3 velocity(double s) const;
  Vec3 acceleration(double s) const;

 private:
  Trajectory(TrajectoryKind kind, const Vec3& start, const Vec3& velocity, const Vec3& acceleration,
             double s_begin, double s_end);
  double elapsed(double s) const;

  TrajectoryKind kind_ = TrajectoryKind::Linear;
  Vec3 start_{};
  Vec3 velocity_{};
  Vec3 acceleration_{};
  double s_begin_ = 0.0;
  double s_end_ = 1.0;
};

std::string to_string(TrajectoryKind kind);

Vec3 position(const Trajectory& traj, double s);
double range(const Trajectory& traj, double s, const Vec3& x);
Vec3 look_direction(const Trajectory& traj, double s, const Vec3& x);

/// L(x, s) . gamma'(s), the raw dot product.
double look_dot_velocity(const Trajectory& traj, double s, const Vec3& x);

/// d/ds |x - gamma(s)| = -L(x, s) . gamma'(s).
double range_rate(const Trajectory& traj, double s, const Vec3& x);

/// Slow time where L . gamma' = 0. Closed form for linear passes (closest
/// approach); bracketed root search otherwise. Throws NotFoundError when the
/// root lies outside [S1, S2].
double zero_doppler_time(const Trajectory& traj, const Vec3& x);

double doppler(const Trajectory& traj, double s, const Vec3& x, double omega0,
               const PhysicalConstants& consts = {});
double doppler_rate(const Trajectory& traj, double s, const Vec3& x, double omega0,
                    const PhysicalConstants& consts = {});

/// Bracket L . gamma'' - gamma' . gamma'_perp / R of the Doppler-rate; equals
/// -(c / omega0) * doppler_rate.
double doppler_rate_geometry(const Trajectory& traj, double s, const Vec3& x);

/// For linear passes: the endpoint farthest from x (later endpoint on a tie).
/// Otherwise: the sample minimizing |d/ds f_d| over the pass, refined.
double zero_doppler_rate_time(const Trajectory& traj, const Vec3& x);

/// a - u (u . a); u must be a unit vector (|u| = 1 within 1e-9).
Vec3 perp_component(const Vec3& a, const Vec3& u);

/// First-order far-field range |x| - x_hat . y approximating |x - y|.
double far_field_range(const Vec3& x, const Vec3& y);

/// z_perp / |y - antenna| with z = x - y: first-order L(x) - L(y).
Vec3 look_direction_difference(const Vec3& x, const Vec3& y, const Vec3& antenna);

Vec3 baseline(const Trajectory& traj1, double s1, const Trajectory& traj2, double s2);
Vec3 baseline_velocity(const Trajectory& traj1, double s1, const Trajectory& traj2, double s2);

}  // namespace dsar
