#pragma once

// Point-scatterer data synthesis for the two modalities.
//
// Wideband data live in the (omega', s) domain and use the exact range:
//   D(omega', s) = sum_k V_k exp(+i 2 (omega0 + omega') R_k(s) / c)
//
// Ultra-narrowband (UNB) data are the windowed correlations
//   d(mu, s) = sum_k V_k K(omega0 (1 - mu) - 2 f_k(s)) exp(+i 2 f_k(s) s T)
// with K(delta) = sum_t phi(t) exp(-i t delta) dt over the window samples.
// Amplitude terms (beam pattern, spreading) are unity.

#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dsar/geometry.hpp"
#include "dsar/matrix.hpp"

namespace dsar {

struct Scatterer {
  double x = 0.0;  // ground position [m]
  double y = 0.0;
  double height = 0.0;  // [m]
  cdouble reflectivity{1.0, 0.0};

  Vec3 position() const { return {x, y, height}; }
};

using Scene = std::vector<Scatterer>;

struct WidebandConfig {
  double omega0 = 2.0 * std::numbers::pi * 8.0e9;       // centre frequency [rad/s]
  double bandwidth = 2.0 * std::numbers::pi * 100.0e6;  // full swept bandwidth [rad/s]
  std::size_t n_freq = 512;
  std::size_t n_slow = 1024;

  void validate() const;
  /// Baseband frequencies omega', symmetric about 0, spacing bandwidth / n_freq.
  std::vector<double> frequency_offsets() const;
};

enum class WindowKind { RaisedCosine };

struct UNBConfig {
  double omega0 = 2.0 * std::numbers::pi * 8.0e9;
  double t_phi = 0.01;  // window duration [s]
  std::size_t n_fast = 512;
  std::size_t n_slow = 1024;
  /// Half-width of the mu grid around 1. Unset: derived from the scene.
  std::optional<double> mu_span;
  std::size_t n_mu = 512;
  WindowKind window = WindowKind::RaisedCosine;

  void validate() const;
  /// Fast-time samples t_j = j T / (n_fast - 1) and their spacing.
  std::vector<double> fast_times() const;
  double fast_time_step() const;
  /// mu_m - 1 for a given half-width, symmetric about 0.
  std::vector<double> mu_offsets(double span) const;
};

struct WidebandDataSet {
  ComplexMatrix samples;  // (omega' sample) x (slow-time sample)
  Axis frequency_axis;    // omega' [rad/s]
  Axis slow_time_axis;    // s [s]
  WidebandConfig config;
};

struct UNBDataSet {
  ComplexMatrix samples;  // (mu sample) x (slow-time sample)
  Axis mu_axis;           // mu - 1 (kept as an offset to avoid cancellation)
  Axis slow_time_axis;    // s [s]
  UNBConfig config;       // mu_span resolved
  std::vector<std::string> warnings;
};

std::string to_string(WindowKind kind);

/// Slow-time samples spanning [S1, S2] inclusive.
std::vector<double> slow_times(const Trajectory& traj, std::size_t n);

/// Raised cosine on [0, T_phi], zero outside; peak 1 at T_phi / 2.
double window_value(double t, const UNBConfig& cfg);

/// K(delta) over the discretized window.
cdouble unb_kernel(double delta, const UNBConfig& cfg);

/// Largest |2 f_d / omega0| over the scene and pass.
double max_doppler_ratio(const Scene& scene, const Trajectory& traj, const UNBConfig& cfg,
                         const PhysicalConstants& consts = {});

/// Default mu half-width: 4x the scene's largest Doppler ratio, with a floor of
/// four kernel widths for scenes without Doppler extent.
double auto_mu_span(const Scene& scene, const Trajectory& traj, const UNBConfig& cfg,
                    const PhysicalConstants& consts = {});

/// Checks an explicit mu_span against the scene Doppler extent and the kernel
/// sampling limit; throws ValidationError.
void validate_mu_span(double span, const Scene& scene, const Trajectory& traj,
                      const UNBConfig& cfg, const PhysicalConstants& consts = {});

WidebandDataSet simulate_wideband(const Scene& scene, const Trajectory& traj,
                                  const WidebandConfig& cfg, const PhysicalConstants& consts = {});

UNBDataSet simulate_unb(const Scene& scene, const Trajectory& traj, const UNBConfig& cfg,
                        const PhysicalConstants& consts = {});

}  // namespace dsar
