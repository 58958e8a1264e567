#pragma once

// Run configuration: an INI-style text file with nested section names.
//
//   [run]                  name, modality = wideband | unb | both, seed
//   [constants]            propagation_speed_m_per_s
//   [target.<id>]          ground_position_m = x, y ; height_m ; reflectivity = re, im
//   [wideband]             center_frequency_hz, bandwidth_hz, n_freq, n_slow
//   [wideband.antenna1|2]  trajectory (see below)
//   [unb]                  center_frequency_hz, window_duration_s, n_fast, n_slow,
//                          n_mu, mu_half_span = auto | value, window
//   [unb.antenna1|2]       trajectory
//   [image]                half_extent_x_m, half_extent_y_m, spacing_m, reference_height_m
//   [search]               x_min_m, x_max_m, x_step_m, height_min_m, height_max_m,
//                          height_step_m, fixed_y_m = peak | value, full_3d,
//                          y_min_m, y_max_m, y_step_m, phase_surface = exact | linearized
//
// Trajectory sections: kind = linear | constant_acceleration, start_m = x, y, z
// (position at slow_time_start_s), velocity_m_per_s, acceleration_m_per_s2,
// slow_time_start_s, slow_time_end_s.
//
// Sample counts in the file are the reference counts. The desk profile
// (default) halves n_freq, n_fast and n_slow; n_mu is kept.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "dsar/forward.hpp"
#include "dsar/heightsolver.hpp"
#include "dsar/imaging.hpp"

namespace dsar {

enum class RunModality { Wideband, UNB, Both };

std::string to_string(RunModality m);

struct WidebandSection {
  WidebandConfig config;
  Trajectory antenna1;
  Trajectory antenna2;
};

struct UnbSection {
  UNBConfig config;
  Trajectory antenna1;
  Trajectory antenna2;
};

struct RunConfig {
  std::string name = "run";
  RunModality modality = RunModality::Wideband;
  std::uint64_t seed = 0;  // reserved; the pipeline is deterministic
  PhysicalConstants consts{};
  Scene scene;
  std::optional<WidebandSection> wideband;
  std::optional<UnbSection> unb;
  ImageGrid grid{};
  SearchGrid search{};
  bool fixed_y_from_peak = true;
  PhaseSurface surface = PhaseSurface::Exact;
  bool full = false;  // reference sampling instead of the desk profile
  std::string source = "<memory>";

  bool runs_wideband() const { return modality != RunModality::UNB; }
  bool runs_unb() const { return modality != RunModality::Wideband; }

  /// Sampling actually used, after the desk/full profile is applied.
  WidebandConfig effective_wideband() const;
  UNBConfig effective_unb() const;

  /// Checks every section needed by the modality, including the UNB mu grid
  /// against the scene; throws ValidationError naming the offending key.
  void validate() const;

  /// Canonical JSON echo (sorted keys) and its SHA-256.
  std::string echo_json() const;
  std::string hash() const;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<memory>");
RunConfig load_config(const std::filesystem::path& path);

/// Text of the shipped reference configurations ("paper-wb", "paper-unb").
std::string builtin_config_text(const std::string& name);

}  // namespace dsar
