#include "dsar/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dsar/errors.hpp"
#include "dsar/parallel.hpp"

namespace dsar {

namespace {

constexpr double kPi = std::numbers::pi;

// Main-lobe half-width of the raised-cosine kernel [rad/s].
double kernel_half_width(const UNBConfig& cfg) { return 4.0 * kPi / cfg.t_phi; }

}  // namespace

void WidebandConfig::validate() const {
  if (!(omega0 > 0.0)) throw ValidationError("wideband centre frequency must be positive");
  if (!(bandwidth > 0.0) || !(bandwidth < omega0))
    throw ValidationError("wideband bandwidth must be positive and below the centre frequency");
  if (n_freq < 2 || n_slow < 2) throw ValidationError("wideband sample counts must be at least 2");
}

std::vector<double> WidebandConfig::frequency_offsets() const {
  std::vector<double> out(n_freq);
  const double step = bandwidth / static_cast<double>(n_freq);
  const double centre = 0.5 * static_cast<double>(n_freq - 1);
  for (std::size_t j = 0; j < n_freq; ++j) out[j] = (static_cast<double>(j) - centre) * step;
  return out;
}

void UNBConfig::validate() const {
  if (!(omega0 > 0.0)) throw ValidationError("UNB centre frequency must be positive");
  if (!(t_phi > 0.0)) throw ValidationError("UNB window duration must be positive");
  if (n_fast < 2 || n_slow < 2 || n_mu < 2) throw ValidationError("UNB sample counts must be at least 2");
  if (mu_span && !(*mu_span > 0.0)) throw ValidationError("UNB mu half-span must be positive");
}

std::vector<double> UNBConfig::fast_times() const {
  std::vector<double> out(n_fast);
  const double dt = fast_time_step();
  for (std::size_t j = 0; j < n_fast; ++j) out[j] = static_cast<double>(j) * dt;
  out.back() = t_phi;
  return out;
}

double UNBConfig::fast_time_step() const { return t_phi / static_cast<double>(n_fast - 1); }

std::vector<double> UNBConfig::mu_offsets(double span) const {
  std::vector<double> out(n_mu);
  const double centre = 0.5 * static_cast<double>(n_mu - 1);
  const double step = 2.0 * span / static_cast<double>(n_mu - 1);
  for (std::size_t m = 0; m < n_mu; ++m) out[m] = (static_cast<double>(m) - centre) * step;
  return out;
}

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::RaisedCosine:
      return "raised_cosine";
  }
  return "unknown";
}

std::vector<double> slow_times(const Trajectory& traj, std::size_t n) {
  if (n < 2) throw ValidationError("need at least two slow-time samples");
  std::vector<double> out(n);
  const double step = (traj.s_end() - traj.s_begin()) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) out[k] = traj.s_begin() + static_cast<double>(k) * step;
  out.back() = traj.s_end();
  return out;
}

double window_value(double t, const UNBConfig& cfg) {
  if (t < 0.0 || t > cfg.t_phi) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * kPi * t / cfg.t_phi));
}

cdouble unb_kernel(double delta, const UNBConfig& cfg) {
  const double dt = cfg.fast_time_step();
  cdouble acc{};
  for (double t : cfg.fast_times()) acc += window_value(t, cfg) * dt * std::polar(1.0, -t * delta);
  return acc;
}

double max_doppler_ratio(const Scene& scene, const Trajectory& traj, const UNBConfig& cfg,
                         const PhysicalConstants& consts) {
  double ratio = 0.0;
  for (double s : slow_times(traj, cfg.n_slow)) {
    for (const auto& sc : scene) {
      const double f = doppler(traj, s, sc.position(), cfg.omega0, consts);
      ratio = std::max(ratio, std::abs(2.0 * f / cfg.omega0));
    }
  }
  return ratio;
}

double auto_mu_span(const Scene& scene, const Trajectory& traj, const UNBConfig& cfg,
                    const PhysicalConstants& consts) {
  const double floor_span = 4.0 * kernel_half_width(cfg) / cfg.omega0;
  return std::max(4.0 * max_doppler_ratio(scene, traj, cfg, consts), floor_span);
}

void validate_mu_span(double span, const Scene& scene, const Trajectory& traj,
                      const UNBConfig& cfg, const PhysicalConstants& consts) {
  const double needed = max_doppler_ratio(scene, traj, cfg, consts);
  if (!(span > needed)) {
    std::ostringstream msg;
    msg << "mu half-span " << span << " does not cover the scene Doppler ratio " << needed;
    throw ValidationError(msg.str());
  }
  // Kernel correlations over the mu grid are exact only when the grid step in
  // delta stays below pi / T_phi.
  const double step = 2.0 * span * cfg.omega0 / static_cast<double>(cfg.n_mu - 1);
  if (step > kPi / cfg.t_phi) {
    std::ostringstream msg;
    msg << "mu grid step " << step << " rad/s exceeds pi/T_phi = " << kPi / cfg.t_phi
        << "; increase n_mu or reduce the span";
    throw ValidationError(msg.str());
  }
}

WidebandDataSet simulate_wideband(const Scene& scene, const Trajectory& traj,
                                  const WidebandConfig& cfg, const PhysicalConstants& consts) {
  cfg.validate();
  consts.validate();
  WidebandDataSet out;
  out.config = cfg;
  out.frequency_axis = {"omega_offset", "rad/s", cfg.frequency_offsets()};
  out.slow_time_axis = {"slow_time", "s", slow_times(traj, cfg.n_slow)};
  out.samples = ComplexMatrix(cfg.n_freq, cfg.n_slow);

  const auto& freqs = out.frequency_axis.values;
  const auto& times = out.slow_time_axis.values;
  parallel_for(cfg.n_slow, [&](std::size_t k) {
    const Vec3 antenna = traj.position(times[k]);
    for (const auto& sc : scene) {
      const double r = norm(sc.position() - antenna);
      if (!(r > 0.0)) throw SingularityError("scatterer coincides with the antenna");
      for (std::size_t j = 0; j < cfg.n_freq; ++j) {
        const double phase = 2.0 * (cfg.omega0 + freqs[j]) * r / consts.c;
        out.samples(j, k) += sc.reflectivity * std::polar(1.0, phase);
      }
    }
  });
  return out;
}

UNBDataSet simulate_unb(const Scene& scene, const Trajectory& traj, const UNBConfig& cfg,
                        const PhysicalConstants& consts) {
  cfg.validate();
  consts.validate();
  UNBDataSet out;
  out.config = cfg;
  const double span = cfg.mu_span ? *cfg.mu_span : auto_mu_span(scene, traj, cfg, consts);
  out.config.mu_span = span;
  out.mu_axis = {"mu_minus_one", "1", cfg.mu_offsets(span)};
  out.slow_time_axis = {"slow_time", "s", slow_times(traj, cfg.n_slow)};
  out.samples = ComplexMatrix(cfg.n_mu, cfg.n_slow);

  const double ratio = max_doppler_ratio(scene, traj, cfg, consts);
  if (ratio >= span) {
    std::ostringstream msg;
    msg << "scene Doppler ratio " << ratio << " exceeds the mu half-span " << span
        << "; data are aliased";
    out.warnings.push_back(msg.str());
  }

  // delta_m = omega0 (1 - mu_m); table of exp(+i t_j delta_m).
  const auto ts = cfg.fast_times();
  const double dt = cfg.fast_time_step();
  std::vector<double> weights(cfg.n_fast);
  for (std::size_t j = 0; j < cfg.n_fast; ++j) weights[j] = window_value(ts[j], cfg) * dt;
  std::vector<cdouble> table(cfg.n_mu * cfg.n_fast);
  for (std::size_t m = 0; m < cfg.n_mu; ++m) {
    const double delta = -cfg.omega0 * out.mu_axis.values[m];
    for (std::size_t j = 0; j < cfg.n_fast; ++j) table[m * cfg.n_fast + j] = std::polar(1.0, ts[j] * delta);
  }

  const auto& times = out.slow_time_axis.values;
  parallel_for(cfg.n_slow, [&](std::size_t k) {
    const double s = times[k];
    std::vector<cdouble> a(cfg.n_fast);
    for (const auto& sc : scene) {
      const double f = doppler(traj, s, sc.position(), cfg.omega0, consts);
      for (std::size_t j = 0; j < cfg.n_fast; ++j) a[j] = weights[j] * std::polar(1.0, 2.0 * f * ts[j]);
      const cdouble gain = sc.reflectivity * std::polar(1.0, 2.0 * f * s * cfg.t_phi);
      for (std::size_t m = 0; m < cfg.n_mu; ++m) {
        const cdouble* row = table.data() + m * cfg.n_fast;
        cdouble acc{};
        for (std::size_t j = 0; j < cfg.n_fast; ++j) acc += a[j] * std::conj(row[j]);
        out.samples(m, k) += gain * acc;
      }
    }
  });
  return out;
}

}  // namespace dsar
