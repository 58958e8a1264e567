#include "dsar/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dsar/errors.hpp"
#include "dsar/parallel.hpp"

namespace dsar {

namespace {

using Batch = std::array<double, kImageBatch>;

std::size_t cells(double half_extent, double spacing) {
  return static_cast<std::size_t>(std::llround(2.0 * half_extent / spacing));
}

// Pixel references for one batch of a row; invalid ones are flagged and
// padded with a valid neighbour so the vector loops stay uniform.
template <class RefFn>
std::size_t prepare_batch(const ImageGrid& grid, std::size_t row, std::size_t col0,
                          std::size_t count, RefFn&& ref, Batch& xs, Batch& ys, Batch& refs,
                          std::array<bool, kImageBatch>& ok) {
  std::size_t first_ok = kImageBatch;
  for (std::size_t b = 0; b < kImageBatch; ++b) {
    ok[b] = false;
    if (b >= count) continue;
    const Vec3 z = grid.point(row, col0 + b);
    xs[b] = z.x;
    ys[b] = z.y;
    try {
      refs[b] = ref(z);
      ok[b] = std::isfinite(refs[b]);
    } catch (const std::runtime_error&) {
    } catch (const std::domain_error&) {
    }
    if (ok[b] && first_ok == kImageBatch) first_ok = b;
  }
  if (first_ok == kImageBatch) return 0;
  for (std::size_t b = 0; b < kImageBatch; ++b) {
    if (!ok[b]) {
      xs[b] = xs[first_ok];
      ys[b] = ys[first_ok];
      refs[b] = refs[first_ok];
    }
  }
  return first_ok + 1;
}

// Fills an image row by row; eval(row, col0, count, out) writes complex values
// and returns a mask of valid pixels.
template <class RowFn>
ComplexImage form_image(const ImageGrid& grid, Modality modality, RowFn&& fill_batch) {
  grid.validate();
  ComplexImage img;
  img.grid = grid;
  img.provenance.modality = modality;
  const std::size_t nx = grid.nx(), ny = grid.ny();
  img.pixels = ComplexMatrix(ny, nx);
  std::vector<std::vector<std::uint64_t>> excluded(ny);
  parallel_for(ny, [&](std::size_t r) {
    for (std::size_t c0 = 0; c0 < nx; c0 += kImageBatch) {
      const std::size_t count = std::min(kImageBatch, nx - c0);
      std::array<bool, kImageBatch> ok{};
      std::array<cdouble, kImageBatch> vals{};
      fill_batch(r, c0, count, vals, ok);
      for (std::size_t b = 0; b < count; ++b) {
        if (ok[b]) {
          img.pixels(r, c0 + b) = vals[b];
        } else {
          excluded[r].push_back(static_cast<std::uint64_t>(r * nx + c0 + b));
        }
      }
    }
  });
  for (auto& e : excluded) img.excluded_pixels.insert(img.excluded_pixels.end(), e.begin(), e.end());
  return img;
}

}  // namespace

void ImageGrid::validate() const {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("grid spacing must be positive");
  if (!(half_extent_x > 0.0) || !(half_extent_y > 0.0) || !std::isfinite(half_extent_x) ||
      !std::isfinite(half_extent_y))
    throw ValidationError("grid extents must be positive");
  if (!std::isfinite(reference_height)) throw ValidationError("reference height must be finite");
  if (nx() == 0 || ny() == 0) throw ValidationError("grid has no pixels");
}

std::size_t ImageGrid::nx() const { return cells(half_extent_x, spacing); }
std::size_t ImageGrid::ny() const { return cells(half_extent_y, spacing); }

std::string to_string(Modality m) { return m == Modality::Wideband ? "wideband" : "unb"; }

Modality modality_from_string(const std::string& s) {
  if (s == "wideband" || s == "wb" || s == "WB") return Modality::Wideband;
  if (s == "unb" || s == "UNB") return Modality::UNB;
  throw ValidationError("unknown modality '" + s + "'");
}

// ---------------------------------------------------------------- wideband

WidebandBackprojector::WidebandBackprojector(const WidebandDataSet& data, const Trajectory& traj,
                                             const PhysicalConstants& consts)
    : traj_(traj), consts_(consts) {
  consts.validate();
  const auto& freqs = data.frequency_axis.values;
  const auto& times = data.slow_time_axis.values;
  if (freqs.size() < 2 || data.samples.rows() != freqs.size() || data.samples.cols() != times.size())
    throw ContractError("wideband data dimensions do not match their axes");
  omega0_ = data.config.omega0;
  first_offset_ = freqs.front();
  freq_step_ = freqs[1] - freqs[0];
  n_freq_ = freqs.size();
  antenna_.reserve(times.size());
  for (double s : times) antenna_.push_back(traj.position(s));
  data_re_.resize(times.size() * n_freq_);
  data_im_.resize(times.size() * n_freq_);
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t j = 0; j < n_freq_; ++j) {
      data_re_[k * n_freq_ + j] = data.samples(j, k).real();
      data_im_[k * n_freq_ + j] = data.samples(j, k).imag();
    }
  }
}

void WidebandBackprojector::accumulate(const double* xs, const double* ys, const double* r0,
                                       double height, double* out_re, double* out_im) const {
  constexpr std::size_t B = kImageBatch;
  const double k0 = 2.0 * omega0_ / consts_.c;
  const double k_first = 2.0 * first_offset_ / consts_.c;
  const double k_step = 2.0 * freq_step_ / consts_.c;
  alignas(64) double sum_re[B] = {}, sum_im[B] = {};
  alignas(64) double w_re[B], w_im[B], acc_re[B], acc_im[B], rng[B];
  const std::size_t n = n_freq_;
  for (std::size_t k = 0; k < antenna_.size(); ++k) {
    const Vec3& a = antenna_[k];
    const double* dre = data_re_.data() + k * n;
    const double* dim = data_im_.data() + k * n;
    for (std::size_t b = 0; b < B; ++b) {
      const double dx = xs[b] - a.x, dy = ys[b] - a.y, dz = height - a.z;
      rng[b] = std::sqrt(dx * dx + dy * dy + dz * dz);
      w_re[b] = std::cos(k_step * rng[b]);
      w_im[b] = -std::sin(k_step * rng[b]);
      acc_re[b] = dre[n - 1];
      acc_im[b] = dim[n - 1];
    }
    for (std::size_t j = n - 1; j-- > 0;) {
      const double dr = dre[j], di = dim[j];
      for (std::size_t b = 0; b < B; ++b) {
        const double re = acc_re[b] * w_re[b] - acc_im[b] * w_im[b] + dr;
        const double im = acc_re[b] * w_im[b] + acc_im[b] * w_re[b] + di;
        acc_re[b] = re;
        acc_im[b] = im;
      }
    }
    for (std::size_t b = 0; b < B; ++b) {
      // exp(-i [2 omega0 (R - R0) / c + 2 omega'_0 R / c]) with the carrier
      // term differenced before the trig call.
      const double phase = k0 * (rng[b] - r0[b]) + k_first * rng[b];
      const double c = std::cos(phase), s = -std::sin(phase);
      sum_re[b] += acc_re[b] * c - acc_im[b] * s;
      sum_im[b] += acc_re[b] * s + acc_im[b] * c;
    }
  }
  for (std::size_t b = 0; b < B; ++b) {
    out_re[b] = sum_re[b];
    out_im[b] = sum_im[b];
  }
}

cdouble WidebandBackprojector::at(const Vec3& z) const {
  const double r0 = range(traj_, zero_doppler_time(traj_, z), z);
  if (!(r0 > 0.0)) throw SingularityError("pixel coincides with the antenna");
  Batch xs, ys, refs, re, im;
  xs.fill(z.x);
  ys.fill(z.y);
  refs.fill(r0);
  accumulate(xs.data(), ys.data(), refs.data(), z.z, re.data(), im.data());
  return {re[0], im[0]};
}

ComplexImage WidebandBackprojector::image(const ImageGrid& grid) const {
  auto ref = [&](const Vec3& z) {
    const double r0 = range(traj_, zero_doppler_time(traj_, z), z);
    if (!(r0 > 0.0)) throw SingularityError("pixel coincides with the antenna");
    for (const auto& a : antenna_)
      if (a == z) throw SingularityError("pixel coincides with the antenna");
    return r0;
  };
  return form_image(grid, Modality::Wideband,
                    [&](std::size_t r, std::size_t c0, std::size_t count,
                        std::array<cdouble, kImageBatch>& vals, std::array<bool, kImageBatch>& ok) {
                      Batch xs, ys, refs, re, im;
                      if (prepare_batch(grid, r, c0, count, ref, xs, ys, refs, ok) == 0) return;
                      accumulate(xs.data(), ys.data(), refs.data(), grid.reference_height, re.data(),
                                 im.data());
                      for (std::size_t b = 0; b < count; ++b) vals[b] = {re[b], im[b]};
                    });
}

ComplexImage backproject_wideband(const WidebandDataSet& data, const Trajectory& traj,
                                  const ImageGrid& grid, const PhysicalConstants& consts) {
  return WidebandBackprojector(data, traj, consts).image(grid);
}

// ---------------------------------------------------------------------- UNB

UnbBackprojector::UnbBackprojector(const UNBDataSet& data, const Trajectory& traj,
                                   const PhysicalConstants& consts)
    : cfg_(data.config), traj_(traj), consts_(consts), times_(data.slow_time_axis.values) {
  consts.validate();
  cfg_.validate();
  const auto& mus = data.mu_axis.values;
  if (data.samples.rows() != mus.size() || data.samples.cols() != times_.size() ||
      mus.size() != cfg_.n_mu)
    throw ContractError("UNB data dimensions do not match their axes");
  for (double s : times_) {
    antenna_.push_back(traj.position(s));
    velocity_.push_back(traj.velocity(s));
  }
  const auto ts = cfg_.fast_times();
  const double dt = cfg_.fast_time_step();
  const std::size_t nf = cfg_.n_fast, nm = mus.size();
  std::vector<cdouble> table(nm * nf);
  for (std::size_t m = 0; m < nm; ++m) {
    const double delta = -cfg_.omega0 * mus[m];
    for (std::size_t j = 0; j < nf; ++j) table[m * nf + j] = std::polar(1.0, ts[j] * delta);
  }
  std::vector<double> weights(nf);
  for (std::size_t j = 0; j < nf; ++j) weights[j] = window_value(ts[j], cfg_) * dt;
  weighted_re_.assign(times_.size() * nf, 0.0);
  weighted_im_.assign(times_.size() * nf, 0.0);
  parallel_for(times_.size(), [&](std::size_t k) {
    std::vector<cdouble> g(nf);
    for (std::size_t m = 0; m < nm; ++m) {
      const cdouble d = data.samples(m, k);
      if (d == cdouble{}) continue;
      const cdouble* row = table.data() + m * nf;
      for (std::size_t j = 0; j < nf; ++j) g[j] += d * row[j];
    }
    for (std::size_t j = 0; j < nf; ++j) {
      weighted_re_[k * nf + j] = weights[j] * g[j].real();
      weighted_im_[k * nf + j] = weights[j] * g[j].imag();
    }
  });
}

void UnbBackprojector::accumulate(const double* xs, const double* ys, double height,
                                  double* out_re, double* out_im) const {
  constexpr std::size_t B = kImageBatch;
  const double scale = -cfg_.omega0 / consts_.c;  // f = scale * L . v
  const double dt = cfg_.fast_time_step();
  const std::size_t n = cfg_.n_fast;
  alignas(64) double sum_re[B] = {}, sum_im[B] = {};
  alignas(64) double w_re[B], w_im[B], acc_re[B], acc_im[B], f[B];
  for (std::size_t k = 0; k < antenna_.size(); ++k) {
    const Vec3& a = antenna_[k];
    const Vec3& v = velocity_[k];
    const double* gre = weighted_re_.data() + k * n;
    const double* gim = weighted_im_.data() + k * n;
    for (std::size_t b = 0; b < B; ++b) {
      const double dx = xs[b] - a.x, dy = ys[b] - a.y, dz = height - a.z;
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      f[b] = scale * (dx * v.x + dy * v.y + dz * v.z) / r;
      w_re[b] = std::cos(2.0 * f[b] * dt);
      w_im[b] = -std::sin(2.0 * f[b] * dt);
      acc_re[b] = gre[n - 1];
      acc_im[b] = gim[n - 1];
    }
    for (std::size_t j = n - 1; j-- > 0;) {
      const double dr = gre[j], di = gim[j];
      for (std::size_t b = 0; b < B; ++b) {
        const double re = acc_re[b] * w_re[b] - acc_im[b] * w_im[b] + dr;
        const double im = acc_re[b] * w_im[b] + acc_im[b] * w_re[b] + di;
        acc_re[b] = re;
        acc_im[b] = im;
      }
    }
    const double s_t = times_[k] * cfg_.t_phi;
    for (std::size_t b = 0; b < B; ++b) {
      const double phase = 2.0 * f[b] * s_t;
      const double c = std::cos(phase), s = -std::sin(phase);
      sum_re[b] += acc_re[b] * c - acc_im[b] * s;
      sum_im[b] += acc_re[b] * s + acc_im[b] * c;
    }
  }
  for (std::size_t b = 0; b < B; ++b) {
    out_re[b] = sum_re[b];
    out_im[b] = sum_im[b];
  }
}

cdouble UnbBackprojector::at(const Vec3& z) const {
  for (const auto& a : antenna_)
    if (a == z) throw SingularityError("point coincides with the antenna");
  const double sd = zero_doppler_rate_time(traj_, z);
  const double ref = 2.0 * doppler(traj_, sd, z, cfg_.omega0, consts_) * sd * cfg_.t_phi;
  Batch xs, ys, re, im;
  xs.fill(z.x);
  ys.fill(z.y);
  accumulate(xs.data(), ys.data(), z.z, re.data(), im.data());
  return cdouble{re[0], im[0]} * std::polar(1.0, ref);
}

ComplexImage UnbBackprojector::image(const ImageGrid& grid) const {
  auto ref = [&](const Vec3& z) {
    for (const auto& a : antenna_)
      if (a == z) throw SingularityError("pixel coincides with the antenna");
    const double sd = zero_doppler_rate_time(traj_, z);
    return 2.0 * doppler(traj_, sd, z, cfg_.omega0, consts_) * sd * cfg_.t_phi;
  };
  return form_image(grid, Modality::UNB,
                    [&](std::size_t r, std::size_t c0, std::size_t count,
                        std::array<cdouble, kImageBatch>& vals, std::array<bool, kImageBatch>& ok) {
                      Batch xs, ys, refs, re, im;
                      if (prepare_batch(grid, r, c0, count, ref, xs, ys, refs, ok) == 0) return;
                      accumulate(xs.data(), ys.data(), grid.reference_height, re.data(), im.data());
                      for (std::size_t b = 0; b < count; ++b)
                        vals[b] = cdouble{re[b], im[b]} * std::polar(1.0, refs[b]);
                    });
}

ComplexImage backproject_unb(const UNBDataSet& data, const Trajectory& traj, const ImageGrid& grid,
                             const PhysicalConstants& consts) {
  return UnbBackprojector(data, traj, consts).image(grid);
}

// ------------------------------------------------------------------ peaks

Peak find_peak(const ComplexImage& img) {
  const auto& px = img.pixels;
  if (px.empty()) throw NotFoundError("empty image has no peak");
  double best = 0.0;
  std::size_t best_i = 0;
  bool found = false;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double m = std::abs(px.data()[i]);
    if (m > best) {
      best = m;
      best_i = i;
      found = true;
    }
  }
  if (!found) throw NotFoundError("image is identically zero");
  Peak p;
  p.row = best_i / px.cols();
  p.col = best_i % px.cols();
  p.value = px.data()[best_i];
  p.position = img.grid.point(p.row, p.col);
  return p;
}

ComplexImage equalize_doppler_rate_factor(const ComplexImage& img, double s_d_own, double s_d_ref) {
  if (s_d_own == 0.0 || !std::isfinite(s_d_own) || !std::isfinite(s_d_ref))
    throw DomainError("zero-Doppler-rate time must be finite and non-zero");
  const double ratio = s_d_ref / s_d_own;
  ComplexImage out = img;
  if (ratio == 1.0) return out;
  for (auto& v : out.pixels.data()) v = std::polar(std::abs(v), ratio * std::arg(v));
  std::ostringstream note;
  note << "phase scaled by s_d ratio " << ratio;
  if (std::abs(ratio - std::round(ratio)) > 1e-12) note << " (non-integral: depends on the phase branch)";
  out.provenance.notes.push_back(note.str());
  return out;
}

Vec3 refine_peak(const std::function<cdouble(const Vec3&)>& evaluate, const Peak& peak,
                 double spacing) {
  if (!(spacing > 0.0)) throw ValidationError("spacing must be positive");
  auto magnitude = [&](const Vec3& z) {
    try {
      return std::abs(evaluate(z));
    } catch (const std::runtime_error&) {
      return 0.0;
    } catch (const std::domain_error&) {
      return 0.0;
    }
  };
  // Maximize along one coordinate with golden-section search.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto line = [&](Vec3 z, double Vec3::*axis, double lo, double hi) {
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    Vec3 zc = z, zd = z;
    zc.*axis = c;
    zd.*axis = d;
    double fc = magnitude(zc), fd = magnitude(zd);
    while (b - a > 1e-7 * spacing) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        zc.*axis = c;
        fc = magnitude(zc);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        zd.*axis = d;
        fd = magnitude(zd);
      }
    }
    z.*axis = 0.5 * (a + b);
    return z;
  };
  const Vec3 start = peak.position;
  Vec3 z = start;
  double best = magnitude(z);
  for (int round = 0; round < 40; ++round) {
    Vec3 next = line(z, &Vec3::x, start.x - spacing, start.x + spacing);
    next = line(next, &Vec3::y, start.y - spacing, start.y + spacing);
    const double value = magnitude(next);
    if (!(value > best)) break;
    const double moved = norm(next - z);
    z = next;
    best = value;
    if (moved < 1e-6 * spacing) break;
  }
  return z;
}

}  // namespace dsar
