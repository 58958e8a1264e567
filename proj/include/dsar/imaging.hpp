#pragma once

// Backprojection onto a flat reference surface.
//
// Wideband: each pixel z is matched against the full phase history of a
// scatterer at z and re-referenced to its zero-Doppler range,
//   I(z) = exp(+i 2 omega0 R(z, s0(z)) / c)
//          * sum_s sum_omega' D(omega', s) exp(-i 2 (omega0 + omega') R(z, s) / c),
// so the image of a scatterer x peaks at its layover point with phase
// 2 (omega0 / c) R(x, s0).
//
// UNB: each pixel correlates the data with the kernel at its own Doppler
// history and removes its slow-time phase, re-referenced to s_d(z):
//   I(z) = exp(+i 2 f(z, s_d) s_d T)
//          * sum_s exp(-i 2 f(z, s) s T) sum_mu d(mu, s) conj(K(delta_mu - 2 f(z, s)))
// giving peak phase 2 f(x, s_d) s_d T.

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsar/forward.hpp"
#include "dsar/geometry.hpp"
#include "dsar/matrix.hpp"

namespace dsar {

/// Pixel lattice on the reference plane. Columns run along x, rows along y;
/// pixel (r, c) sits at (-half_extent_x + c * spacing, -half_extent_y + r * spacing).
struct ImageGrid {
  double half_extent_x = 64.0;
  double half_extent_y = 64.0;
  double spacing = 1.0;
  double reference_height = 0.0;

  void validate() const;
  std::size_t nx() const;
  std::size_t ny() const;
  double x_at(std::size_t col) const { return -half_extent_x + static_cast<double>(col) * spacing; }
  double y_at(std::size_t row) const { return -half_extent_y + static_cast<double>(row) * spacing; }
  Vec3 point(std::size_t row, std::size_t col) const { return {x_at(col), y_at(row), reference_height}; }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

enum class Modality { Wideband, UNB };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct ImageProvenance {
  Modality modality = Modality::Wideband;
  std::string trajectory_id;
  std::string config_hash;
  std::vector<std::string> notes;
};

struct ComplexImage {
  ImageGrid grid;
  ComplexMatrix pixels;  // ny x nx
  ImageProvenance provenance;
  std::vector<std::uint64_t> excluded_pixels;  // row-major indices set to zero
};

struct Peak {
  std::size_t row = 0;
  std::size_t col = 0;
  cdouble value{};
  Vec3 position{};
};

/// Points are processed in fixed-size batches so the inner loops vectorize.
inline constexpr std::size_t kImageBatch = 32;

/// Precomputes per-pulse quantities so that single points can be evaluated
/// cheaply (used for the full image and for off-grid peak refinement).
class WidebandBackprojector {
 public:
  WidebandBackprojector(const WidebandDataSet& data, const Trajectory& traj,
                        const PhysicalConstants& consts = {});

  /// Throws SingularityError / NotFoundError for points without a valid
  /// zero-Doppler reference.
  cdouble at(const Vec3& z) const;
  ComplexImage image(const ImageGrid& grid) const;

 private:
  // Raw matched sums for a batch of points, each multiplied by its
  // zero-Doppler reference exp(+i 2 omega0 r0 / c).
  void accumulate(const double* xs, const double* ys, const double* r0, double height,
                  double* out_re, double* out_im) const;

  Trajectory traj_;
  PhysicalConstants consts_;
  std::vector<Vec3> antenna_;
  double omega0_ = 0.0;
  double first_offset_ = 0.0;
  double freq_step_ = 0.0;
  std::size_t n_freq_ = 0;
  // Per pulse, contiguous in frequency.
  std::vector<double> data_re_;
  std::vector<double> data_im_;
};

class UnbBackprojector {
 public:
  UnbBackprojector(const UNBDataSet& data, const Trajectory& traj,
                   const PhysicalConstants& consts = {});

  cdouble at(const Vec3& z) const;
  ComplexImage image(const ImageGrid& grid) const;

 private:
  // Raw matched sums for a batch of points, before the s_d re-reference.
  void accumulate(const double* xs, const double* ys, double height, double* out_re,
                  double* out_im) const;

  UNBConfig cfg_;
  Trajectory traj_;
  PhysicalConstants consts_;
  std::vector<double> times_;
  std::vector<Vec3> antenna_;
  std::vector<Vec3> velocity_;
  // Per pulse: phi(t_j) dt * sum_mu d(mu, s) exp(+i t_j delta_mu), split re/im.
  std::vector<double> weighted_re_;
  std::vector<double> weighted_im_;
};

ComplexImage backproject_wideband(const WidebandDataSet& data, const Trajectory& traj,
                                  const ImageGrid& grid, const PhysicalConstants& consts = {});
ComplexImage backproject_unb(const UNBDataSet& data, const Trajectory& traj, const ImageGrid& grid,
                             const PhysicalConstants& consts = {});

/// Argmax of |I|; ties go to the smallest row-major index. Throws
/// NotFoundError for an all-zero image.
Peak find_peak(const ComplexImage& img);

/// Rescales every pixel phase by s_d_ref / s_d_own, keeping magnitudes.
/// Exact modulo 2 pi only for integral ratios; other ratios add a note.
ComplexImage equalize_doppler_rate_factor(const ComplexImage& img, double s_d_own, double s_d_ref);

/// Local maximization of |I| around a pixel peak using direct point
/// evaluations. Searches within +/- one pixel in x and y.
Vec3 refine_peak(const std::function<cdouble(const Vec3&)>& evaluate, const Peak& peak,
                 double spacing);

}  // namespace dsar
