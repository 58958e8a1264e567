#pragma once

// Interferogram formation and interferometric phase models.
//
//   WB:  Phi = 2 (omega0 / c) (R1(x, s0_1) - R2(x, s0_2))
//   UNB: Phi = 2 s_d1 T (f1(x, s_d1) - f2(x, s_d2))   (after equalization)
//
// Linearizations used for flattening, with l = x - z0:
//   WB:  Phi(x) - Phi(z0) ~ 2 (omega0 / c) b_perp . l / R1(z0)
//   UNB: Phi(x) - Phi(z0) ~ 2 (omega0 / c) s_d1 T v_perp . l / R1(z0)
// where perp is taken against the look-direction from gamma_1 to z0.

#include <string>
#include <vector>

#include "dsar/geometry.hpp"
#include "dsar/imaging.hpp"

namespace dsar {

/// Integer-pixel translation applied to the second image (columns, rows).
struct RegistrationOffset {
  long dx = 0;
  long dy = 0;

  friend bool operator==(const RegistrationOffset&, const RegistrationOffset&) = default;
};

struct CoregisteredPair {
  ComplexImage first;
  ComplexImage second;
  RegistrationOffset offset;
};

struct Interferogram {
  ComplexImage image;  // I1 * conj(I2)
  RegistrationOffset offset;
};

struct PhaseMeasurement {
  double wrapped = 0.0;    // (-pi, pi]
  double unwrapped = 0.0;  // wrapped + 2 pi * ambiguity_index
  long ambiguity_index = 0;
  Modality modality = Modality::Wideband;
  bool resolved = false;
};

/// Wraps to (-pi, pi].
double wrap_phase(double phase);

/// Translates image 2 by whole pixels so both peaks coincide; vacated pixels
/// are zero. offset = peak1 - peak2.
CoregisteredPair coregister(const ComplexImage& i1, const ComplexImage& i2);

/// Pointwise I1 conj(I2). Throws ContractError on grid mismatch.
Interferogram interferogram(const ComplexImage& i1, const ComplexImage& i2);
Interferogram interferogram(const CoregisteredPair& pair);

/// Picks k minimizing |wrapped + 2 pi k - predicted|; exact midpoints go to
/// the smaller |k|.
PhaseMeasurement resolve_ambiguity(double wrapped, double predicted,
                                   Modality modality = Modality::Wideband);

double wb_phase_model(const Vec3& x, const Trajectory& traj1, double s01, const Trajectory& traj2,
                      double s02, double omega0, const PhysicalConstants& consts = {});

double unb_phase_model(const Vec3& x, const Trajectory& traj1, double s_d1, const Trajectory& traj2,
                       double s_d2, double omega0, double t_phi,
                       const PhysicalConstants& consts = {});

/// Which side of the reciprocity identity b_perp . l = l_perp . b to evaluate.
enum class ProjectionForm { ProjectBaseline, ProjectOffset };

struct FlattenedPhase {
  double value = 0.0;      // measured minus reference
  double reference = 0.0;  // model phase at z0
  std::vector<std::string> warnings;
};

/// Subtracts the WB model phase of the reference point z0 (antenna 2 at
/// gamma_1(s01) + b).
FlattenedPhase flatten_wb(const PhaseMeasurement& phase, const Vec3& z0, const Trajectory& traj1,
                          double s01, const Vec3& b, double omega0,
                          const PhysicalConstants& consts = {});

/// Subtracts the UNB model phase of z0.
FlattenedPhase flatten_unb(const PhaseMeasurement& phase, const Vec3& z0, const Trajectory& traj1,
                           double s_d1, const Trajectory& traj2, double s_d2, double omega0,
                           double t_phi, const PhysicalConstants& consts = {});

/// 2 (omega0 / c) b_perp . l / R1(z0). Appends a warning when |l| >= R1 / 100.
double flatten_wb_linear(const Vec3& l, const Vec3& z0, const Trajectory& traj1, double s01,
                         const Vec3& b, double omega0, const PhysicalConstants& consts = {},
                         ProjectionForm form = ProjectionForm::ProjectBaseline,
                         std::vector<std::string>* warnings = nullptr);

/// 2 (omega0 / c) s_d1 T v_perp . l / R1(z0, s_d1), same validation.
double flatten_unb_linear(const Vec3& l, const Vec3& z0, const Trajectory& traj1, double s_d1,
                          const Vec3& v, double omega0, double t_phi,
                          const PhysicalConstants& consts = {},
                          ProjectionForm form = ProjectionForm::ProjectBaseline,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace dsar
