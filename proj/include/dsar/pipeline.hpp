#pragma once

// simulate -> image -> interferogram -> solve, each stage reading the files
// written by the previous one. Layout under the output directory:
//
//   <modality>/data{1,2}.dsar            simulate
//   <modality>/image{1,2}.dsar (+ pgm)   image
//   <modality>/interferogram.dsar,
//   <modality>/measurement.json          interferogram
//   <modality>/residuals.csv (+ pgm),
//   <modality>/solution.json             solve
//   manifest.json                        run
//
// <modality> is "wideband" or "unb".

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsar/config.hpp"
#include "dsar/heightsolver.hpp"
#include "dsar/interferometry.hpp"

namespace dsar {

enum class Stage { Simulate, Image, Interferogram, Solve };

std::string to_string(Stage s);

/// Missing output of an earlier stage.
class StageDependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FileRecord {
  std::string path;  // relative to the output directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct ModalityResult {
  Modality modality = Modality::Wideband;
  Peak peak1, peak2;
  Vec3 refined1{}, refined2{};
  RegistrationOffset offset;
  double predicted_phase = 0.0;
  double pixel_phase = 0.0;
  double equalization_ratio = 1.0;
  std::optional<WBMeasurement> wb;
  std::optional<UNBMeasurement> unb;
  SearchGrid search;
  Solution solution;
  std::vector<std::string> warnings;
};

struct RunResult {
  std::filesystem::path out_dir;
  std::optional<ModalityResult> wideband;
  std::optional<ModalityResult> unb;
  std::vector<FileRecord> files;
  std::map<std::string, double> timings_s;
};

/// Runs one stage for every modality in the config.
void run_stage(Stage stage, const RunConfig& cfg, const std::filesystem::path& out,
               std::map<std::string, double>* timings = nullptr);

/// All stages, then manifest.json. On failure the manifest is still written
/// with status "failed" and the error, and the exception is rethrown.
RunResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out);

/// Reads measurement.json / solution.json written by earlier stages.
ModalityResult load_modality_result(const std::filesystem::path& out, Modality modality);

/// Every file under out except manifest.json, sorted by path.
std::vector<FileRecord> inventory(const std::filesystem::path& out);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Reference-experiment expectations: peak pixels within one pixel of the
/// reported ones and the target recovered within (1 m, 0, 0.5 m).
std::vector<Check> paper_checks(const RunResult& wb, const RunResult& unb);

struct ReproduceResult {
  RunResult wideband;
  RunResult unb;
  std::vector<Check> checks;
  bool all_pass() const;
};

/// Runs both shipped configs into out/paper-wb and out/paper-unb.
ReproduceResult reproduce_paper(const std::filesystem::path& out, bool full);

}  // namespace dsar
