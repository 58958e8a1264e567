// dsar: simulate, image, interfere and solve from a run configuration.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime
// failure, 3 reference-experiment check failed.

#include <cstdio>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "dsar/errors.hpp"
#include "dsar/io.hpp"
#include "dsar/parallel.hpp"
#include "dsar/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAcceptance = 3;

struct Common {
  std::string config;
  std::string out = "out";
  unsigned threads = 0;
  bool full = false;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
  auto* opt = cmd->add_option("--config", c.config, "run configuration file");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker thread cap (0 = all cores)");
  cmd->add_flag("--full", c.full, "reference sampling instead of the desk profile");
}

dsar::RunConfig load(const Common& c) {
  auto cfg = dsar::load_config(c.config);
  if (c.full) cfg.full = true;
  return cfg;
}

void print_result(const dsar::ModalityResult& r) {
  auto vec = [](const dsar::Vec3& v) {
    std::ostringstream os;
    os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
    return os.str();
  };
  std::cout << dsar::to_string(r.modality) << ":\n"
            << "  peak 1      " << vec(r.peak1.position) << "\n"
            << "  peak 2      " << vec(r.peak2.position) << "\n"
            << "  offset      (" << r.offset.dx << ", " << r.offset.dy << ") px\n"
            << "  phase       " << std::setprecision(10) << (r.wb ? r.wb->phi.unwrapped : r.unb->phi.unwrapped)
            << " rad\n"
            << std::setprecision(6) << "  solution    " << vec(r.solution.position) << "\n";
  for (const auto& w : r.warnings) std::cout << "  warning: " << w << "\n";
}

int print_checks(const dsar::ReproduceResult& r) {
  std::size_t width = 0;
  for (const auto& c : r.checks) width = std::max(width, c.name.size());
  for (const auto& c : r.checks)
    std::cout << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width) + 2)
              << c.name << c.detail << "\n";
  return r.all_pass() ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wideband and Doppler-SAR interferometry: simulation, imaging and height recovery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DSAR_VERSION);

  Common common;
  std::map<std::string, dsar::Stage> stages = {{"simulate", dsar::Stage::Simulate},
                                                {"image", dsar::Stage::Image},
                                                {"interferogram", dsar::Stage::Interferogram},
                                                {"solve", dsar::Stage::Solve}};
  std::map<std::string, CLI::App*> stage_cmds;
  stage_cmds["simulate"] = app.add_subcommand("simulate", "synthesize both antennas' data");
  stage_cmds["image"] = app.add_subcommand("image", "backproject data written by simulate");
  stage_cmds["interferogram"] =
      app.add_subcommand("interferogram", "co-register, interfere and measure the peak phase");
  stage_cmds["solve"] = app.add_subcommand("solve", "grid-search the target position and height");
  for (auto& [name, cmd] : stage_cmds) add_common(cmd, common, true);

  auto* run = app.add_subcommand("run", "all stages plus a manifest");
  add_common(run, common, true);

  auto* repro = app.add_subcommand("reproduce-paper", "run both shipped configs and check the results");
  add_common(repro, common, false);

  std::string input, format = "csv", output;
  auto* exp = app.add_subcommand("export", "convert a .dsar image to CSV or PGM");
  exp->add_option("--input", input, "image container")->required()->check(CLI::ExistingFile);
  exp->add_option("--format", format, "csv | magnitude-pgm | phase-pgm")
      ->check(CLI::IsMember({"csv", "magnitude-pgm", "phase-pgm"}));
  exp->add_option("--output", output, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    dsar::set_thread_count(common.threads);
    for (auto& [name, cmd] : stage_cmds) {
      if (!cmd->parsed()) continue;
      const auto cfg = load(common);
      dsar::run_stage(stages.at(name), cfg, common.out);
      std::cout << name << ": wrote " << fs::path(common.out).string() << "\n";
      return 0;
    }
    if (run->parsed()) {
      const auto cfg = load(common);
      const auto result = dsar::run_pipeline(cfg, common.out);
      if (result.wideband) print_result(*result.wideband);
      if (result.unb) print_result(*result.unb);
      std::cout << "manifest: " << (fs::path(common.out) / "manifest.json").string() << "\n";
      return 0;
    }
    if (repro->parsed()) {
      const auto out = common.out == "out" ? fs::path("out") / "reproduce" : fs::path(common.out);
      const auto result = dsar::reproduce_paper(out, common.full);
      return print_checks(result);
    }
    if (exp->parsed()) {
      const auto img = dsar::read_image(input);
      if (format == "csv") dsar::write_image_csv(output, img);
      else if (format == "magnitude-pgm") dsar::write_magnitude_pgm(output, img);
      else dsar::write_phase_pgm(output, img);
      std::cout << "export: wrote " << output << "\n";
      return 0;
    }
  } catch (const dsar::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
