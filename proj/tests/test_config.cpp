#include <filesystem>
#include <string>

#include "doctest.h"
#include "dsar/config.hpp"
#include "dsar/errors.hpp"

using namespace dsar;

namespace {

const std::filesystem::path kConfigDir = DSAR_CONFIG_DIR;

std::string minimal_wb(const std::string& extra = "") {
  return R"([run]
modality = wideband
[target.a]
ground_position_m = 1, 2
height_m = 3
[wideband]
center_frequency_hz = 8e9
bandwidth_hz = 1e8
n_freq = 64
n_slow = 64
[wideband.antenna1]
start_m = -7100, -500, 3000
velocity_m_per_s = 0, 100, 0
slow_time_start_s = -5
slow_time_end_s = 5
[wideband.antenna2]
start_m = -7100, -500, 4000
velocity_m_per_s = 0, 100, 0
slow_time_start_s = -5
slow_time_end_s = 5
)" + extra;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.ini").validate();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped wideband config") {
  const auto cfg = load_config(kConfigDir / "paper-wb.ini");
  CHECK(cfg.name == "paper-wb");
  CHECK(cfg.modality == RunModality::Wideband);
  REQUIRE(cfg.scene.size() == 1);
  CHECK(cfg.scene[0].position() == Vec3{-20, -31, 50});
  REQUIRE(cfg.wideband.has_value());
  CHECK(cfg.wideband->antenna1.start() == Vec3{-7100, -500, 3000});
  CHECK(cfg.wideband->antenna2.start() == Vec3{-7100, -500, 4000});
  CHECK(cfg.wideband->config.n_freq == 512);
  CHECK(cfg.wideband->config.n_slow == 1024);
  CHECK(cfg.effective_wideband().n_freq == 256);
  CHECK(cfg.effective_wideband().n_slow == 512);
  CHECK(cfg.grid.nx() == 128);
  CHECK(cfg.search.h_step == 0.5);
  CHECK(cfg.fixed_y_from_peak);
  CHECK(cfg.surface == PhaseSurface::Exact);
  CHECK_NOTHROW(cfg.validate());

  auto full = cfg;
  full.full = true;
  CHECK(full.effective_wideband().n_freq == 512);
  CHECK(full.hash() != cfg.hash());
}

TEST_CASE("shipped UNB config") {
  const auto cfg = load_config(kConfigDir / "paper-unb.ini");
  CHECK(cfg.modality == RunModality::UNB);
  REQUIRE(cfg.unb.has_value());
  CHECK(cfg.unb->antenna2.velocity(0.0) == Vec3{0, 400, 0});
  CHECK(cfg.unb->antenna2.s_begin() == -1.25);
  CHECK_FALSE(cfg.unb->config.mu_span.has_value());
  CHECK(cfg.effective_unb().n_mu == 512);
  CHECK(cfg.effective_unb().n_fast == 256);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("built-in configs match the shipped files") {
  for (const std::string name : {"paper-wb", "paper-unb"}) {
    const auto a = parse_config(builtin_config_text(name), name);
    const auto b = load_config(kConfigDir / (name + ".ini"));
    CHECK(a.echo_json() == b.echo_json());
    CHECK(a.hash() == b.hash());
  }
  CHECK_THROWS_AS(builtin_config_text("nope"), ValidationError);
}

TEST_CASE("hash is stable and sensitive") {
  const auto a = parse_config(minimal_wb());
  const auto b = parse_config(minimal_wb());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 64);
  const auto c = parse_config(minimal_wb("[image]\nspacing_m = 0.5\n"));
  CHECK(c.hash() != a.hash());
}

TEST_CASE("defaults") {
  const auto cfg = parse_config(minimal_wb());
  CHECK(cfg.consts.c == 3.0e8);
  CHECK(cfg.grid == ImageGrid{});
  CHECK(cfg.scene[0].reflectivity == cdouble{1.0, 0.0});
  CHECK(cfg.wideband->antenna1.kind() == TrajectoryKind::Linear);
  CHECK_FALSE(cfg.full);
}

TEST_CASE("errors name the file, section and key") {
  CHECK(error_of(minimal_wb("[image]\nspacing = 1\n")) == "test.ini: [image] spacing: unknown key");
  CHECK(error_of(minimal_wb("[imaging]\n")).find("unknown section [imaging]") != std::string::npos);
  CHECK(error_of(minimal_wb("[image]\nspacing_m = fast\n")).find("[image] spacing_m") != std::string::npos);
  CHECK(error_of(minimal_wb("[image]\nspacing_m = 0\n")).find("[image]") != std::string::npos);
  CHECK(error_of(minimal_wb("[search]\nphase_surface = cone\n")).find("[search] phase_surface") !=
        std::string::npos);
  CHECK(error_of(minimal_wb("[search]\nheight_step_m = -1\n")).find("[search]") != std::string::npos);
  CHECK(error_of("[run]\nmodality = radar\n").find("[run] modality") != std::string::npos);
  CHECK(error_of("[run]\nmodality = unb\n").find("[unb] section required") != std::string::npos);
  CHECK(error_of("[run]\nprofile = huge\n").find("[run] profile") != std::string::npos);
  CHECK(error_of("this is not ini [").find("test.ini") == 0);
}

TEST_CASE("trajectory sections") {
  std::string text = minimal_wb();
  const std::string bad_time = "slow_time_end_s = 5\n[wideband.antenna2]";
  auto replaced = text;
  replaced.replace(replaced.find(bad_time), bad_time.size(), "slow_time_end_s = -6\n[wideband.antenna2]");
  CHECK(error_of(replaced).find("[wideband.antenna1] slow_time_end_s") != std::string::npos);

  auto accel = text;
  accel.replace(accel.find(bad_time), bad_time.size(),
                "slow_time_end_s = 5\nacceleration_m_per_s2 = 0, 1, 0\n[wideband.antenna2]");
  CHECK(error_of(accel).find("acceleration_m_per_s2") != std::string::npos);

  auto curved = accel;
  curved.replace(curved.find("[wideband.antenna1]\n"), 20, "[wideband.antenna1]\nkind = constant_acceleration\n");
  const auto cfg = parse_config(curved);
  CHECK(cfg.wideband->antenna1.kind() == TrajectoryKind::ConstantAcceleration);
  CHECK(cfg.wideband->antenna1.acceleration(0.0) == Vec3{0, 1, 0});

  const std::string missing = "[run]\nmodality = wideband\n[wideband]\ncenter_frequency_hz = 8e9\nbandwidth_hz = 1e8\n";
  CHECK(error_of(missing).find("[wideband.antenna1]") != std::string::npos);
}

TEST_CASE("UNB mu span is validated against the scene before any compute") {
  std::string text = builtin_config_text("paper-unb");
  const std::string key = "mu_half_span = auto";
  REQUIRE(text.find(key) != std::string::npos);
  text.replace(text.find(key), key.size(), "mu_half_span = 1e-9");
  const std::string err = error_of(text);
  CHECK(err.find("mu_half_span") != std::string::npos);
  CHECK(err.find("antenna") != std::string::npos);
}

TEST_CASE("fixed y and search options") {
  const auto cfg = parse_config(minimal_wb("[search]\nfixed_y_m = -31\nfull_3d = false\n"));
  CHECK_FALSE(cfg.fixed_y_from_peak);
  CHECK(cfg.search.fixed_y == -31.0);
  const auto lin = parse_config(minimal_wb("[search]\nphase_surface = linearized\n"));
  CHECK(lin.surface == PhaseSurface::Linearized);
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ValidationError); }
