#include "dsar/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dsar/errors.hpp"
#include "dsar/io.hpp"
#include "json.hpp"

namespace dsar {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string dir_name(Modality m) { return m == Modality::Wideband ? "wideband" : "unb"; }

fs::path need(const fs::path& p, Stage producer) {
  if (!fs::exists(p))
    throw StageDependencyError("missing " + p.string() + "; run the '" + to_string(producer) +
                               "' stage first");
  return p;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return json::parse(is);
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json peak_json(const Peak& p) {
  return {{"row", p.row},
          {"col", p.col},
          {"position_m", vec_json(p.position)},
          {"value", {p.value.real(), p.value.imag()}}};
}
Peak peak_from(const json& j) {
  Peak p;
  p.row = j.at("row").get<std::size_t>();
  p.col = j.at("col").get<std::size_t>();
  p.position = vec_from(j.at("position_m"));
  p.value = {j.at("value").at(0).get<double>(), j.at("value").at(1).get<double>()};
  return p;
}

json phase_json(const PhaseMeasurement& m) {
  return {{"wrapped_rad", m.wrapped},
          {"unwrapped_rad", m.unwrapped},
          {"ambiguity_index", m.ambiguity_index},
          {"modality", to_string(m.modality)},
          {"resolved", m.resolved}};
}
PhaseMeasurement phase_from(const json& j) {
  PhaseMeasurement m;
  m.wrapped = j.at("wrapped_rad").get<double>();
  m.unwrapped = j.at("unwrapped_rad").get<double>();
  m.ambiguity_index = j.at("ambiguity_index").get<long>();
  m.modality = modality_from_string(j.at("modality").get<std::string>());
  m.resolved = j.at("resolved").get<bool>();
  return m;
}

json search_json(const SearchGrid& g) {
  return {{"x_min_m", g.x_min},    {"x_max_m", g.x_max},   {"x_step_m", g.x_step},
          {"height_min_m", g.h_min}, {"height_max_m", g.h_max}, {"height_step_m", g.h_step},
          {"fixed_y_m", g.fixed_y}, {"full_3d", g.full_3d}, {"y_min_m", g.y_min},
          {"y_max_m", g.y_max},    {"y_step_m", g.y_step}};
}
SearchGrid search_from(const json& j) {
  SearchGrid g;
  g.x_min = j.at("x_min_m").get<double>();
  g.x_max = j.at("x_max_m").get<double>();
  g.x_step = j.at("x_step_m").get<double>();
  g.h_min = j.at("height_min_m").get<double>();
  g.h_max = j.at("height_max_m").get<double>();
  g.h_step = j.at("height_step_m").get<double>();
  g.fixed_y = j.at("fixed_y_m").get<double>();
  g.full_3d = j.at("full_3d").get<bool>();
  g.y_min = j.at("y_min_m").get<double>();
  g.y_max = j.at("y_max_m").get<double>();
  g.y_step = j.at("y_step_m").get<double>();
  return g;
}

json solution_json(const Solution& s) {
  json res = json::array();
  for (int i = 0; i < 3; ++i)
    res.push_back({{"name", s.names[i]}, {"value", s.residuals[i]}, {"informative", s.informative[i]}});
  json cands = json::array();
  for (const auto& c : s.candidates) cands.push_back(vec_json(c));
  return {{"position_m", vec_json(s.position)},
          {"combined_residual", s.combined},
          {"residuals", res},
          {"degenerate", s.degenerate},
          {"wrapped_fallback", s.wrapped_fallback},
          {"candidates_m", cands}};
}
Solution solution_from(const json& j) {
  Solution s;
  s.position = vec_from(j.at("position_m"));
  s.combined = j.at("combined_residual").get<double>();
  for (std::size_t i = 0; i < 3 && i < j.at("residuals").size(); ++i) {
    const auto& v = j.at("residuals").at(i);
    s.names[i] = v.at("name").get<std::string>();
    s.residuals[i] = v.at("value").get<double>();
    s.informative[i] = v.at("informative").get<bool>();
  }
  s.degenerate = j.at("degenerate").get<bool>();
  s.wrapped_fallback = j.at("wrapped_fallback").get<bool>();
  for (const auto& c : j.at("candidates_m")) s.candidates.push_back(vec_from(c));
  return s;
}

WbGeometry wb_geometry(const RunConfig& cfg) {
  return {cfg.wideband->antenna1, cfg.wideband->antenna2, cfg.wideband->config.omega0, cfg.consts};
}
UnbGeometry unb_geometry(const RunConfig& cfg) {
  return {cfg.unb->antenna1, cfg.unb->antenna2, cfg.unb->config.omega0, cfg.unb->config.t_phi,
          cfg.consts};
}

std::vector<Modality> modalities(const RunConfig& cfg) {
  std::vector<Modality> out;
  if (cfg.runs_wideband()) out.push_back(Modality::Wideband);
  if (cfg.runs_unb()) out.push_back(Modality::UNB);
  return out;
}

template <class Fn>
void timed(std::map<std::string, double>* timings, const std::string& key, Fn&& fn) {
  const auto t0 = Clock::now();
  fn();
  if (timings) (*timings)[key] = std::chrono::duration<double>(Clock::now() - t0).count();
}

// ------------------------------------------------------------------ stages

void simulate(const RunConfig& cfg, Modality m, const fs::path& dir) {
  if (m == Modality::Wideband) {
    const auto wc = cfg.effective_wideband();
    write_dataset(dir / "data1.dsar", simulate_wideband(cfg.scene, cfg.wideband->antenna1, wc, cfg.consts));
    write_dataset(dir / "data2.dsar", simulate_wideband(cfg.scene, cfg.wideband->antenna2, wc, cfg.consts));
  } else {
    const auto uc = cfg.effective_unb();
    write_dataset(dir / "data1.dsar", simulate_unb(cfg.scene, cfg.unb->antenna1, uc, cfg.consts));
    write_dataset(dir / "data2.dsar", simulate_unb(cfg.scene, cfg.unb->antenna2, uc, cfg.consts));
  }
}

void emit_image(const fs::path& dir, const std::string& stem, ComplexImage img,
                const RunConfig& cfg, const std::string& traj_id) {
  img.provenance.trajectory_id = traj_id;
  img.provenance.config_hash = cfg.hash();
  write_image(dir / (stem + ".dsar"), img);
  write_magnitude_pgm(dir / (stem + "_magnitude.pgm"), img);
  write_phase_pgm(dir / (stem + "_phase.pgm"), img);
}

void image(const RunConfig& cfg, Modality m, const fs::path& dir) {
  const std::string mod = dir_name(m);
  for (int i : {1, 2}) {
    const auto data_path = need(dir / ("data" + std::to_string(i) + ".dsar"), Stage::Simulate);
    ComplexImage img;
    if (m == Modality::Wideband) {
      const auto& traj = i == 1 ? cfg.wideband->antenna1 : cfg.wideband->antenna2;
      img = backproject_wideband(read_wideband_dataset(data_path), traj, cfg.grid, cfg.consts);
    } else {
      const auto& traj = i == 1 ? cfg.unb->antenna1 : cfg.unb->antenna2;
      img = backproject_unb(read_unb_dataset(data_path), traj, cfg.grid, cfg.consts);
    }
    emit_image(dir, "image" + std::to_string(i), std::move(img), cfg, mod + ".antenna" + std::to_string(i));
  }
}

void interfere(const RunConfig& cfg, Modality m, const fs::path& dir) {
  const auto img1 = read_image(need(dir / "image1.dsar", Stage::Image));
  const auto img2 = read_image(need(dir / "image2.dsar", Stage::Image));
  json j;
  j["modality"] = to_string(m);
  if (m == Modality::Wideband) {
    const auto geom = wb_geometry(cfg);
    const auto d1 = read_wideband_dataset(need(dir / "data1.dsar", Stage::Simulate));
    const auto d2 = read_wideband_dataset(need(dir / "data2.dsar", Stage::Simulate));
    const WidebandBackprojector b1(d1, geom.traj1, cfg.consts), b2(d2, geom.traj2, cfg.consts);
    const auto r = measure_wb(img1, img2, [&](const Vec3& z) { return b1.at(z); },
                              [&](const Vec3& z) { return b2.at(z); }, geom);
    const auto ifg = interferogram(coregister(img1, img2));
    emit_image(dir, "interferogram", ifg.image, cfg, "wideband.antenna1*conj(antenna2)");
    j["peak1"] = peak_json(r.peak1);
    j["peak2"] = peak_json(r.peak2);
    j["refined1_m"] = vec_json(r.refined1);
    j["refined2_m"] = vec_json(r.refined2);
    j["offset_px"] = {r.offset.dx, r.offset.dy};
    j["predicted_phase_rad"] = r.predicted_phase;
    j["pixel_phase_rad"] = r.pixel_phase;
    j["equalization_ratio"] = 1.0;
    j["measurement"] = {{"R1_m", r.meas.R1},
                        {"doppler1_m_per_s", r.meas.doppler1},
                        {"phi", phase_json(r.meas.phi)},
                        {"s01_s", r.meas.s01},
                        {"s02_s", r.meas.s02}};
  } else {
    const auto geom = unb_geometry(cfg);
    const auto d1 = read_unb_dataset(need(dir / "data1.dsar", Stage::Simulate));
    const auto d2 = read_unb_dataset(need(dir / "data2.dsar", Stage::Simulate));
    const UnbBackprojector b1(d1, geom.traj1, cfg.consts), b2(d2, geom.traj2, cfg.consts);
    const auto r = measure_unb(img1, img2, [&](const Vec3& z) { return b1.at(z); },
                               [&](const Vec3& z) { return b2.at(z); }, geom);
    const auto eq2 = equalize_doppler_rate_factor(img2, r.meas.s_d2, r.meas.s_d1);
    const auto ifg = interferogram(coregister(img1, eq2));
    emit_image(dir, "interferogram", ifg.image, cfg, "unb.antenna1*conj(antenna2 equalized)");
    j["peak1"] = peak_json(r.peak1);
    j["peak2"] = peak_json(r.peak2);
    j["refined1_m"] = vec_json(r.refined1);
    j["refined2_m"] = vec_json(r.refined2);
    j["offset_px"] = {r.offset.dx, r.offset.dy};
    j["predicted_phase_rad"] = r.predicted_phase;
    j["pixel_phase_rad"] = r.pixel_phase;
    j["equalization_ratio"] = r.equalization_ratio;
    j["measurement"] = {{"f1_rad_per_s", r.meas.f1},
                        {"f1_rate_rad_per_s2", r.meas.f1_rate},
                        {"phi", phase_json(r.meas.phi)},
                        {"s_d1_s", r.meas.s_d1},
                        {"s_d2_s", r.meas.s_d2}};
    std::vector<std::string> warnings = d1.warnings;
    warnings.insert(warnings.end(), d2.warnings.begin(), d2.warnings.end());
    j["warnings"] = warnings;
  }
  if (!j.contains("warnings")) j["warnings"] = json::array();
  write_json(dir / "measurement.json", j);
}

void solve(const RunConfig& cfg, Modality m, const fs::path& dir) {
  const json j = read_json(need(dir / "measurement.json", Stage::Interferogram));
  SearchGrid grid = cfg.search;
  if (cfg.fixed_y_from_peak) grid.fixed_y = vec_from(j.at("peak1").at("position_m")).y;
  ResidualSet set;
  const auto& mj = j.at("measurement");
  if (m == Modality::Wideband) {
    WBMeasurement meas;
    meas.R1 = mj.at("R1_m").get<double>();
    meas.doppler1 = mj.at("doppler1_m_per_s").get<double>();
    meas.phi = phase_from(mj.at("phi"));
    meas.s01 = mj.at("s01_s").get<double>();
    meas.s02 = mj.at("s02_s").get<double>();
    set = residuals_wb(meas, wb_geometry(cfg), grid, cfg.surface);
  } else {
    UNBMeasurement meas;
    meas.f1 = mj.at("f1_rad_per_s").get<double>();
    meas.f1_rate = mj.at("f1_rate_rad_per_s2").get<double>();
    meas.phi = phase_from(mj.at("phi"));
    meas.s_d1 = mj.at("s_d1_s").get<double>();
    meas.s_d2 = mj.at("s_d2_s").get<double>();
    set = residuals_unb(meas, unb_geometry(cfg), grid, cfg.surface);
  }
  const Solution sol = pick_solution(set, grid);
  for (const auto& map : set.maps) write_residual_pgm(dir / ("residual_" + map.name + ".pgm"), map);
  write_residual_pgm(dir / "residual_combined.pgm", set.combined);
  write_residuals_csv(dir / "residuals.csv", set, grid);
  json out;
  out["modality"] = to_string(m);
  out["phase_surface"] = to_string(cfg.surface);
  out["search"] = search_json(grid);
  out["medians"] = set.medians;
  out["solution"] = solution_json(sol);
  write_json(dir / "solution.json", out);
}

std::string check_detail(const Vec3& got, const Vec3& want) {
  std::ostringstream os;
  os << "got (" << got.x << ", " << got.y << ", " << got.z << "), expected (" << want.x << ", "
     << want.y << ", " << want.z << ")";
  return os.str();
}

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Simulate:
      return "simulate";
    case Stage::Image:
      return "image";
    case Stage::Interferogram:
      return "interferogram";
    case Stage::Solve:
      return "solve";
  }
  return "unknown";
}

void run_stage(Stage stage, const RunConfig& cfg, const fs::path& out,
               std::map<std::string, double>* timings) {
  cfg.validate();
  for (Modality m : modalities(cfg)) {
    const fs::path dir = out / dir_name(m);
    fs::create_directories(dir);
    timed(timings, dir_name(m) + "." + to_string(stage), [&] {
      switch (stage) {
        case Stage::Simulate:
          simulate(cfg, m, dir);
          break;
        case Stage::Image:
          image(cfg, m, dir);
          break;
        case Stage::Interferogram:
          interfere(cfg, m, dir);
          break;
        case Stage::Solve:
          solve(cfg, m, dir);
          break;
      }
    });
  }
}

ModalityResult load_modality_result(const fs::path& out, Modality modality) {
  const fs::path dir = out / dir_name(modality);
  const json mj = read_json(need(dir / "measurement.json", Stage::Interferogram));
  const json sj = read_json(need(dir / "solution.json", Stage::Solve));
  ModalityResult r;
  r.modality = modality;
  r.peak1 = peak_from(mj.at("peak1"));
  r.peak2 = peak_from(mj.at("peak2"));
  r.refined1 = vec_from(mj.at("refined1_m"));
  r.refined2 = vec_from(mj.at("refined2_m"));
  r.offset = {mj.at("offset_px").at(0).get<long>(), mj.at("offset_px").at(1).get<long>()};
  r.predicted_phase = mj.at("predicted_phase_rad").get<double>();
  r.pixel_phase = mj.at("pixel_phase_rad").get<double>();
  r.equalization_ratio = mj.at("equalization_ratio").get<double>();
  r.warnings = mj.at("warnings").get<std::vector<std::string>>();
  const auto& m = mj.at("measurement");
  if (modality == Modality::Wideband) {
    WBMeasurement w;
    w.R1 = m.at("R1_m").get<double>();
    w.doppler1 = m.at("doppler1_m_per_s").get<double>();
    w.phi = phase_from(m.at("phi"));
    w.s01 = m.at("s01_s").get<double>();
    w.s02 = m.at("s02_s").get<double>();
    r.wb = w;
  } else {
    UNBMeasurement u;
    u.f1 = m.at("f1_rad_per_s").get<double>();
    u.f1_rate = m.at("f1_rate_rad_per_s2").get<double>();
    u.phi = phase_from(m.at("phi"));
    u.s_d1 = m.at("s_d1_s").get<double>();
    u.s_d2 = m.at("s_d2_s").get<double>();
    r.unb = u;
  }
  r.search = search_from(sj.at("search"));
  r.solution = solution_from(sj.at("solution"));
  return r;
}

std::vector<FileRecord> inventory(const fs::path& out) {
  std::vector<FileRecord> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), out).generic_string();
    if (rel == "manifest.json") continue;
    files.push_back({rel, sha256_file(e.path()), e.file_size()});
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return files;
}

RunResult run_pipeline(const RunConfig& cfg, const fs::path& out) {
  RunResult result;
  result.out_dir = out;
  json manifest;
  manifest["software"] = {{"name", "dsar"}, {"version", DSAR_VERSION}};
  manifest["config_source"] = cfg.source;
  manifest["config"] = json::parse(cfg.echo_json());
  manifest["config_hash"] = cfg.hash();
  manifest["conventions"] = {
      {"slow_time", "seconds, s = 0 at the pass midpoint"},
      {"doppler", "f_d = -(omega0 / c) L . gamma', L = (x - gamma) / |x - gamma|"},
      {"wideband_phase", "Phi = 2 (omega0 / c) (R1 - R2) at the zero-Doppler times"},
      {"unb_phase", "Phi = 2 s_d1 T (f1 - f2); exact: L1.g1' - L2.g2' = -c Phi / (2 s_d1 T omega0); "
                    "linearized: L1.v - b_perp.g2' / R1 = +c Phi / (2 s_d1 T omega0)"},
      {"equalization", "image 2 phase scaled by s_d1 / s_d2"},
      {"phase_surface", to_string(cfg.surface)}};
  std::exception_ptr failure;
  try {
    cfg.validate();
    fs::create_directories(out);
    for (Stage s : {Stage::Simulate, Stage::Image, Stage::Interferogram, Stage::Solve})
      run_stage(s, cfg, out, &result.timings_s);
    json results = json::object();
    for (Modality m : modalities(cfg)) {
      auto r = load_modality_result(out, m);
      const fs::path dir = out / dir_name(m);
      json entry = read_json(dir / "measurement.json");
      entry["solve"] = read_json(dir / "solution.json");
      results[dir_name(m)] = entry;
      (m == Modality::Wideband ? result.wideband : result.unb) = std::move(r);
    }
    manifest["results"] = results;
    manifest["status"] = "ok";
  } catch (const std::exception& e) {
    failure = std::current_exception();
    manifest["status"] = "failed";
    manifest["error"] = e.what();
  }
  manifest["timings_s"] = result.timings_s;
  if (fs::exists(out)) {
    result.files = inventory(out);
    json files = json::array();
    for (const auto& f : result.files)
      files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    manifest["files"] = files;
    write_json(out / "manifest.json", manifest);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<Check> paper_checks(const RunResult& wb, const RunResult& unb) {
  std::vector<Check> checks;
  auto peak_check = [&](const std::string& name, const std::optional<ModalityResult>& r, int which,
                        double want_x, double want_y) {
    Check c{name, false, "no result"};
    if (r) {
      const Vec3 got = (which == 1 ? r->peak1 : r->peak2).position;
      c.pass = std::abs(got.x - want_x) <= 1.0 && std::abs(got.y - want_y) <= 1.0;
      c.detail = check_detail(got, {want_x, want_y, 0.0});
    }
    checks.push_back(c);
  };
  auto solution_check = [&](const std::string& name, const std::optional<ModalityResult>& r) {
    Check c{name, false, "no result"};
    if (r) {
      const Vec3 got = r->solution.position;
      c.pass = std::abs(got.x + 20.0) <= 1.0 && got.y == -31.0 && std::abs(got.z - 50.0) <= 0.5;
      c.detail = check_detail(got, {-20.0, -31.0, 50.0});
    }
    checks.push_back(c);
  };
  peak_check("wideband peak, antenna 1", wb.wideband, 1, -41.0, -31.0);
  peak_check("wideband peak, antenna 2", wb.wideband, 2, -48.0, -31.0);
  solution_check("wideband solution", wb.wideband);
  peak_check("unb peak, antenna 1", unb.unb, 1, -34.0, -31.0);
  peak_check("unb peak, antenna 2", unb.unb, 2, -48.0, -31.0);
  solution_check("unb solution", unb.unb);
  return checks;
}

bool ReproduceResult::all_pass() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

ReproduceResult reproduce_paper(const fs::path& out, bool full) {
  ReproduceResult r;
  RunConfig wb = parse_config(builtin_config_text("paper-wb"), "paper-wb");
  RunConfig unb = parse_config(builtin_config_text("paper-unb"), "paper-unb");
  wb.full = unb.full = full;
  r.wideband = run_pipeline(wb, out / "paper-wb");
  r.unb = run_pipeline(unb, out / "paper-unb");
  r.checks = paper_checks(r.wideband, r.unb);
  return r;
}

}  // namespace dsar
