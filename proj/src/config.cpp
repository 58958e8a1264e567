#include "dsar/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "dsar/errors.hpp"
#include "dsar/io.hpp"
#include "dsar_builtin_configs.hpp"
#include "json.hpp"

namespace dsar {

namespace {

namespace pt = boost::property_tree;
using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One INI section with key tracking, so unknown keys can be reported.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name, std::string source)
      : tree_(tree), name_(std::move(name)), source_(std::move(source)) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '/'));
    if (!v) return std::nullopt;
    std::string s = *v;
    boost::algorithm::trim(s);
    return s;
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    auto v = raw(key);
    if (v) return *v;
    if (fallback) return *fallback;
    fail(key, "missing required key");
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    auto v = raw(key);
    if (!v) {
      if (fallback) return *fallback;
      fail(key, "missing required key");
    }
    return parse_number(key, *v);
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    auto v = raw(key);
    if (!v) {
      if (fallback) return *fallback;
      fail(key, "missing required key");
    }
    const double d = parse_number(key, *v);
    if (d < 0.0 || d != std::floor(d) || d > 1e12) fail(key, "expected a non-negative integer, got '" + *v + "'");
    return static_cast<std::size_t>(d);
  }

  bool flag(const std::string& key, bool fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    std::string s = boost::algorithm::to_lower_copy(*v);
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    fail(key, "expected true or false, got '" + *v + "'");
  }

  std::vector<double> numbers(const std::string& key, std::size_t n,
                              std::optional<std::vector<double>> fallback = std::nullopt) {
    auto v = raw(key);
    if (!v) {
      if (fallback) return *fallback;
      fail(key, "missing required key");
    }
    std::vector<std::string> parts;
    boost::algorithm::split(parts, *v, boost::algorithm::is_any_of(","));
    if (parts.size() != n)
      fail(key, "expected " + std::to_string(n) + " comma-separated values, got '" + *v + "'");
    std::vector<double> out;
    for (auto& p : parts) {
      boost::algorithm::trim(p);
      out.push_back(parse_number(key, p));
    }
    return out;
  }

  Vec3 vec3(const std::string& key, std::optional<Vec3> fallback = std::nullopt) {
    std::optional<std::vector<double>> fb;
    if (fallback) fb = std::vector<double>{fallback->x, fallback->y, fallback->z};
    auto v = numbers(key, 3, fb);
    return {v[0], v[1], v[2]};
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      (void)child;
      if (!used_.count(key)) fail(key, "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ValidationError(source_ + ": [" + name_ + "] " + key + ": " + what);
  }

 private:
  double parse_number(const std::string& key, const std::string& s) const {
    std::size_t pos = 0;
    double d = 0.0;
    try {
      d = std::stod(s, &pos);
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(d)) fail(key, "expected a finite number, got '" + s + "'");
    return d;
  }

  const pt::ptree* tree_;
  std::string name_;
  std::string source_;
  std::set<std::string> used_;
};

Trajectory read_trajectory(Section& s) {
  if (!s.present()) s.fail("kind", "section is required for the selected modality");
  const std::string kind = s.text("kind", "linear");
  const Vec3 start = s.vec3("start_m");
  const Vec3 vel = s.vec3("velocity_m_per_s");
  const double s1 = s.number("slow_time_start_s");
  const double s2 = s.number("slow_time_end_s");
  if (!(s1 < s2)) s.fail("slow_time_end_s", "must exceed slow_time_start_s");
  if (kind == "linear") {
    const Vec3 acc = s.vec3("acceleration_m_per_s2", Vec3{});
    if (!(acc == Vec3{})) s.fail("acceleration_m_per_s2", "must be zero for a linear trajectory");
    return Trajectory::linear(start, vel, s1, s2);
  }
  if (kind == "constant_acceleration")
    return Trajectory::constant_acceleration(start, vel, s.vec3("acceleration_m_per_s2"), s1, s2);
  s.fail("kind", "expected linear or constant_acceleration, got '" + kind + "'");
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json trajectory_json(const Trajectory& t) {
  return {{"kind", to_string(t.kind())},
          {"start_m", vec_json(t.start())},
          {"velocity_m_per_s", vec_json(t.velocity(t.s_begin()))},
          {"acceleration_m_per_s2", vec_json(t.acceleration(t.s_begin()))},
          {"slow_time_start_s", t.s_begin()},
          {"slow_time_end_s", t.s_end()}};
}

std::size_t halve(std::size_t n) { return std::max<std::size_t>(2, n / 2); }

}  // namespace

std::string to_string(RunModality m) {
  switch (m) {
    case RunModality::Wideband:
      return "wideband";
    case RunModality::UNB:
      return "unb";
    case RunModality::Both:
      return "both";
  }
  return "unknown";
}

WidebandConfig RunConfig::effective_wideband() const {
  if (!wideband) throw ValidationError(source + ": [wideband] section missing");
  WidebandConfig c = wideband->config;
  if (!full) {
    c.n_freq = halve(c.n_freq);
    c.n_slow = halve(c.n_slow);
  }
  return c;
}

UNBConfig RunConfig::effective_unb() const {
  if (!unb) throw ValidationError(source + ": [unb] section missing");
  UNBConfig c = unb->config;
  if (!full) {
    c.n_fast = halve(c.n_fast);
    c.n_slow = halve(c.n_slow);
  }
  return c;
}

void RunConfig::validate() const {
  auto wrap = [&](const std::string& where, auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      throw ValidationError(source + ": " + where + ": " + e.what());
    }
  };
  wrap("[constants]", [&] { consts.validate(); });
  wrap("[image]", [&] { grid.validate(); });
  wrap("[search]", [&] { search.validate(); });
  for (const auto& sc : scene) {
    if (!std::isfinite(sc.x) || !std::isfinite(sc.y) || !std::isfinite(sc.height) ||
        !std::isfinite(sc.reflectivity.real()) || !std::isfinite(sc.reflectivity.imag()))
      throw ValidationError(source + ": [target] values must be finite");
  }
  if (runs_wideband()) {
    if (!wideband) throw ValidationError(source + ": [wideband] section required for modality " + to_string(modality));
    wrap("[wideband]", [&] { effective_wideband().validate(); });
  }
  if (runs_unb()) {
    if (!unb) throw ValidationError(source + ": [unb] section required for modality " + to_string(modality));
    const UNBConfig cfg = effective_unb();
    wrap("[unb]", [&] { cfg.validate(); });
    int i = 1;
    for (const Trajectory* t : {&unb->antenna1, &unb->antenna2}) {
      const std::string where = "[unb] mu_half_span (antenna" + std::to_string(i++) + ")";
      wrap(where, [&] {
        const double span = cfg.mu_span ? *cfg.mu_span : auto_mu_span(scene, *t, cfg, consts);
        validate_mu_span(span, scene, *t, cfg, consts);
      });
    }
  }
}

std::string RunConfig::echo_json() const {
  json j;
  j["name"] = name;
  j["modality"] = to_string(modality);
  j["seed"] = seed;
  j["profile"] = full ? "full" : "desk";
  j["propagation_speed_m_per_s"] = consts.c;
  json targets = json::array();
  for (const auto& s : scene)
    targets.push_back({{"ground_position_m", {s.x, s.y}},
                       {"height_m", s.height},
                       {"reflectivity", {s.reflectivity.real(), s.reflectivity.imag()}}});
  j["scene"] = targets;
  if (wideband) {
    const auto c = effective_wideband();
    j["wideband"] = {{"center_frequency_hz", c.omega0 / kTwoPi},
                     {"bandwidth_hz", c.bandwidth / kTwoPi},
                     {"n_freq", c.n_freq},
                     {"n_slow", c.n_slow},
                     {"antenna1", trajectory_json(wideband->antenna1)},
                     {"antenna2", trajectory_json(wideband->antenna2)}};
  }
  if (unb) {
    const auto c = effective_unb();
    j["unb"] = {{"center_frequency_hz", c.omega0 / kTwoPi},
                {"window_duration_s", c.t_phi},
                {"n_fast", c.n_fast},
                {"n_slow", c.n_slow},
                {"n_mu", c.n_mu},
                {"mu_half_span", c.mu_span ? json(*c.mu_span) : json("auto")},
                {"window", to_string(c.window)},
                {"antenna1", trajectory_json(unb->antenna1)},
                {"antenna2", trajectory_json(unb->antenna2)}};
  }
  j["image"] = {{"half_extent_x_m", grid.half_extent_x},
                {"half_extent_y_m", grid.half_extent_y},
                {"spacing_m", grid.spacing},
                {"reference_height_m", grid.reference_height}};
  j["search"] = {{"x_min_m", search.x_min},
                 {"x_max_m", search.x_max},
                 {"x_step_m", search.x_step},
                 {"height_min_m", search.h_min},
                 {"height_max_m", search.h_max},
                 {"height_step_m", search.h_step},
                 {"fixed_y_m", fixed_y_from_peak ? json("peak") : json(search.fixed_y)},
                 {"full_3d", search.full_3d},
                 {"y_min_m", search.y_min},
                 {"y_max_m", search.y_max},
                 {"y_step_m", search.y_step},
                 {"phase_surface", to_string(surface)}};
  return j.dump(2);
}

std::string RunConfig::hash() const { return sha256_hex(echo_json()); }

RunConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(source + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  auto section = [&](const std::string& name) {
    auto child = tree.get_child_optional(pt::ptree::path_type(name, '/'));
    return Section(child ? &*child : nullptr, name, source);
  };
  static const std::set<std::string> known = {"run", "constants", "wideband", "wideband.antenna1",
                                              "wideband.antenna2", "unb", "unb.antenna1",
                                              "unb.antenna2", "image", "search"};
  auto check_section = [&](const std::string& name) {
    if (!known.count(name) && !boost::algorithm::starts_with(name, "target."))
      throw ValidationError(source + ": unknown section [" + name + "]");
  };
  for (const auto& [name, child] : tree) {
    (void)child;
    check_section(name);
  }
  // The ini reader drops empty sections; catch misspelled ones anyway.
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      boost::algorithm::trim(line);
      if (line.size() > 2 && line.front() == '[' && line.back() == ']')
        check_section(boost::algorithm::trim_copy(line.substr(1, line.size() - 2)));
    }
  }

  RunConfig cfg;
  cfg.source = source;

  Section run = section("run");
  cfg.name = run.text("name", "run");
  const std::string mod = boost::algorithm::to_lower_copy(run.text("modality", "both"));
  if (mod == "wideband" || mod == "wb") cfg.modality = RunModality::Wideband;
  else if (mod == "unb") cfg.modality = RunModality::UNB;
  else if (mod == "both") cfg.modality = RunModality::Both;
  else run.fail("modality", "expected wideband, unb or both, got '" + mod + "'");
  cfg.seed = run.count("seed", 0);
  const std::string profile = run.text("profile", "desk");
  if (profile != "desk" && profile != "full") run.fail("profile", "expected desk or full");
  cfg.full = profile == "full";
  run.reject_unknown();

  Section consts = section("constants");
  cfg.consts.c = consts.number("propagation_speed_m_per_s", 3.0e8);
  consts.reject_unknown();

  for (const auto& [name, child] : tree) {
    if (!boost::algorithm::starts_with(name, "target.")) continue;
    Section t(&child, name, source);
    const auto ground = t.numbers("ground_position_m", 2);
    Scatterer sc;
    sc.x = ground[0];
    sc.y = ground[1];
    sc.height = t.number("height_m");
    const auto refl = t.numbers("reflectivity", 2, std::vector<double>{1.0, 0.0});
    sc.reflectivity = {refl[0], refl[1]};
    t.reject_unknown();
    cfg.scene.push_back(sc);
  }

  Section wb = section("wideband");
  if (wb.present()) {
    WidebandSection w;
    w.config.omega0 = kTwoPi * wb.number("center_frequency_hz");
    w.config.bandwidth = kTwoPi * wb.number("bandwidth_hz");
    w.config.n_freq = wb.count("n_freq", 512);
    w.config.n_slow = wb.count("n_slow", 1024);
    wb.reject_unknown();
    Section a1 = section("wideband.antenna1"), a2 = section("wideband.antenna2");
    w.antenna1 = read_trajectory(a1);
    w.antenna2 = read_trajectory(a2);
    a1.reject_unknown();
    a2.reject_unknown();
    cfg.wideband = w;
  }

  Section unb = section("unb");
  if (unb.present()) {
    UnbSection u;
    u.config.omega0 = kTwoPi * unb.number("center_frequency_hz");
    u.config.t_phi = unb.number("window_duration_s", 0.01);
    u.config.n_fast = unb.count("n_fast", 512);
    u.config.n_slow = unb.count("n_slow", 1024);
    u.config.n_mu = unb.count("n_mu", 512);
    const std::string span = unb.text("mu_half_span", "auto");
    if (span != "auto") u.config.mu_span = unb.number("mu_half_span");
    const std::string window = unb.text("window", "raised_cosine");
    if (window != "raised_cosine") unb.fail("window", "only raised_cosine is supported");
    unb.reject_unknown();
    Section a1 = section("unb.antenna1"), a2 = section("unb.antenna2");
    u.antenna1 = read_trajectory(a1);
    u.antenna2 = read_trajectory(a2);
    a1.reject_unknown();
    a2.reject_unknown();
    cfg.unb = u;
  }

  Section img = section("image");
  cfg.grid.half_extent_x = img.number("half_extent_x_m", 64.0);
  cfg.grid.half_extent_y = img.number("half_extent_y_m", 64.0);
  cfg.grid.spacing = img.number("spacing_m", 1.0);
  cfg.grid.reference_height = img.number("reference_height_m", 0.0);
  img.reject_unknown();

  Section s = section("search");
  cfg.search.x_min = s.number("x_min_m", -64.0);
  cfg.search.x_max = s.number("x_max_m", 63.0);
  cfg.search.x_step = s.number("x_step_m", 1.0);
  cfg.search.h_min = s.number("height_min_m", 1.0);
  cfg.search.h_max = s.number("height_max_m", 100.0);
  cfg.search.h_step = s.number("height_step_m", 0.5);
  const std::string fixed_y = s.text("fixed_y_m", "peak");
  cfg.fixed_y_from_peak = fixed_y == "peak";
  if (!cfg.fixed_y_from_peak) cfg.search.fixed_y = s.number("fixed_y_m");
  cfg.search.full_3d = s.flag("full_3d", false);
  cfg.search.y_min = s.number("y_min_m", -64.0);
  cfg.search.y_max = s.number("y_max_m", 63.0);
  cfg.search.y_step = s.number("y_step_m", 1.0);
  const std::string surface = s.text("phase_surface", "exact");
  if (surface == "exact") cfg.surface = PhaseSurface::Exact;
  else if (surface == "linearized") cfg.surface = PhaseSurface::Linearized;
  else s.fail("phase_surface", "expected exact or linearized, got '" + surface + "'");
  s.reject_unknown();

  if (cfg.runs_wideband() && !cfg.wideband)
    throw ValidationError(source + ": [wideband] section required for modality " + to_string(cfg.modality));
  if (cfg.runs_unb() && !cfg.unb)
    throw ValidationError(source + ": [unb] section required for modality " + to_string(cfg.modality));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read config file " + path.string());
  std::ostringstream text;
  text << is.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string builtin_config_text(const std::string& name) {
  if (name == "paper-wb") return std::string(builtin::kPaperWb);
  if (name == "paper-unb") return std::string(builtin::kPaperUnb);
  throw ValidationError("no built-in config named '" + name + "'");
}

}  // namespace dsar
