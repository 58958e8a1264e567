#include "dsar/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "dsar/errors.hpp"

namespace dsar {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr char kMagic[8] = {'D', 'S', 'A', 'R', 'D', 'A', 'T', 'A'};

static_assert(std::numeric_limits<double>::is_iec559);

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated container header");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

void put_f64(std::vector<unsigned char>& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
  return std::bit_cast<double>(bits);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void write_container(const fs::path& path, const json& header, const ComplexMatrix& m) {
  auto os = open_out(path);
  const std::string text = header.dump();
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kContainerVersion);
  put_u32(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<unsigned char> buf;
  buf.reserve(m.size() * 16);
  for (const auto& v : m.data()) {
    put_f64(buf, v.real());
    put_f64(buf, v.imag());
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

json read_header(std::istream& is, const fs::path& path) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error(path.string() + " is not a dsar container");
  const auto version = get_u32(is);
  if (version != kContainerVersion)
    throw std::runtime_error(path.string() + ": unsupported container version " + std::to_string(version));
  const auto len = get_u32(is);
  std::string text(len, '\0');
  if (!is.read(text.data(), len)) throw std::runtime_error(path.string() + ": truncated header");
  return json::parse(text);
}

std::pair<json, ComplexMatrix> read_container(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  json header = read_header(is, path);
  const auto rows = header.at("rows").get<std::size_t>();
  const auto cols = header.at("cols").get<std::size_t>();
  ComplexMatrix m(rows, cols);
  std::vector<unsigned char> buf(rows * cols * 16);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw std::runtime_error(path.string() + ": truncated sample block");
  for (std::size_t i = 0; i < rows * cols; ++i)
    m.data()[i] = {get_f64(buf.data() + 16 * i), get_f64(buf.data() + 16 * i + 8)};
  return {std::move(header), std::move(m)};
}

json axis_json(const Axis& a) { return {{"name", a.name}, {"unit", a.unit}, {"values", a.values}}; }
Axis axis_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("unit").get<std::string>(),
          j.at("values").get<std::vector<double>>()};
}

void expect_kind(const json& h, const std::string& kind, const fs::path& path) {
  if (h.at("kind").get<std::string>() != kind)
    throw std::runtime_error(path.string() + " holds " + h.at("kind").get<std::string>() +
                             ", expected " + kind);
}

// 16-bit big-endian P5.
void write_pgm(const fs::path& path, std::size_t width, std::size_t height,
               const std::vector<std::uint16_t>& samples) {
  auto os = open_out(path);
  os << "P5\n" << width << ' ' << height << "\n65535\n";
  std::vector<unsigned char> buf;
  buf.reserve(samples.size() * 2);
  for (auto s : samples) {
    buf.push_back(static_cast<unsigned char>(s >> 8));
    buf.push_back(static_cast<unsigned char>(s & 0xff));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::uint16_t quantize(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(t * 65535.0));
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_dataset(const fs::path& path, const WidebandDataSet& data) {
  json h;
  h["kind"] = "wideband_dataset";
  h["format_version"] = kContainerVersion;
  h["rows"] = data.samples.rows();
  h["cols"] = data.samples.cols();
  h["axes"] = {axis_json(data.frequency_axis), axis_json(data.slow_time_axis)};
  h["config"] = {{"omega0_rad_per_s", data.config.omega0},
                 {"bandwidth_rad_per_s", data.config.bandwidth},
                 {"n_freq", data.config.n_freq},
                 {"n_slow", data.config.n_slow}};
  write_container(path, h, data.samples);
}

void write_dataset(const fs::path& path, const UNBDataSet& data) {
  json h;
  h["kind"] = "unb_dataset";
  h["format_version"] = kContainerVersion;
  h["rows"] = data.samples.rows();
  h["cols"] = data.samples.cols();
  h["axes"] = {axis_json(data.mu_axis), axis_json(data.slow_time_axis)};
  h["config"] = {{"omega0_rad_per_s", data.config.omega0},
                 {"window_duration_s", data.config.t_phi},
                 {"n_fast", data.config.n_fast},
                 {"n_slow", data.config.n_slow},
                 {"n_mu", data.config.n_mu},
                 {"mu_half_span", data.config.mu_span.value_or(0.0)},
                 {"window", to_string(data.config.window)}};
  h["warnings"] = data.warnings;
  write_container(path, h, data.samples);
}

WidebandDataSet read_wideband_dataset(const fs::path& path) {
  auto [h, m] = read_container(path);
  expect_kind(h, "wideband_dataset", path);
  WidebandDataSet d;
  d.samples = std::move(m);
  d.frequency_axis = axis_from(h.at("axes").at(0));
  d.slow_time_axis = axis_from(h.at("axes").at(1));
  const auto& c = h.at("config");
  d.config.omega0 = c.at("omega0_rad_per_s").get<double>();
  d.config.bandwidth = c.at("bandwidth_rad_per_s").get<double>();
  d.config.n_freq = c.at("n_freq").get<std::size_t>();
  d.config.n_slow = c.at("n_slow").get<std::size_t>();
  return d;
}

UNBDataSet read_unb_dataset(const fs::path& path) {
  auto [h, m] = read_container(path);
  expect_kind(h, "unb_dataset", path);
  UNBDataSet d;
  d.samples = std::move(m);
  d.mu_axis = axis_from(h.at("axes").at(0));
  d.slow_time_axis = axis_from(h.at("axes").at(1));
  const auto& c = h.at("config");
  d.config.omega0 = c.at("omega0_rad_per_s").get<double>();
  d.config.t_phi = c.at("window_duration_s").get<double>();
  d.config.n_fast = c.at("n_fast").get<std::size_t>();
  d.config.n_slow = c.at("n_slow").get<std::size_t>();
  d.config.n_mu = c.at("n_mu").get<std::size_t>();
  d.config.mu_span = c.at("mu_half_span").get<double>();
  d.warnings = h.at("warnings").get<std::vector<std::string>>();
  return d;
}

void write_image(const fs::path& path, const ComplexImage& img) {
  json h;
  h["kind"] = "image";
  h["format_version"] = kContainerVersion;
  h["rows"] = img.pixels.rows();
  h["cols"] = img.pixels.cols();
  h["grid"] = {{"half_extent_x_m", img.grid.half_extent_x},
               {"half_extent_y_m", img.grid.half_extent_y},
               {"spacing_m", img.grid.spacing},
               {"reference_height_m", img.grid.reference_height}};
  h["provenance"] = {{"modality", to_string(img.provenance.modality)},
                     {"trajectory_id", img.provenance.trajectory_id},
                     {"config_hash", img.provenance.config_hash},
                     {"notes", img.provenance.notes}};
  h["excluded_pixels"] = img.excluded_pixels;
  write_container(path, h, img.pixels);
}

ComplexImage read_image(const fs::path& path) {
  auto [h, m] = read_container(path);
  expect_kind(h, "image", path);
  ComplexImage img;
  const auto& g = h.at("grid");
  img.grid.half_extent_x = g.at("half_extent_x_m").get<double>();
  img.grid.half_extent_y = g.at("half_extent_y_m").get<double>();
  img.grid.spacing = g.at("spacing_m").get<double>();
  img.grid.reference_height = g.at("reference_height_m").get<double>();
  const auto& p = h.at("provenance");
  img.provenance.modality = modality_from_string(p.at("modality").get<std::string>());
  img.provenance.trajectory_id = p.at("trajectory_id").get<std::string>();
  img.provenance.config_hash = p.at("config_hash").get<std::string>();
  img.provenance.notes = p.at("notes").get<std::vector<std::string>>();
  img.excluded_pixels = h.at("excluded_pixels").get<std::vector<std::uint64_t>>();
  img.pixels = std::move(m);
  if (img.pixels.rows() != img.grid.ny() || img.pixels.cols() != img.grid.nx())
    throw std::runtime_error(path.string() + ": pixel block does not match the grid");
  return img;
}

std::string container_kind(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_header(is, path).at("kind").get<std::string>();
}

void write_magnitude_pgm(const fs::path& path, const ComplexImage& img) {
  const auto& d = img.pixels.data();
  double peak = 0.0;
  for (const auto& v : d) peak = std::max(peak, std::abs(v));
  std::vector<std::uint16_t> s(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) s[i] = peak > 0.0 ? quantize(std::abs(d[i]) / peak) : 0;
  write_pgm(path, img.pixels.cols(), img.pixels.rows(), s);
}

void write_phase_pgm(const fs::path& path, const ComplexImage& img) {
  const auto& d = img.pixels.data();
  std::vector<std::uint16_t> s(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double phase = wrap_phase(std::arg(d[i]));
    s[i] = quantize((phase + std::numbers::pi) / (2.0 * std::numbers::pi));
  }
  write_pgm(path, img.pixels.cols(), img.pixels.rows(), s);
}

void write_residual_pgm(const fs::path& path, const ResidualMap& map) {
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = map.values.empty() ? 0.0 : *lo_it;
  const double hi = map.values.empty() ? 0.0 : *hi_it;
  std::vector<std::uint16_t> s;
  s.reserve(map.values.size());
  for (std::size_t iy = 0; iy < map.ny; ++iy)
    for (std::size_t ih = map.nh; ih-- > 0;)
      for (std::size_t ix = 0; ix < map.nx; ++ix)
        s.push_back(hi > lo ? quantize((map.at(iy, ih, ix) - lo) / (hi - lo)) : 0);
  write_pgm(path, map.nx, map.ny * map.nh, s);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_image_csv(const fs::path& path, const ComplexImage& img) {
  auto os = open_out(path);
  os << "row,col,x_m,y_m,real,imag,magnitude,phase_rad\n";
  for (std::size_t r = 0; r < img.pixels.rows(); ++r) {
    for (std::size_t c = 0; c < img.pixels.cols(); ++c) {
      const auto v = img.pixels(r, c);
      os << r << ',' << c << ',' << num(img.grid.x_at(c)) << ',' << num(img.grid.y_at(r)) << ','
         << num(v.real()) << ',' << num(v.imag()) << ',' << num(std::abs(v)) << ','
         << num(wrap_phase(std::arg(v))) << '\n';
    }
  }
}

void write_residuals_csv(const fs::path& path, const ResidualSet& set, const SearchGrid& grid) {
  auto os = open_out(path);
  const auto xs = grid.xs(), hs = grid.hs(), ys = grid.ys();
  os << "y_m,height_m,x_m";
  for (const auto& m : set.maps) os << ',' << csv_field(m.name + " [" + m.unit + "]");
  os << ",combined\n";
  const auto& c = set.combined;
  for (std::size_t iy = 0; iy < c.ny; ++iy)
    for (std::size_t ih = 0; ih < c.nh; ++ih)
      for (std::size_t ix = 0; ix < c.nx; ++ix) {
        os << num(ys[iy]) << ',' << num(hs[ih]) << ',' << num(xs[ix]);
        for (const auto& m : set.maps) os << ',' << num(m.at(iy, ih, ix));
        os << ',' << num(c.at(iy, ih, ix)) << '\n';
      }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 init failed");
  std::array<char, 1 << 16> buf;
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

}  // namespace dsar
