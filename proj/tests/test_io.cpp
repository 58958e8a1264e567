#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dsar/io.hpp"

using namespace dsar;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dsar_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

ComplexMatrix random_matrix(std::size_t r, std::size_t c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  ComplexMatrix m(r, c);
  for (auto& v : m.data()) v = {n(rng), n(rng)};
  return m;
}

}  // namespace

TEST_CASE("wideband dataset round trip is bit exact") {
  WidebandDataSet d;
  d.config.n_freq = 4;
  d.config.n_slow = 5;
  d.samples = random_matrix(4, 5, 1);
  d.samples(0, 0) = {-0.0, 1e-310};
  d.frequency_axis = {"omega_offset", "rad/s", {-2, -1, 0, 1}};
  d.slow_time_axis = {"slow_time", "s", {-1, -0.5, 0, 0.5, 1}};
  const auto p = scratch("wb.dsar");
  write_dataset(p, d);
  CHECK(container_kind(p) == "wideband_dataset");
  const auto back = read_wideband_dataset(p);
  CHECK(back.samples == d.samples);
  CHECK(std::signbit(back.samples(0, 0).real()));
  CHECK(back.frequency_axis == d.frequency_axis);
  CHECK(back.slow_time_axis == d.slow_time_axis);
  CHECK(back.config.n_freq == 4);
  CHECK(back.config.omega0 == d.config.omega0);
  CHECK_THROWS(read_unb_dataset(p));
  CHECK_THROWS(read_image(p));
}

TEST_CASE("UNB dataset round trip") {
  UNBDataSet d;
  d.config.n_mu = 3;
  d.config.n_slow = 2;
  d.config.mu_span = 1.5e-6;
  d.samples = random_matrix(3, 2, 2);
  d.mu_axis = {"mu_minus_one", "1", {-1.5e-6, 0, 1.5e-6}};
  d.slow_time_axis = {"slow_time", "s", {0, 1}};
  d.warnings = {"aliased"};
  const auto p = scratch("unb.dsar");
  write_dataset(p, d);
  CHECK(container_kind(p) == "unb_dataset");
  const auto back = read_unb_dataset(p);
  CHECK(back.samples == d.samples);
  CHECK(back.mu_axis == d.mu_axis);
  REQUIRE(back.config.mu_span.has_value());
  CHECK(*back.config.mu_span == 1.5e-6);
  CHECK(back.config.t_phi == d.config.t_phi);
}

TEST_CASE("image round trip keeps grid and provenance") {
  ComplexImage img;
  img.grid = {4.0, 2.0, 0.5, 1.5};
  img.pixels = random_matrix(img.grid.ny(), img.grid.nx(), 3);
  img.provenance = {Modality::UNB, "antenna2", "abc123", {"note one", "note, two"}};
  img.excluded_pixels = {3, 17};
  const auto p = scratch("img.dsar");
  write_image(p, img);
  CHECK(container_kind(p) == "image");
  const auto back = read_image(p);
  CHECK(back.grid == img.grid);
  CHECK(back.pixels == img.pixels);
  CHECK(back.provenance.modality == Modality::UNB);
  CHECK(back.provenance.trajectory_id == "antenna2");
  CHECK(back.provenance.config_hash == "abc123");
  CHECK(back.provenance.notes == img.provenance.notes);
  CHECK(back.excluded_pixels == img.excluded_pixels);
}

TEST_CASE("container byte layout") {
  WidebandDataSet d;
  d.config.n_freq = 2;
  d.config.n_slow = 2;
  d.samples = ComplexMatrix(2, 2);
  d.samples(0, 0) = {1.0, -2.0};
  d.frequency_axis = {"omega_offset", "rad/s", {0, 1}};
  d.slow_time_axis = {"slow_time", "s", {0, 1}};
  const auto p = scratch("layout.dsar");
  write_dataset(p, d);
  const std::string bytes = slurp(p);
  REQUIRE(bytes.size() > 16);
  CHECK(bytes.substr(0, 8) == "DSARDATA");
  const auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = v << 8 | static_cast<unsigned char>(bytes[at + i]);
    return v;
  };
  CHECK(u32(8) == kContainerVersion);
  const std::uint32_t hlen = u32(12);
  CHECK(bytes.size() == 16 + hlen + 4 * 16);
  CHECK(bytes[16] == '{');
  // First sample: 1.0 little-endian is 00 .. 00 f0 3f.
  const std::size_t s0 = 16 + hlen;
  CHECK(static_cast<unsigned char>(bytes[s0 + 7]) == 0x3f);
  CHECK(static_cast<unsigned char>(bytes[s0 + 6]) == 0xf0);
  CHECK(static_cast<unsigned char>(bytes[s0 + 15]) == 0xc0);  // -2.0

  std::ofstream(scratch("bad.dsar"), std::ios::binary) << "NOTDSAR!";
  CHECK_THROWS(read_wideband_dataset(scratch("bad.dsar")));
  std::ofstream(scratch("short.dsar"), std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS(read_wideband_dataset(scratch("short.dsar")));
  CHECK_THROWS(read_wideband_dataset(scratch("missing.dsar")));
}

TEST_CASE("PGM exports") {
  ComplexImage img;
  img.grid = {2.0, 1.0, 1.0, 0.0};
  img.pixels = ComplexMatrix(2, 4);
  img.pixels(0, 0) = {2.0, 0.0};
  img.pixels(1, 3) = {0.0, 1.0};
  const auto mag = scratch("mag.pgm");
  write_magnitude_pgm(mag, img);
  const std::string m = slurp(mag);
  const std::string header = "P5\n4 2\n65535\n";
  REQUIRE(m.substr(0, header.size()) == header);
  CHECK(m.size() == header.size() + 16);
  CHECK(static_cast<unsigned char>(m[header.size()]) == 0xff);
  CHECK(static_cast<unsigned char>(m[header.size() + 1]) == 0xff);
  // 0.5 of full scale, big-endian.
  const std::size_t last = header.size() + 14;
  const unsigned v = static_cast<unsigned char>(m[last]) << 8 | static_cast<unsigned char>(m[last + 1]);
  CHECK(v == doctest::Approx(32768).epsilon(1e-4));

  const auto ph = scratch("phase.pgm");
  write_phase_pgm(ph, img);
  const std::string p = slurp(ph);
  CHECK(p.substr(0, header.size()) == header);
  const unsigned zero_phase = static_cast<unsigned char>(p[header.size()]) << 8 |
                              static_cast<unsigned char>(p[header.size() + 1]);
  CHECK(zero_phase == doctest::Approx(32768).epsilon(1e-4));

  ResidualMap r;
  r.nx = 3, r.nh = 2, r.ny = 1;
  r.values = {0, 1, 2, 3, 4, 5};
  const auto rp = scratch("res.pgm");
  write_residual_pgm(rp, r);
  const std::string rs = slurp(rp);
  const std::string rh = "P5\n3 2\n65535\n";
  REQUIRE(rs.substr(0, rh.size()) == rh);
  // Top row is the highest height: first sample is value 3 -> 0.6 of scale.
  const unsigned first = static_cast<unsigned char>(rs[rh.size()]) << 8 | static_cast<unsigned char>(rs[rh.size() + 1]);
  CHECK(first == doctest::Approx(0.6 * 65535).epsilon(1e-4));
}

TEST_CASE("CSV exports") {
  ComplexImage img;
  img.grid = {1.0, 1.0, 1.0, 0.0};
  img.pixels = ComplexMatrix(2, 2);
  img.pixels(1, 0) = {3.0, 4.0};
  const auto p = scratch("img.csv");
  write_image_csv(p, img);
  std::istringstream is(slurp(p));
  std::string line;
  std::getline(is, line);
  CHECK(line == "row,col,x_m,y_m,real,imag,magnitude,phase_rad");
  int rows = 0;
  std::string hit;
  while (std::getline(is, line)) {
    ++rows;
    if (line.rfind("1,0,", 0) == 0) hit = line;
  }
  CHECK(rows == 4);
  CHECK(hit.find(",-1,0,3,4,5,") != std::string::npos);

  SearchGrid g;
  g.x_min = 0, g.x_max = 1, g.h_min = 1, g.h_max = 1;
  ResidualSet set;
  const char* names[] = {"range", "doppler", "phase"};
  for (int i = 0; i < 3; ++i) {
    set.maps[i].name = names[i];
    set.maps[i].unit = "m";
    set.maps[i].nx = 2, set.maps[i].nh = 1, set.maps[i].ny = 1;
    set.maps[i].values = {0.5, 1.5};
  }
  set.combined = set.maps[0];
  const auto rp = scratch("res.csv");
  write_residuals_csv(rp, set, g);
  std::istringstream rs(slurp(rp));
  std::getline(rs, line);
  CHECK(line == "y_m,height_m,x_m,range [m],doppler [m],phase [m],combined");
  std::getline(rs, line);
  CHECK(line == "0,1,0,0.5,0.5,0.5,0.5");
}

TEST_CASE("csv field quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto p = scratch("abc.txt");
  std::ofstream(p, std::ios::binary) << "abc";
  CHECK(sha256_file(p) == sha256_hex("abc"));
}
