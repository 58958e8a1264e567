#pragma once

// File formats.
//
// Binary container (.dsar):
//   8 bytes   magic "DSARDATA"
//   u32 LE    format version
//   u32 LE    header length N
//   N bytes   JSON header: kind, rows, cols, axes, config echo
//   rows*cols (re, im) pairs of little-endian IEEE 754 doubles, row-major
//
// PGM exports are 16-bit binary (P5, maxval 65535, big-endian samples).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsar/forward.hpp"
#include "dsar/heightsolver.hpp"
#include "dsar/imaging.hpp"
#include "dsar/interferometry.hpp"

namespace dsar {

inline constexpr std::uint32_t kContainerVersion = 1;

void write_dataset(const std::filesystem::path& path, const WidebandDataSet& data);
void write_dataset(const std::filesystem::path& path, const UNBDataSet& data);
WidebandDataSet read_wideband_dataset(const std::filesystem::path& path);
UNBDataSet read_unb_dataset(const std::filesystem::path& path);

void write_image(const std::filesystem::path& path, const ComplexImage& img);
ComplexImage read_image(const std::filesystem::path& path);

/// "wideband_dataset", "unb_dataset" or "image".
std::string container_kind(const std::filesystem::path& path);

/// Linear magnitude scaled to the image maximum.
void write_magnitude_pgm(const std::filesystem::path& path, const ComplexImage& img);
/// Phase (-pi, pi] mapped to [0, 65535].
void write_phase_pgm(const std::filesystem::path& path, const ComplexImage& img);
/// Values scaled between their minimum and maximum; rows are heights, top row
/// the highest, for each y slice stacked vertically.
void write_residual_pgm(const std::filesystem::path& path, const ResidualMap& map);

void write_image_csv(const std::filesystem::path& path, const ComplexImage& img);
void write_residuals_csv(const std::filesystem::path& path, const ResidualSet& set,
                         const SearchGrid& grid);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace dsar
