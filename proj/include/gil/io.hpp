#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "gil/array2d.hpp"

namespace gil {

struct SpeckleFrame;

// Little-endian primitives shared by the binary formats.
void write_u32(std::ostream &out, std::uint32_t v);
void write_u64(std::ostream &out, std::uint64_t v);
void write_f32(std::ostream &out, float v);
void write_f64(std::ostream &out, double v);
std::uint32_t read_u32(std::istream &in);
std::uint64_t read_u64(std::istream &in);
float read_f32(std::istream &in);
double read_f64(std::istream &in);

/// Raw P5 grey map; values are in [0, maxval].
struct GreyMap {
  Array2D<std::uint16_t> pixels;
  std::uint16_t maxval = 255;
};

GreyMap read_pgm(const std::string &path);
void write_pgm(const std::string &path, const GreyMap &img);

/// Linear map of [lo, hi] onto [0, 255]; values outside are clipped. A
/// degenerate range renders black.
GreyMap to_pgm8(const Image &img, double lo, double hi);
GreyMap to_pgm8(const Image &img);

/// Comma separated, one grid row per line; "nan" for missing values.
Image read_csv(const std::string &path);
void write_csv(const std::string &path, const Image &img);

/// Speckle frame dump: 16-byte header (u32 magic "GISF", u32 nx, u32 ny,
/// u32 frame_index) followed by nx*ny little-endian float32, row-major.
inline constexpr std::uint32_t kFrameMagic = 0x46534947; // "GISF"
void write_frame_dump(const std::string &path, const SpeckleFrame &frame);
SpeckleFrame read_frame_dump(const std::string &path);

/// Writes `contents` to a sibling temp file and renames it into place.
void write_file_atomic(const std::string &path, const std::string &contents);

} // namespace gil
