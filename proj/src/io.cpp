#include "gil/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gil/error.hpp"
#include "gil/speckle.hpp"

namespace gil {

namespace {

template <typename U>
void write_le(std::ostream &out, U v) {
  char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i)
    b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, sizeof(U));
}

template <typename U>
U read_le(std::istream &in) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char *>(b), sizeof(U)))
    throw IoError("unexpected end of file");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

// Skips whitespace and '#' comments between PGM header tokens.
void skip_pgm_space(std::istream &in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

unsigned read_pgm_int(std::istream &in, const std::string &path) {
  skip_pgm_space(in);
  unsigned v = 0;
  if (!(in >> v))
    throw IoError("malformed PGM header in '" + path + "'");
  return v;
}

} // namespace

void write_u32(std::ostream &out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream &out, std::uint64_t v) { write_le(out, v); }
void write_f32(std::ostream &out, float v) { write_le(out, std::bit_cast<std::uint32_t>(v)); }
void write_f64(std::ostream &out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }
std::uint32_t read_u32(std::istream &in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream &in) { return read_le<std::uint64_t>(in); }
float read_f32(std::istream &in) { return std::bit_cast<float>(read_le<std::uint32_t>(in)); }
double read_f64(std::istream &in) { return std::bit_cast<double>(read_le<std::uint64_t>(in)); }

GreyMap read_pgm(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5')
    throw IoError("'" + path + "' is not a binary (P5) PGM");
  const unsigned nx = read_pgm_int(in, path);
  const unsigned ny = read_pgm_int(in, path);
  const unsigned maxval = read_pgm_int(in, path);
  if (nx == 0 || ny == 0 || maxval == 0 || maxval > 65535)
    throw IoError("unsupported PGM geometry in '" + path + "'");
  in.get(); // single whitespace before the raster
  GreyMap img{Array2D<std::uint16_t>(nx, ny), static_cast<std::uint16_t>(maxval)};
  const bool wide = maxval > 255;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    unsigned char b[2] = {0, 0};
    if (!in.read(reinterpret_cast<char *>(b), wide ? 2 : 1))
      throw IoError("truncated PGM raster in '" + path + "'");
    img.pixels[i] = wide ? static_cast<std::uint16_t>((b[0] << 8) | b[1]) : b[0];
  }
  return img;
}

void write_pgm(const std::string &path, const GreyMap &img) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  out << "P5\n" << img.pixels.nx() << ' ' << img.pixels.ny() << '\n' << img.maxval << '\n';
  const bool wide = img.maxval > 255;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const auto v = img.pixels[i];
    if (wide) {
      out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xFF));
    } else {
      out.put(static_cast<char>(v));
    }
  }
  if (!out)
    throw IoError("write failed for '" + path + "'");
}

GreyMap to_pgm8(const Image &img, double lo, double hi) {
  GreyMap out{Array2D<std::uint16_t>(img.nx(), img.ny()), 255};
  if (!(hi > lo))
    return out;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double u = std::clamp((img[i] - lo) / (hi - lo), 0.0, 1.0);
    out.pixels[i] = static_cast<std::uint16_t>(std::lround(u * 255.0));
  }
  return out;
}

GreyMap to_pgm8(const Image &img) {
  const auto [lo, hi] = std::minmax_element(img.flat().begin(), img.flat().end());
  return img.size() ? to_pgm8(img, *lo, *hi) : GreyMap{};
}

Image read_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  std::vector<double> values;
  std::size_t nx = 0, ny = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::size_t count = 0;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cell = b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1);
      double v = 0.0;
      if (cell == "nan" || cell == "NaN") {
        v = std::numeric_limits<double>::quiet_NaN();
      } else {
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size())
          throw IoError("'" + path + "' row " + std::to_string(ny + 1) + ": bad number '" + cell + "'");
      }
      values.push_back(v);
      ++count;
    }
    if (ny == 0)
      nx = count;
    else if (count != nx)
      throw DimensionError("'" + path + "' row " + std::to_string(ny + 1) + " has " +
                           std::to_string(count) + " values, expected " + std::to_string(nx));
    ++ny;
  }
  return Image(nx, ny, std::move(values));
}

void write_csv(const std::string &path, const Image &img) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  char buf[40];
  for (std::size_t iy = 0; iy < img.ny(); ++iy) {
    for (std::size_t ix = 0; ix < img.nx(); ++ix) {
      const double v = img(ix, iy);
      if (std::isnan(v))
        out << "nan";
      else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
      }
      out << (ix + 1 < img.nx() ? ',' : '\n');
    }
  }
  if (!out)
    throw IoError("write failed for '" + path + "'");
}

void write_frame_dump(const std::string &path, const SpeckleFrame &frame) {
  if (frame.frame_index > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("frame dump: frame index does not fit the 32-bit header field");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  write_u32(out, kFrameMagic);
  write_u32(out, static_cast<std::uint32_t>(frame.intensity.nx()));
  write_u32(out, static_cast<std::uint32_t>(frame.intensity.ny()));
  write_u32(out, static_cast<std::uint32_t>(frame.frame_index));
  for (float v : frame.intensity.flat())
    write_f32(out, v);
  if (!out)
    throw IoError("write failed for '" + path + "'");
}

SpeckleFrame read_frame_dump(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  if (read_u32(in) != kFrameMagic)
    throw IoError("'" + path + "' is not a speckle frame dump");
  SpeckleFrame f;
  const auto nx = read_u32(in);
  const auto ny = read_u32(in);
  f.frame_index = read_u32(in);
  f.intensity = Array2D<float>(nx, ny);
  try {
    for (auto &v : f.intensity.flat())
      v = read_f32(in);
  } catch (const IoError &) {
    throw IoError("'" + path + "': truncated frame data");
  }
  f.grid.nx = nx;
  f.grid.ny = ny;
  return f;
}

void write_file_atomic(const std::string &path, const std::string &contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw IoError("cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out)
      throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

} // namespace gil
