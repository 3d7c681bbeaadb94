#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "gil/forward.hpp"

namespace gil {

/// Measurement record, little-endian:
///
///   header (36 bytes): u32 magic "GIRC", u32 version (1), u32 nx, u32 ny,
///                      u32 m, u64 N, u64 master_seed
///   N x { nx*ny float32 reference frame (row-major), m float32 B_s }
inline constexpr std::uint32_t kRecordMagic = 0x43524947; // "GIRC"
inline constexpr std::uint32_t kRecordVersion = 1;

struct RecordHeader {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  std::uint32_t m = 0;
  std::uint64_t n = 0;
  std::uint64_t master_seed = 0;

  std::size_t measurement_bytes() const { return 4u * (std::size_t{nx} * ny + m); }
  bool operator==(const RecordHeader &) const = default;
};

class RecordWriter {
public:
  RecordWriter(const std::string &path, const RecordHeader &header);
  /// Measurements must arrive in index order 0, 1, ...
  void write(const Measurement &m);
  /// Flushes and checks that exactly header.n measurements were written.
  void close();

  const RecordHeader &header() const noexcept { return header_; }

private:
  std::string path_;
  RecordHeader header_;
  std::ofstream out_;
  std::uint64_t written_ = 0;
};

class RecordReader {
public:
  explicit RecordReader(const std::string &path);

  const RecordHeader &header() const noexcept { return header_; }
  std::uint64_t remaining() const noexcept { return header_.n - read_; }
  /// Reads the next measurement; IoError naming the index if truncated.
  Measurement next();

private:
  std::string path_;
  RecordHeader header_;
  std::ifstream in_;
  std::uint64_t read_ = 0;
};

} // namespace gil
