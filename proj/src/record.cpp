#include "gil/record.hpp"

#include "gil/error.hpp"
#include "gil/io.hpp"

namespace gil {

RecordWriter::RecordWriter(const std::string &path, const RecordHeader &header)
    : path_(path), header_(header), out_(path, std::ios::binary) {
  if (!out_)
    throw IoError("cannot create record '" + path + "'");
  write_u32(out_, kRecordMagic);
  write_u32(out_, kRecordVersion);
  write_u32(out_, header.nx);
  write_u32(out_, header.ny);
  write_u32(out_, header.m);
  write_u64(out_, header.n);
  write_u64(out_, header.master_seed);
  if (!out_)
    throw IoError("write failed for record header of '" + path + "'");
}

void RecordWriter::write(const Measurement &m) {
  if (m.index != written_)
    throw ContractError("record: measurement " + std::to_string(m.index) + " written out of order");
  if (written_ >= header_.n)
    throw ContractError("record: more measurements than declared in the header");
  if (!m.frame.intensity.same_shape(header_.nx, header_.ny) || m.slices.B.size() != header_.m)
    throw DimensionError("record: measurement " + std::to_string(m.index) +
                         " does not match the record dimensions");
  for (float v : m.frame.intensity.flat())
    write_f32(out_, v);
  for (double b : m.slices.B)
    write_f32(out_, static_cast<float>(b));
  if (!out_)
    throw IoError("record '" + path_ + "': write failed at measurement " + std::to_string(m.index));
  ++written_;
}

void RecordWriter::close() {
  out_.flush();
  if (!out_)
    throw IoError("record '" + path_ + "': flush failed");
  out_.close();
  if (written_ != header_.n)
    throw ContractError("record: wrote " + std::to_string(written_) + " of " + std::to_string(header_.n) +
                        " measurements");
}

RecordReader::RecordReader(const std::string &path) : path_(path), in_(path, std::ios::binary) {
  if (!in_)
    throw IoError("cannot open record '" + path + "'");
  try {
    if (read_u32(in_) != kRecordMagic)
      throw IoError("'" + path + "' is not a measurement record");
    if (const auto v = read_u32(in_); v != kRecordVersion)
      throw IoError("'" + path + "': unsupported record version " + std::to_string(v));
    header_.nx = read_u32(in_);
    header_.ny = read_u32(in_);
    header_.m = read_u32(in_);
    header_.n = read_u64(in_);
    header_.master_seed = read_u64(in_);
  } catch (const IoError &e) {
    throw IoError("record '" + path + "': bad header (" + e.what() + ")");
  }
  if (header_.nx == 0 || header_.ny == 0 || header_.m == 0)
    throw IoError("record '" + path + "': degenerate dimensions in header");
}

Measurement RecordReader::next() {
  if (read_ >= header_.n)
    throw ContractError("record: read past the last measurement");
  Measurement m;
  m.index = read_;
  m.frame.intensity = Array2D<float>(header_.nx, header_.ny);
  m.frame.frame_index = read_;
  m.frame.rng_seed = header_.master_seed;
  m.frame.grid.nx = header_.nx;
  m.frame.grid.ny = header_.ny;
  m.slices.B.resize(header_.m);
  try {
    for (auto &v : m.frame.intensity.flat())
      v = read_f32(in_);
    for (auto &b : m.slices.B)
      b = read_f32(in_);
  } catch (const IoError &) {
    throw IoError("record '" + path_ + "' truncated at measurement " + std::to_string(read_));
  }
  ++read_;
  return m;
}

} // namespace gil
