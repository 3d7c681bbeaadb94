#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gil {

/// Dense row-major 2D array; element (ix, iy) lives at iy * nx + ix.
template <typename T>
class Array2D {
public:
  Array2D() = default;
  Array2D(std::size_t nx, std::size_t ny, T fill = T{}) : nx_(nx), ny_(ny), data_(nx * ny, fill) {}
  Array2D(std::size_t nx, std::size_t ny, std::vector<T> data) : nx_(nx), ny_(ny), data_(std::move(data)) {
    data_.resize(nx * ny);
  }

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(std::size_t nx, std::size_t ny) const noexcept { return nx_ == nx && ny_ == ny; }
  template <typename U>
  bool same_shape(const Array2D<U> &o) const noexcept {
    return nx_ == o.nx() && ny_ == o.ny();
  }

  T &operator()(std::size_t ix, std::size_t iy) { return data_[iy * nx_ + ix]; }
  const T &operator()(std::size_t ix, std::size_t iy) const { return data_[iy * nx_ + ix]; }
  T &operator[](std::size_t i) { return data_[i]; }
  const T &operator[](std::size_t i) const { return data_[i]; }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }
  const std::vector<T> &vector() const noexcept { return data_; }

  bool operator==(const Array2D &) const = default;

private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<T> data_;
};

using Image = Array2D<double>;
using Mask = Array2D<unsigned char>;

} // namespace gil
