#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace gc4d {

/// Row-major H×W image of arbitrary cells. Index with (row, col), i.e. (v, u).
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, const T& fill = T{})
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool same_shape(int height, int width) const noexcept {
    return height_ == height && width_ == width;
  }
  template <class U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  std::size_t index(int v, int u) const noexcept {
    assert(v >= 0 && v < height_ && u >= 0 && u < width_);
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  T& operator()(int v, int u) noexcept { return data_[index(v, u)]; }
  const T& operator()(int v, int u) const noexcept { return data_[index(v, u)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Grid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using Mask = Grid<unsigned char>;

}  // namespace gc4d
