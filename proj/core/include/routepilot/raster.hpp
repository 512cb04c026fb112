#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "routepilot/errors.hpp"

namespace routepilot {

// Row-major 2-D raster.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Raster(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw InvalidArgument("raster data size mismatch");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Depth along the optical axis in meters; non-finite or non-positive = invalid.
using DepthMap = Raster<float>;
// Class ids, see SemanticClass.
using SegMap = Raster<std::uint8_t>;

// Twenty-class palette shared by segmentation, BEV and the simulated world.
enum class SemanticClass : std::uint8_t {
  None = 0,
  Road,
  Sidewalk,
  Building,
  Wall,
  Fence,
  Pole,
  TrafficLight,
  TrafficSign,
  Vegetation,
  Terrain,
  Sky,
  Person,
  Rider,
  Car,
  Truck,
  Bus,
  Train,
  Motorcycle,
  Bicycle,
};

inline constexpr std::uint8_t kClassCount = 20;

constexpr std::uint8_t class_id(SemanticClass c) { return static_cast<std::uint8_t>(c); }

}  // namespace routepilot
