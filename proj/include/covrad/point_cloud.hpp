#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "covrad/error.hpp"

namespace covrad {

using Point = std::vector<double>;

/// Flat row-major storage for points of a fixed ambient dimension.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::size_t dim) : dim_(dim) {
    require(dim > 0, ErrorCode::kInvalidArgument, "point dimension must be positive");
  }
  PointCloud(std::size_t dim, std::vector<double> coords)
      : dim_(dim), coords_(std::move(coords)) {
    require(dim > 0, ErrorCode::kInvalidArgument, "point dimension must be positive");
    require(coords_.size() % dim == 0, ErrorCode::kInvalidArgument,
            "coordinate count is not a multiple of the dimension");
  }

  static PointCloud from_points(std::size_t dim, const std::vector<Point>& points) {
    PointCloud cloud(dim);
    cloud.reserve(points.size());
    for (const auto& p : points) cloud.push_back(p);
    return cloud;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  Point point(std::size_t i) const {
    auto p = (*this)[i];
    return {p.begin(), p.end()};
  }

  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  void push_back(std::span<const double> p) {
    require(p.size() == dim_, ErrorCode::kInvalidArgument, "point dimension mismatch");
    coords_.insert(coords_.end(), p.begin(), p.end());
  }
  void push_back(std::initializer_list<double> p) {
    push_back(std::span<const double>(p.begin(), p.size()));
  }

  void append(const PointCloud& other) {
    require(other.dim_ == dim_ || other.empty(), ErrorCode::kInvalidArgument,
            "point dimension mismatch");
    coords_.insert(coords_.end(), other.coords_.begin(), other.coords_.end());
  }

  const std::vector<double>& coords() const noexcept { return coords_; }
  std::vector<double>& coords() noexcept { return coords_; }

  bool operator==(const PointCloud&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace covrad
