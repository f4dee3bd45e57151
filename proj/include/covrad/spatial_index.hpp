#pragma once

// Exact nearest-neighbour search on a dense uniform grid. Points are
// bucketed into cubic cells (CSR layout, sorted by cell); a query scans
// Chebyshev rings of cells around the query's cell until the best distance
// found is strictly below the distance to every unscanned cell.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "covrad/error.hpp"
#include "covrad/point_cloud.hpp"

namespace covrad {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

class SpatialIndex {
 public:
  static constexpr std::size_t kMaxDim = 16;
  static constexpr std::size_t kMaxCells = std::size_t{1} << 24;

  SpatialIndex(const PointCloud& points, double cell_size) { build(points, cell_size); }

  /// Cell size from the mean spacing of the points inside their bounding box.
  explicit SpatialIndex(const PointCloud& points) { build(points, default_cell_size(points)); }

  static double default_cell_size(const PointCloud& points) {
    require(!points.empty(), ErrorCode::kInvalidArgument, "index needs at least one point");
    const std::size_t dim = points.dim();
    double extent = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double lo = points[0][k], hi = lo;
      for (std::size_t i = 1; i < points.size(); ++i) {
        lo = std::min(lo, points[i][k]);
        hi = std::max(hi, points[i][k]);
      }
      extent = std::max(extent, hi - lo);
    }
    if (extent <= 0.0) return 1.0;
    return extent / std::pow(static_cast<double>(points.size()), 1.0 / static_cast<double>(dim));
  }

  std::size_t size() const noexcept { return original_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  double cell_size() const noexcept { return cell_; }
  std::size_t cell_count() const noexcept { return offsets_.size() - 1; }

  /// Exact nearest point; ties go to the lowest original index.
  Neighbor nearest(std::span<const double> q) const {
    const auto [idx, d2] = search(q, -1.0);
    return {idx, std::sqrt(d2)};
  }

  /// Squared distance to the nearest point, except that the search may stop
  /// early with any value strictly below `floor_sq` once one is found.
  /// Values >= floor_sq are always exact.
  double nearest_sq_above(std::span<const double> q, double floor_sq) const {
    return search(q, floor_sq).second;
  }

 private:
  using CellCoord = std::array<std::int64_t, kMaxDim>;

  void build(const PointCloud& points, double cell_size) {
    require(!points.empty(), ErrorCode::kInvalidArgument, "index needs at least one point");
    require(points.dim() <= kMaxDim, ErrorCode::kInvalidArgument, "index supports dim <= 16");
    require(cell_size > 0.0 && std::isfinite(cell_size), ErrorCode::kInvalidArgument,
            "cell size must be positive");
    dim_ = points.dim();
    const std::size_t n = points.size();
    std::array<double, kMaxDim> lo{}, hi{};
    for (std::size_t k = 0; k < dim_; ++k) {
      lo[k] = hi[k] = points[0][k];
      for (std::size_t i = 1; i < n; ++i) {
        lo[k] = std::min(lo[k], points[i][k]);
        hi[k] = std::max(hi[k], points[i][k]);
      }
    }
    cell_ = cell_size;
    for (;;) {
      std::size_t total = 1;
      bool overflow = false;
      for (std::size_t k = 0; k < dim_; ++k) {
        const auto c = static_cast<std::size_t>(std::floor((hi[k] - lo[k]) / cell_)) + 1;
        counts_[k] = static_cast<std::int64_t>(c);
        if (total > kMaxCells / c) overflow = true;
        total *= c;
      }
      if (!overflow && total <= std::max<std::size_t>(kMaxCells / 4, 8 * n)) break;
      cell_ *= 1.5;
    }
    origin_ = lo;
    std::size_t stride = 1;
    for (std::size_t k = dim_; k-- > 0;) {
      strides_[k] = stride;
      stride *= static_cast<std::size_t>(counts_[k]);
    }
    const std::size_t cells = stride;

    std::vector<std::size_t> cell_of(n);
    offsets_.assign(cells + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t lin = 0;
      for (std::size_t k = 0; k < dim_; ++k) lin += cell_index(points[i][k], k) * strides_[k];
      cell_of[i] = lin;
      ++offsets_[lin + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    original_.resize(n);
    coords_.resize(n * dim_);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t slot = cursor[cell_of[i]]++;
      original_[slot] = static_cast<std::uint32_t>(i);
      std::copy_n(points[i].data(), dim_, coords_.data() + slot * dim_);
    }
  }

  std::size_t cell_index(double x, std::size_t k) const {
    const double t = std::floor((x - origin_[k]) / cell_);
    if (!(t > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(t), static_cast<std::size_t>(counts_[k] - 1));
  }

  struct Best {
    double d2 = std::numeric_limits<double>::infinity();
    std::uint32_t idx = std::numeric_limits<std::uint32_t>::max();
  };

  // Scans one cell; returns true when an early-exit value was found.
  bool scan_cell(std::size_t lin, std::span<const double> q, double floor_sq, Best& best) const {
    const std::uint32_t begin = offsets_[lin], end = offsets_[lin + 1];
    const double* p = coords_.data() + std::size_t{begin} * dim_;
    for (std::uint32_t s = begin; s < end; ++s, p += dim_) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double t = q[k] - p[k];
        d2 += t * t;
      }
      if (d2 < best.d2 || (d2 == best.d2 && original_[s] < best.idx)) {
        best.d2 = d2;
        best.idx = original_[s];
        if (d2 < floor_sq) return true;
      }
    }
    return false;
  }

  // Visits every cell at Chebyshev distance exactly `ring` from `home`.
  bool scan_ring(const CellCoord& home, std::int64_t ring, std::span<const double> q,
                 double floor_sq, Best& best) const {
    CellCoord lo{}, hi{};
    for (std::size_t k = 0; k < dim_; ++k) {
      lo[k] = std::max<std::int64_t>(home[k] - ring, 0);
      hi[k] = std::min<std::int64_t>(home[k] + ring, counts_[k] - 1);
    }
    return scan_ring_axis(0, 0, false, home, ring, lo, hi, q, floor_sq, best);
  }

  bool scan_ring_axis(std::size_t axis, std::size_t base, bool on_shell, const CellCoord& home,
                      std::int64_t ring, const CellCoord& lo, const CellCoord& hi,
                      std::span<const double> q, double floor_sq, Best& best) const {
    const bool last = axis + 1 == dim_;
    if (last && !on_shell) {
      for (const std::int64_t c : {home[axis] - ring, home[axis] + ring}) {
        if (c < 0 || c >= counts_[axis]) continue;
        if (scan_cell(base + static_cast<std::size_t>(c) * strides_[axis], q, floor_sq, best)) return true;
        if (ring == 0) break;
      }
      return false;
    }
    for (std::int64_t c = lo[axis]; c <= hi[axis]; ++c) {
      const std::size_t next = base + static_cast<std::size_t>(c) * strides_[axis];
      const bool shell = on_shell || c == home[axis] - ring || c == home[axis] + ring;
      if (last) {
        if (scan_cell(next, q, floor_sq, best)) return true;
      } else if (scan_ring_axis(axis + 1, next, shell, home, ring, lo, hi, q, floor_sq, best)) {
        return true;
      }
    }
    return false;
  }

  std::pair<std::size_t, double> search(std::span<const double> q, double floor_sq) const {
    require(q.size() == dim_, ErrorCode::kInvalidArgument, "query dimension mismatch");
    CellCoord home{};
    std::int64_t max_ring = 0;
    for (std::size_t k = 0; k < dim_; ++k) {
      home[k] = static_cast<std::int64_t>(cell_index(q[k], k));
      max_ring = std::max({max_ring, home[k], counts_[k] - 1 - home[k]});
    }
    Best best;
    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
      if (scan_ring(home, ring, q, floor_sq, best)) break;
      // Distance from q to any cell outside the scanned block.
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < dim_; ++k) {
        if (home[k] - ring - 1 >= 0) {
          const double edge = origin_[k] + static_cast<double>(home[k] - ring) * cell_;
          gap = std::min(gap, std::max(0.0, q[k] - edge));
        }
        if (home[k] + ring + 1 < counts_[k]) {
          const double edge = origin_[k] + static_cast<double>(home[k] + ring + 1) * cell_;
          gap = std::min(gap, std::max(0.0, edge - q[k]));
        }
      }
      if (gap == std::numeric_limits<double>::infinity()) break;
      gap *= 1.0 - 1e-12;
      if (best.d2 < gap * gap) break;
    }
    return {best.idx, best.d2};
  }

  std::size_t dim_ = 0;
  double cell_ = 1.0;
  std::array<double, kMaxDim> origin_{};
  std::array<std::int64_t, kMaxDim> counts_{};
  std::array<std::size_t, kMaxDim> strides_{};
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> original_;
  std::vector<double> coords_;
};

inline SpatialIndex build_index(const PointCloud& points) { return SpatialIndex(points); }
inline SpatialIndex build_index(const PointCloud& points, double cell_size) {
  return SpatialIndex(points, cell_size);
}

inline Neighbor nearest(const SpatialIndex& index, std::span<const double> q) {
  return index.nearest(q);
}

}  // namespace covrad
