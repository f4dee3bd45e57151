#pragma once

// Probe nets with certified mesh bounds, and greedy maximal separated nets.
// The mesh arguments for every construction are written up in
// docs/probe_nets.md.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "covrad/error.hpp"
#include "covrad/point_cloud.hpp"
#include "covrad/spaces.hpp"

namespace covrad {

/// Finite point set such that every domain point lies within
/// `certified_mesh` of some net point.
struct ProbeNet {
  DomainModel domain;
  PointCloud points;
  double certified_mesh = 0.0;

  std::size_t size() const noexcept { return points.size(); }
};

namespace detail {

/// Grid on [lo, hi] with spacing at most `step`, endpoints included.
inline std::vector<double> axis_grid(double lo, double hi, double step) {
  const auto intervals = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / step)));
  std::vector<double> g(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(intervals);
  }
  g.back() = hi;
  return g;
}

inline double grid_step(const std::vector<double>& g) {
  return g.size() < 2 ? 0.0 : (g.back() - g.front()) / static_cast<double>(g.size() - 1);
}

/// Calls visit(coords) for every point of the tensor grid g^dim.
template <typename Visit>
void for_each_grid_point(const std::vector<double>& g, std::size_t dim, Visit&& visit) {
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> x(dim, g[0]);
  for (;;) {
    visit(std::span<const double>(x), std::span<const std::size_t>(idx));
    std::size_t k = dim;
    while (k-- > 0) {
      if (++idx[k] < g.size()) {
        x[k] = g[idx[k]];
        break;
      }
      idx[k] = 0;
      x[k] = g[0];
    }
    if (k == static_cast<std::size_t>(-1)) return;
  }
}

inline std::size_t grid_count(std::size_t per_axis, std::size_t dim) {
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= per_axis;
  return total;
}

constexpr std::size_t kMaxProbePoints = std::size_t{1} << 27;

inline void check_budget(std::size_t points) {
  require(points <= kMaxProbePoints, ErrorCode::kResourceLimit,
          "probe net would exceed 2^27 points; raise the target mesh");
}

inline ProbeNet sphere_net(const DomainModel& domain, int d, double target) {
  // Grids on the faces of [-1,1]^{d+1}, centrally projected to the sphere.
  // Projection onto the unit ball is 1-Lipschitz, so face meshes carry over.
  const std::size_t dim = static_cast<std::size_t>(d) + 1;
  const auto g = axis_grid(-1.0, 1.0, 2.0 * target / std::sqrt(double(d)));
  const double mesh = grid_step(g) * std::sqrt(double(d)) / 2.0;
  check_budget(2 * dim * grid_count(g.size(), d));
  const std::size_t last = g.size() - 1;
  PointCloud out(dim);
  out.reserve(2 * dim * grid_count(g.size(), d));
  std::vector<double> x(dim);
  for (std::size_t axis = 0; axis < dim; ++axis) {
    for (const double sign : {-1.0, 1.0}) {
      for_each_grid_point(g, dim - 1, [&](std::span<const double> face, std::span<const std::size_t> idx) {
        // Points on shared edges belong to the face with the lowest axis.
        for (std::size_t j = 0; j < axis; ++j)
          if (idx[j] == 0 || idx[j] == last) return;
        double r2 = 1.0;
        for (std::size_t j = 0, f = 0; j < dim; ++j) {
          x[j] = j == axis ? sign : face[f++];
          if (j != axis) r2 += x[j] * x[j];
        }
        const double inv = 1.0 / std::sqrt(r2);
        for (double& v : x) v *= inv;
        out.push_back(x);
      });
    }
  }
  return ProbeNet{domain, std::move(out), mesh};
}

inline ProbeNet ball_net(const DomainModel& domain, int d, double target) {
  // Axis grid over [-1,1]^d. Grid points within one mesh outside the ball
  // are replaced by their projection onto the sphere (1-Lipschitz).
  const std::size_t dim = static_cast<std::size_t>(d);
  const auto g = axis_grid(-1.0, 1.0, 2.0 * target / std::sqrt(double(d)));
  const double mesh = grid_step(g) * std::sqrt(double(d)) / 2.0;
  check_budget(grid_count(g.size(), dim));
  PointCloud out(dim);
  std::vector<double> x(dim);
  for_each_grid_point(g, dim, [&](std::span<const double> p, std::span<const std::size_t>) {
    const double r = norm(p);
    if (r <= 1.0) {
      out.push_back(p);
    } else if (r <= 1.0 + mesh) {
      for (std::size_t k = 0; k < dim; ++k) x[k] = p[k] / r;
      out.push_back(x);
    }
  });
  return ProbeNet{domain, std::move(out), mesh};
}

inline ProbeNet cube_net(const DomainModel& domain, std::size_t dim, double lo, double hi,
                         double target) {
  const auto g = axis_grid(lo, hi, 2.0 * target / std::sqrt(double(dim)));
  const double mesh = grid_step(g) * std::sqrt(double(dim)) / 2.0;
  check_budget(grid_count(g.size(), dim));
  PointCloud out(dim);
  out.reserve(grid_count(g.size(), dim));
  for_each_grid_point(g, dim, [&](std::span<const double> p, std::span<const std::size_t>) {
    out.push_back(p);
  });
  return ProbeNet{domain, std::move(out), mesh};
}

inline ProbeNet polyline_net(const DomainModel& domain, const Polyline& line, double target) {
  PointCloud out(line.ambient_dim());
  std::vector<double> x(line.ambient_dim());
  double mesh = 0.0;
  for (std::size_t e = 0; e < line.edge_count(); ++e) {
    const double len = line.edge_length(e);
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(len / (2.0 * target))));
    mesh = std::max(mesh, len / (2.0 * double(steps)));
    for (std::size_t j = (e == 0 ? 0 : 1); j <= steps; ++j) {
      line.point_on_edge(e, len * double(j) / double(steps), x);
      out.push_back(x);
    }
  }
  return ProbeNet{domain, std::move(out), mesh};
}

inline ProbeNet cantor_net(const DomainModel& domain, double target) {
  // Both endpoints of every depth-k cylinder lie in the set; any Cantor
  // point is within half a cylinder length of one of them.
  int depth = 0;
  double width = 1.0;
  while (width / 2.0 > target) {
    width /= 3.0;
    ++depth;
  }
  require(depth <= 24, ErrorCode::kResourceLimit, "Cantor probe net deeper than 24 levels");
  PointCloud out(1);
  const std::uint64_t cylinders = std::uint64_t{1} << depth;
  for (std::uint64_t c = 0; c < cylinders; ++c) {
    double left = 0.0, w = 1.0;
    for (int k = depth - 1; k >= 0; --k) {
      w /= 3.0;
      if ((c >> k) & 1u) left += 2.0 * w;
    }
    out.push_back({left});
    out.push_back({left + width});
  }
  return ProbeNet{domain, std::move(out), width / 2.0};
}

inline ProbeNet polyhedron_net(const DomainModel& domain, const Polyhedron3& poly, double target) {
  // Interior grid (mesh target/2) kept where it lies in P, plus triangle
  // grids on every face (mesh target/2). A domain point whose nearest grid
  // point is outside P reaches the boundary within the interior mesh.
  const double half = target / 2.0;
  const auto [lo, hi] = domain.bounding_box();
  PointCloud out(3);
  double interior_mesh = 0.0;
  {
    const double step = 2.0 * half / std::sqrt(3.0);
    std::array<std::vector<double>, 3> g;
    std::size_t total = 1;
    for (int k = 0; k < 3; ++k) {
      g[k] = axis_grid(lo[k], hi[k], step);
      total *= g[k].size();
      const double s = grid_step(g[k]);
      interior_mesh += s * s;
    }
    check_budget(total);
    interior_mesh = std::sqrt(interior_mesh) / 2.0;
    for (double x : g[0])
      for (double y : g[1])
        for (double z : g[2])
          if (poly.contains({x, y, z})) out.push_back({x, y, z});
  }
  double face_mesh = 0.0;
  const auto& v = poly.vertices();
  for (const auto& face : poly.faces()) {
    for (std::size_t t = 1; t + 1 < face.size(); ++t) {
      const Vec3& a = v[face[0]];
      const Vec3& b = v[face[t]];
      const Vec3& c = v[face[t + 1]];
      const double longest =
          std::max({length(sub(b, a)), length(sub(c, b)), length(sub(a, c))});
      // Every point of a triangle is within (longest edge)/sqrt(3) of a vertex.
      const auto k = static_cast<std::size_t>(
          std::max(1.0, std::ceil(longest / (std::sqrt(3.0) * half))));
      check_budget(out.size() + (k + 1) * (k + 2) / 2);
      face_mesh = std::max(face_mesh, longest / (double(k) * std::sqrt(3.0)));
      for (std::size_t i = 0; i <= k; ++i)
        for (std::size_t j = 0; i + j <= k; ++j) {
          const double s = double(i) / double(k), u = double(j) / double(k);
          out.push_back({a[0] + s * (b[0] - a[0]) + u * (c[0] - a[0]),
                         a[1] + s * (b[1] - a[1]) + u * (c[1] - a[1]),
                         a[2] + s * (b[2] - a[2]) + u * (c[2] - a[2])});
        }
    }
  }
  for (const auto& p : v) out.push_back({p[0], p[1], p[2]});
  return ProbeNet{domain, std::move(out), interior_mesh + face_mesh};
}

}  // namespace detail

/// Net with certified_mesh <= target_mesh.
inline ProbeNet build_probe_net(const DomainModel& domain, double target_mesh) {
  require(target_mesh > 0.0 && std::isfinite(target_mesh), ErrorCode::kInvalidArgument,
          "target mesh must be positive");
  return std::visit(
      [&](const auto& p) -> ProbeNet {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sphere>) return detail::sphere_net(domain, p.d, target_mesh);
        else if constexpr (std::is_same_v<T, Ball>) return detail::ball_net(domain, p.d, target_mesh);
        else if constexpr (std::is_same_v<T, Cube>)
          return detail::cube_net(domain, std::size_t(p.d), 0.0, 1.0, target_mesh);
        else if constexpr (std::is_same_v<T, IntervalUniform>)
          return detail::cube_net(domain, 1, 0.0, 1.0, target_mesh);
        else if constexpr (std::is_same_v<T, ArcsineInterval>)
          return detail::cube_net(domain, 1, -1.0, 1.0, target_mesh);
        else if constexpr (std::is_same_v<T, Polyline>) return detail::polyline_net(domain, p, target_mesh);
        else if constexpr (std::is_same_v<T, Polyhedron3>)
          return detail::polyhedron_net(domain, p, target_mesh);
        else return detail::cantor_net(domain, target_mesh);
      },
      domain.params());
}

/// Number of points build_probe_net would produce, without building it.
/// Exact for grid-based kinds; an upper bound for sphere, ball, polyhedron.
inline double estimate_probe_count(const DomainModel& domain, double target_mesh) {
  const auto per_axis = [](double extent, double step) {
    return std::max(1.0, std::ceil(extent / step)) + 1.0;
  };
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sphere>)
          return 2.0 * (p.d + 1) * std::pow(per_axis(2.0, 2.0 * target_mesh / std::sqrt(double(p.d))), p.d);
        else if constexpr (std::is_same_v<T, Ball>)
          return std::pow(per_axis(2.0, 2.0 * target_mesh / std::sqrt(double(p.d))), p.d);
        else if constexpr (std::is_same_v<T, Cube>)
          return std::pow(per_axis(1.0, 2.0 * target_mesh / std::sqrt(double(p.d))), p.d);
        else if constexpr (std::is_same_v<T, IntervalUniform>) return per_axis(1.0, 2.0 * target_mesh);
        else if constexpr (std::is_same_v<T, ArcsineInterval>) return per_axis(2.0, 2.0 * target_mesh);
        else if constexpr (std::is_same_v<T, Polyline>) return p.length() / (2.0 * target_mesh) + double(p.edge_count()) + 1.0;
        else if constexpr (std::is_same_v<T, Polyhedron3>) {
          // Interior grid bound, plus the face grids and vertices exactly.
          const auto [lo, hi] = domain.bounding_box();
          double total = 1.0;
          for (int k = 0; k < 3; ++k) total *= per_axis(hi[k] - lo[k], target_mesh / std::sqrt(3.0));
          const auto& v = p.vertices();
          for (const auto& face : p.faces())
            for (std::size_t t = 1; t + 1 < face.size(); ++t) {
              const double longest = std::max({length(sub(v[face[t]], v[face[0]])),
                                               length(sub(v[face[t + 1]], v[face[t]])),
                                               length(sub(v[face[0]], v[face[t + 1]]))});
              const double k = std::max(1.0, std::ceil(longest / (std::sqrt(3.0) * target_mesh / 2.0)));
              total += (k + 1.0) * (k + 2.0) / 2.0;
            }
          return total + double(v.size());
        } else {
          double width = 1.0, cylinders = 1.0;
          while (width / 2.0 > target_mesh) {
            width /= 3.0;
            cylinders *= 2.0;
          }
          return 2.0 * cylinders;
        }
      },
      domain.params());
}

/// Greedy maximal subset of `pool` with pairwise distances >= separation,
/// scanning the pool in its given order.
inline PointCloud greedy_separated_net(const PointCloud& pool, double separation) {
  require(!pool.empty(), ErrorCode::kInvalidArgument, "pool must be non-empty");
  require(separation > 0.0, ErrorCode::kInvalidArgument, "separation must be positive");
  const std::size_t dim = pool.dim();
  require(dim <= 16, ErrorCode::kInvalidArgument, "greedy net supports dim <= 16");
  const double sep2 = separation * separation;

  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : key) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> buckets;
  PointCloud out(dim);
  std::vector<std::int64_t> key(dim), probe(dim), offset(dim);

  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto p = pool[i];
    for (std::size_t k = 0; k < dim; ++k)
      key[k] = static_cast<std::int64_t>(std::floor(p[k] / separation));
    bool blocked = false;
    std::fill(offset.begin(), offset.end(), -1);
    for (;;) {
      for (std::size_t k = 0; k < dim; ++k) probe[k] = key[k] + offset[k];
      if (auto it = buckets.find(probe); it != buckets.end()) {
        for (std::size_t j : it->second) {
          if (squared_distance(p, out[j]) < sep2) {
            blocked = true;
            break;
          }
        }
      }
      if (blocked) break;
      std::size_t k = dim;
      while (k-- > 0) {
        if (++offset[k] <= 1) break;
        offset[k] = -1;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
    if (!blocked) {
      buckets[key].push_back(out.size());
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace covrad
