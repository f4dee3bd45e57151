#pragma once

// i.i.d. sampling from the normalized reference measure of each domain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "covrad/error.hpp"
#include "covrad/point_cloud.hpp"
#include "covrad/rng.hpp"
#include "covrad/spaces.hpp"

namespace covrad {

struct SampleSet {
  DomainModel domain;
  SeedSpec seed;
  PointCloud points;

  std::size_t size() const noexcept { return points.size(); }
};

namespace detail {

/// Index i with cumulative[i] <= u * total < cumulative[i + 1].
inline std::size_t pick_weighted(const std::vector<double>& cumulative, double u) {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, cumulative.size() - 2);
}

inline void sample_direction(RandomStream& rng, std::span<double> out) {
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& v : out) {
      v = rng.normal();
      r2 += v * v;
    }
  } while (r2 == 0.0);
  const double inv = 1.0 / std::sqrt(r2);
  for (double& v : out) v *= inv;
}

/// Draws one point of `domain` into `out`. `tet_cumulative` holds the
/// cumulative tetrahedron volumes for polyhedra.
inline void sample_point(const DomainModel& domain, RandomStream& rng,
                         const std::vector<double>& tet_cumulative, std::span<double> out) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          sample_direction(rng, out);
        } else if constexpr (std::is_same_v<T, Ball>) {
          sample_direction(rng, out);
          const double r = std::pow(rng.uniform(), 1.0 / p.d);
          for (double& v : out) v *= r;
        } else if constexpr (std::is_same_v<T, Cube> || std::is_same_v<T, IntervalUniform>) {
          for (double& v : out) v = rng.uniform();
        } else if constexpr (std::is_same_v<T, ArcsineInterval>) {
          out[0] = std::cos(std::numbers::pi * rng.uniform());
        } else if constexpr (std::is_same_v<T, Polyline>) {
          const std::size_t e = pick_weighted(p.cumulative(), rng.uniform());
          p.point_on_edge(e, rng.uniform() * p.edge_length(e), out);
        } else if constexpr (std::is_same_v<T, Polyhedron3>) {
          const std::size_t t = pick_weighted(tet_cumulative, rng.uniform());
          double s = rng.uniform(), u = rng.uniform(), w = rng.uniform();
          // Fold the unit cube onto the corner simplex s + u + w <= 1.
          if (s + u > 1.0) {
            s = 1.0 - s;
            u = 1.0 - u;
          }
          if (u + w > 1.0) {
            const double tmp = w;
            w = 1.0 - s - u;
            u = 1.0 - tmp;
          } else if (s + u + w > 1.0) {
            const double tmp = w;
            w = s + u + w - 1.0;
            s = 1.0 - u - tmp;
          }
          const auto& tet = p.tetrahedra()[t];
          const auto& v = p.vertices();
          for (int k = 0; k < 3; ++k) {
            const double a = v[tet[0]][k];
            out[k] = a + s * (v[tet[1]][k] - a) + u * (v[tet[2]][k] - a) + w * (v[tet[3]][k] - a);
          }
        } else {
          // Cantor: depth digits in {0, 2}, one random bit per digit.
          double x = 0.0;
          double weight = 1.0;
          std::uint64_t bits = 0;
          int left = 0;
          for (int k = 0; k < p.depth; ++k) {
            if (left == 0) {
              bits = rng.next_u64();
              left = 64;
            }
            weight /= 3.0;
            if (bits & 1u) x += 2.0 * weight;
            bits >>= 1;
            --left;
          }
          out[0] = x;
        }
      },
      domain.params());
}

inline std::vector<double> tet_cumulative(const DomainModel& domain) {
  std::vector<double> cum;
  if (const auto* poly = std::get_if<Polyhedron3>(&domain.params())) {
    cum.push_back(0.0);
    for (double v : poly->tet_volumes()) cum.push_back(cum.back() + v);
  }
  return cum;
}

}  // namespace detail

/// N i.i.d. points from the normalized measure of `domain`; a pure function
/// of (domain, N, seed).
inline SampleSet sample(const DomainModel& domain, std::size_t n_points, SeedSpec seed) {
  require(n_points >= 1, ErrorCode::kInvalidArgument, "sample needs N >= 1");
  RandomStream rng(seed);
  const auto cum = detail::tet_cumulative(domain);
  PointCloud points(domain.ambient_dim());
  points.coords().resize(n_points * domain.ambient_dim());
  for (std::size_t i = 0; i < n_points; ++i) detail::sample_point(domain, rng, cum, points[i]);
  return SampleSet{domain, seed, std::move(points)};
}

/// Trial t of the returned sequence uses stream_id = t.
inline std::vector<SampleSet> sample_stream(const DomainModel& domain, std::size_t n_points,
                                            std::uint64_t master_seed, std::size_t trial_count) {
  require(trial_count >= 1, ErrorCode::kInvalidArgument, "sample_stream needs trial_count >= 1");
  std::vector<SampleSet> out;
  out.reserve(trial_count);
  for (std::size_t t = 0; t < trial_count; ++t) {
    out.push_back(sample(domain, n_points, SeedSpec{master_seed, t}));
  }
  return out;
}

}  // namespace covrad
