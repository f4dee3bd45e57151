#pragma once

// Covering radius rho(X, K) = sup_{y in K} min_j |y - x_j|: exact on
// one-dimensional domains, certified sandwich [L, L + delta] elsewhere.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "covrad/error.hpp"
#include "covrad/nets.hpp"
#include "covrad/point_cloud.hpp"
#include "covrad/rng.hpp"
#include "covrad/sampler.hpp"
#include "covrad/spaces.hpp"
#include "covrad/spatial_index.hpp"

namespace covrad {

struct CoveringRadiusInterval {
  double lower = 0.0;
  double upper = 0.0;
  double probe_mesh = 0.0;
  /// Probe point attaining `lower` (lowest index among ties), if any.
  std::optional<std::size_t> argmax;

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
};

enum class Verdict { kYes, kNo, kUnknown };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kYes: return "yes";
    case Verdict::kNo: return "no";
    case Verdict::kUnknown: return "unknown";
  }
  return "unknown";
}

struct NetVerdict {
  Verdict value = Verdict::kUnknown;
  /// Yes: eps - U. No: L - eps. Unknown: U - eps (distance still to certify).
  double margin = 0.0;
  /// Probe index of a witness ball for a measure-net "No".
  std::optional<std::size_t> witness;
  /// Largest confidence half-width used by a Monte Carlo measure verdict.
  double ci_half_width = 0.0;
};

enum class WindowSide { kRightEdge, kInterior };

struct WindowSpec {
  double a_exponent = 1.0;
  WindowSide side = WindowSide::kRightEdge;
};

inline bool same_domain(const DomainModel& a, const DomainModel& b) {
  if (a.kind() != b.kind()) return false;
  return std::visit(
      [&](const auto& pa) -> bool {
        using T = std::decay_t<decltype(pa)>;
        const auto& pb = b.as<T>();
        if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Ball> || std::is_same_v<T, Cube>)
          return pa.d == pb.d;
        else if constexpr (std::is_same_v<T, Cantor>) return pa.depth == pb.depth;
        else if constexpr (std::is_same_v<T, Polyline>) return pa.vertices() == pb.vertices();
        else if constexpr (std::is_same_v<T, Polyhedron3>)
          return pa.vertices() == pb.vertices() && pa.tetrahedra() == pb.tetrahedra();
        else return true;
      },
      a.params());
}

namespace detail {

inline std::vector<double> sorted_coordinate(const PointCloud& x) {
  std::vector<double> v(x.coords());
  std::sort(v.begin(), v.end());
  return v;
}

/// sup over [lo, hi] of the distance to a sorted point list (exact).
inline double sup_gap_on_segment(const std::vector<double>& xs, double lo, double hi) {
  double best = std::max(xs.front() - lo, hi - xs.back());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) best = std::max(best, 0.5 * (xs[i + 1] - xs[i]));
  return std::max(best, 0.0);
}

inline std::vector<double> sorted_angles(const PointCloud& x) {
  std::vector<double> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::atan2(x[i][1], x[i][0]);
  std::sort(a.begin(), a.end());
  return a;
}

inline double max_circle_gap(const std::vector<double>& angles) {
  double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t i = 0; i + 1 < angles.size(); ++i) gap = std::max(gap, angles[i + 1] - angles[i]);
  return gap;
}

/// Exact sup over one polyline edge of the distance to the sample.
/// With t_j the projection parameter of x_j and h_j^2 its squared offset,
/// |p(t) - x_j|^2 = t^2 - 2 t t_j + (t_j^2 + h_j^2): the minimum over j is t^2
/// plus a lower envelope of lines, so the maximum over the edge sits at an
/// envelope breakpoint or at an edge endpoint.
inline double polyline_edge_sup(std::span<const double> a, std::span<const double> b,
                                const PointCloud& x) {
  const std::size_t dim = a.size();
  std::vector<double> u(dim);
  double len2 = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    u[k] = b[k] - a[k];
    len2 += u[k] * u[k];
  }
  const double len = std::sqrt(len2);
  for (double& v : u) v /= len;

  struct Site {
    double t, h2;
    double slope() const { return -2.0 * t; }
    double intercept() const { return t * t + h2; }
    double at(double s) const { return (s - t) * (s - t) + h2; }
  };
  std::vector<Site> sites(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    double tj = 0.0;
    for (std::size_t k = 0; k < dim; ++k) tj += (x[j][k] - a[k]) * u[k];
    double h2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double w = x[j][k] - a[k] - tj * u[k];
      h2 += w * w;
    }
    sites[j] = {tj, h2};
  }
  const auto min_at = [&](double s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& site : sites) best = std::min(best, site.at(s));
    return best;
  };
  // Breakpoint of the envelope between sites p and q (p.t < q.t).
  const auto cross_at = [](const Site& p, const Site& q) {
    return 0.5 * (p.t + q.t) + (q.h2 - p.h2) / (2.0 * (q.t - p.t));
  };
  std::sort(sites.begin(), sites.end(),
            [](const Site& p, const Site& q) { return p.t != q.t ? p.t < q.t : p.h2 < q.h2; });
  std::vector<Site> hull;
  for (const auto& site : sites) {
    if (!hull.empty() && hull.back().t == site.t) continue;
    while (hull.size() >= 2 &&
           cross_at(hull[hull.size() - 2], site) <= cross_at(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(site);
  }
  double best = std::max(min_at(0.0), min_at(len));
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const double s = cross_at(hull[i], hull[i + 1]);
    if (s > 0.0 && s < len) best = std::max(best, hull[i].at(s));
  }
  return std::sqrt(best);
}

inline double cantor_covering_radius(const std::vector<double>& xs) {
  double best = std::max(xs.front(), 1.0 - xs.back());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = xs[i], b = xs[i + 1];
    if (b - a <= 2.0 * best) continue;
    const auto [lo, hi] = DomainModel::cantor_bracket(0.5 * (a + b));
    if (lo >= a) best = std::max(best, std::min(lo - a, b - lo));
    if (hi <= b) best = std::max(best, std::min(hi - a, b - hi));
  }
  return best;
}

}  // namespace detail

/// Exact covering radius on the one-dimensional domains (interval, arcsine
/// interval, unit segment, circle with chord distance, polyline, Cantor set).
inline double covering_radius_1d(const DomainModel& domain, const PointCloud& x) {
  require(!x.empty(), ErrorCode::kInvalidArgument, "covering radius of an empty set");
  require(x.dim() == domain.ambient_dim(), ErrorCode::kInvalidArgument, "dimension mismatch");
  if (domain.is<IntervalUniform>() || (domain.is<Cube>() && domain.as<Cube>().d == 1))
    return detail::sup_gap_on_segment(detail::sorted_coordinate(x), 0.0, 1.0);
  if (domain.is<ArcsineInterval>())
    return detail::sup_gap_on_segment(detail::sorted_coordinate(x), -1.0, 1.0);
  if (domain.is_circle()) return 2.0 * std::sin(detail::max_circle_gap(detail::sorted_angles(x)) / 4.0);
  if (domain.is<Cantor>()) return detail::cantor_covering_radius(detail::sorted_coordinate(x));
  if (const auto* line = std::get_if<Polyline>(&domain.params())) {
    double best = 0.0;
    for (std::size_t e = 0; e < line->edge_count(); ++e)
      best = std::max(best, detail::polyline_edge_sup(line->vertices()[e], line->vertices()[e + 1], x));
    return best;
  }
  fail(ErrorCode::kUnsupportedDomain, "no exact covering radius for " + domain.describe());
}

inline bool has_exact_covering(const DomainModel& domain) {
  return domain.is<IntervalUniform>() || domain.is<ArcsineInterval>() || domain.is_circle() ||
         domain.is<Cantor>() || domain.is<Polyline>() || (domain.is<Cube>() && domain.as<Cube>().d == 1);
}

/// Arclength covering radius on the unit circle: half the largest angular gap.
inline double circle_arc_covering_radius(const PointCloud& x) {
  require(!x.empty() && x.dim() == 2, ErrorCode::kInvalidArgument, "need planar points");
  return detail::max_circle_gap(detail::sorted_angles(x)) / 2.0;
}

/// The window [lo, hi] on [-1, 1] for a given N.
inline std::pair<double, double> window_bounds(const WindowSpec& window, double n_for_window) {
  require(window.a_exponent > 0.0 && std::isfinite(window.a_exponent), ErrorCode::kInvalidArgument,
          "window exponent must be positive and finite");
  const double w = std::pow(n_for_window, -window.a_exponent);
  require(w < 2.0, ErrorCode::kInvalidArgument, "window is degenerate (N^-a >= 2)");
  if (window.side == WindowSide::kRightEdge) return {1.0 - w, 1.0};
  require(w < 1.0, ErrorCode::kInvalidArgument, "interior window is empty (N^-a >= 1)");
  return {-1.0 + w, 1.0 - w};
}

/// sup over the window of the distance to X; points outside the window
/// still count as centers.
inline double covering_radius_window(const DomainModel& domain, const PointCloud& x,
                                     const WindowSpec& window, double n_for_window) {
  require(domain.is<ArcsineInterval>(), ErrorCode::kUnsupportedDomain,
          "windowed covering radius is defined on the arcsine interval");
  require(!x.empty(), ErrorCode::kInvalidArgument, "covering radius of an empty set");
  const auto [lo, hi] = window_bounds(window, n_for_window);
  const auto xs = detail::sorted_coordinate(x);
  const auto dist = [&](double y) {
    auto it = std::lower_bound(xs.begin(), xs.end(), y);
    double best = std::numeric_limits<double>::infinity();
    if (it != xs.end()) best = *it - y;
    if (it != xs.begin()) best = std::min(best, y - *(it - 1));
    return best;
  };
  double best = std::max(dist(lo), dist(hi));
  auto first = std::lower_bound(xs.begin(), xs.end(), lo);
  if (first != xs.begin()) --first;
  for (auto it = first; it + 1 != xs.end() && *it <= hi; ++it) {
    const double mid = 0.5 * (*it + *(it + 1));
    if (mid >= lo && mid <= hi) best = std::max(best, 0.5 * (*(it + 1) - *it));
  }
  return best;
}

/// Cell size for an index over X that is searched by covering queries.
inline double covering_cell_size(const DomainModel& domain, std::size_t n_points) {
  const double s = domain.intrinsic_dim();
  const double ambient = static_cast<double>(domain.ambient_dim());
  double cell = covering_scale(domain, n_points);
  if (ambient > s) cell *= 0.75;
  return cell;
}

/// Certified sandwich: L = max over probe points of the distance to X,
/// U = L + probe mesh.
inline CoveringRadiusInterval covering_radius_bounds(const DomainModel& domain, const PointCloud& x,
                                                     const ProbeNet& probe) {
  require(same_domain(domain, probe.domain), ErrorCode::kInvalidArgument,
          "probe net was built for a different domain");
  require(!x.empty(), ErrorCode::kInvalidArgument, "covering radius of an empty set");
  require(x.dim() == domain.ambient_dim(), ErrorCode::kInvalidArgument, "dimension mismatch");
  require(!probe.points.empty(), ErrorCode::kInvalidArgument, "empty probe net");
  const SpatialIndex index(x, covering_cell_size(domain, x.size()));
  const std::size_t n = probe.points.size();
  // A strided pre-pass gives a valid floor for early exits.
  double best = 0.0;
  std::size_t arg = 0;
  const std::size_t stride = std::max<std::size_t>(1, n / 4096);
  for (std::size_t i = 0; i < n; i += stride) {
    const double v = index.nearest_sq_above(probe.points[i], best);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double v = index.nearest_sq_above(probe.points[i], best);
    if (v > best || (v == best && i < arg)) {
      best = v;
      arg = i;
    }
  }
  const double lower = std::sqrt(best);
  return {lower, lower + probe.certified_mesh, probe.certified_mesh, arg};
}

/// Exact value as a zero-width interval when available, sandwich otherwise.
inline CoveringRadiusInterval covering_interval(const DomainModel& domain, const PointCloud& x,
                                                const ProbeNet* probe) {
  if (has_exact_covering(domain)) {
    const double rho = covering_radius_1d(domain, x);
    return {rho, rho, 0.0, std::nullopt};
  }
  require(probe != nullptr, ErrorCode::kInvalidArgument, "probe net required for " + domain.describe());
  return covering_radius_bounds(domain, x, *probe);
}

// ---------------------------------------------------------------------------
// Ball measures

struct MeasureEstimate {
  double estimate = 0.0;
  double ci_half_width = 0.0;
};

/// z for a two-sided 99% normal interval.
inline constexpr double kZ99 = 2.5758293035489004;

namespace detail {

inline double arcsine_cdf(double x) { return 1.0 - std::acos(std::clamp(x, -1.0, 1.0)) / std::numbers::pi; }

/// Cantor function (distribution of the uniform Cantor measure).
inline double cantor_cdf(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double value = 0.0, weight = 0.5, a = 0.0, w = 1.0;
  for (int k = 0; k < 64; ++k) {
    const double third = w / 3.0;
    if (t < a + third) {
      w = third;
    } else if (t <= a + 2.0 * third) {
      return value + weight;
    } else {
      value += weight;
      a += 2.0 * third;
      w = third;
    }
    weight /= 2.0;
  }
  return value;
}

/// Normalized measure of {x in S^d : |x - c| <= r}, d in {1, 2}.
inline double sphere_cap_measure(int d, std::span<const double> c, double r) {
  const double cn = norm(c);
  if (cn == 0.0) return r >= 1.0 ? 1.0 : 0.0;
  // |x - c|^2 = 1 + |c|^2 - 2 |c| cos(phi) <= r^2.
  const double cos_min = (1.0 + cn * cn - r * r) / (2.0 * cn);
  if (cos_min <= -1.0) return 1.0;
  if (cos_min >= 1.0) return 0.0;
  if (d == 1) return std::acos(cos_min) / std::numbers::pi;
  return 0.5 * (1.0 - cos_min);
}

}  // namespace detail

/// Estimates mu(B(center, r)) for the normalized measure. Monte Carlo draws
/// are shared across queries, so many balls can be measured cheaply.
class BallMeasure {
 public:
  BallMeasure(const DomainModel& domain, std::size_t mc_budget, SeedSpec seed) : domain_(domain) {
    if (!exact()) {
      require(mc_budget >= 100, ErrorCode::kInvalidArgument, "Monte Carlo budget must be >= 100");
      cloud_ = sample(domain, mc_budget, seed).points;
    }
  }

  bool exact() const noexcept {
    return domain_.is<IntervalUniform>() || domain_.is<ArcsineInterval>() || domain_.is<Cantor>() ||
           (domain_.is<Sphere>() && domain_.as<Sphere>().d <= 2);
  }

  MeasureEstimate operator()(std::span<const double> center, double r) const {
    require(r > 0.0, ErrorCode::kInvalidArgument, "ball radius must be positive");
    require(center.size() == domain_.ambient_dim(), ErrorCode::kInvalidArgument, "dimension mismatch");
    if (domain_.is<IntervalUniform>()) {
      return {std::max(0.0, std::min(1.0, center[0] + r) - std::max(0.0, center[0] - r)), 0.0};
    }
    if (domain_.is<ArcsineInterval>()) {
      return {std::max(0.0, detail::arcsine_cdf(center[0] + r) - detail::arcsine_cdf(center[0] - r)), 0.0};
    }
    if (domain_.is<Cantor>()) {
      return {std::max(0.0, detail::cantor_cdf(center[0] + r) - detail::cantor_cdf(center[0] - r)), 0.0};
    }
    if (domain_.is<Sphere>() && domain_.as<Sphere>().d <= 2) {
      return {detail::sphere_cap_measure(domain_.as<Sphere>().d, center, r), 0.0};
    }
    const double r2 = r * r;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cloud_.size(); ++i) hits += squared_distance(cloud_[i], center) <= r2;
    const double m = static_cast<double>(cloud_.size());
    const double p = static_cast<double>(hits) / m;
    return {p, kZ99 * std::sqrt(p * (1.0 - p) / m)};
  }

 private:
  DomainModel domain_;
  PointCloud cloud_;
};

inline MeasureEstimate ball_measure(const DomainModel& domain, std::span<const double> center,
                                    double r, std::size_t mc_budget, SeedSpec seed) {
  require(r > 0.0, ErrorCode::kInvalidArgument, "ball radius must be positive");
  return BallMeasure(domain, mc_budget, seed)(center, r);
}

// ---------------------------------------------------------------------------
// Net verdicts

inline NetVerdict eps_net_verdict(const CoveringRadiusInterval& bounds, double eps) {
  if (bounds.upper <= eps) return {Verdict::kYes, eps - bounds.upper, {}, 0.0};
  if (bounds.lower > eps) return {Verdict::kNo, bounds.lower - eps, {}, 0.0};
  return {Verdict::kUnknown, bounds.upper - eps, {}, 0.0};
}

/// Is A an eps-net of the domain (rho(A) <= eps)? One-dimensional domains
/// use the exact radius, so the verdict is never Unknown there.
inline NetVerdict is_eps_net(const DomainModel& domain, const PointCloud& a, double eps,
                             const ProbeNet& probe) {
  require(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
  require(same_domain(domain, probe.domain), ErrorCode::kInvalidArgument,
          "probe net was built for a different domain");
  return eps_net_verdict(covering_interval(domain, a, &probe), eps);
}

/// Does A meet every ball of measure >= eps? For each probe point y with
/// r_y = dist(y, A): "No" when mu(B(y, r_y)) is certainly above eps; "Yes"
/// when every mu(B(y, r_y + 2 delta)) is certainly below eps, since any
/// ball missing A is contained in one of those.
inline NetVerdict is_measure_eps_net(const DomainModel& domain, const PointCloud& a, double eps,
                                     const ProbeNet& probe, std::size_t mc_budget, SeedSpec seed) {
  require(eps > 0.0 && eps < 1.0, ErrorCode::kInvalidArgument, "eps must lie in (0, 1)");
  require(same_domain(domain, probe.domain), ErrorCode::kInvalidArgument,
          "probe net was built for a different domain");
  const BallMeasure measure(domain, mc_budget, seed);
  const SpatialIndex index(a);
  bool all_small = true;
  double worst_gap = -std::numeric_limits<double>::infinity();
  double ci_used = 0.0;
  for (std::size_t i = 0; i < probe.points.size(); ++i) {
    const auto y = probe.points[i];
    const double r = index.nearest(y).distance;
    if (r > 0.0) {
      const auto inside = measure(y, r);
      ci_used = std::max(ci_used, inside.ci_half_width);
      if (inside.estimate - inside.ci_half_width > eps) {
        return {Verdict::kNo, inside.estimate - inside.ci_half_width - eps, i, ci_used};
      }
    }
    const auto grown = measure(y, r + 2.0 * probe.certified_mesh);
    ci_used = std::max(ci_used, grown.ci_half_width);
    const double hi = grown.estimate + grown.ci_half_width;
    worst_gap = std::max(worst_gap, hi - eps);
    if (hi >= eps) all_small = false;
  }
  if (all_small) return {Verdict::kYes, -worst_gap, {}, ci_used};
  return {Verdict::kUnknown, worst_gap, {}, ci_used};
}

}  // namespace covrad
