#pragma once

// Catalog of metric-measure spaces: every domain is a compact subset of
// Euclidean space with the ambient distance and a normalized reference
// measure (Hausdorff measure, except for the arcsine interval).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "covrad/error.hpp"
#include "covrad/point_cloud.hpp"

namespace covrad {

enum class DomainKind {
  kSphere,
  kBall,
  kCube,
  kIntervalUniform,
  kArcsineInterval,
  kPolyline,
  kPolyhedron3,
  kCantor,
};

inline std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::kSphere: return "sphere";
    case DomainKind::kBall: return "ball";
    case DomainKind::kCube: return "cube";
    case DomainKind::kIntervalUniform: return "interval";
    case DomainKind::kArcsineInterval: return "arcsine";
    case DomainKind::kPolyline: return "polyline";
    case DomainKind::kPolyhedron3: return "polyhedron";
    case DomainKind::kCantor: return "cantor";
  }
  return "unknown";
}

inline double log_ratio_cantor() { return std::log(2.0) / std::log(3.0); }

/// Volume of the unit ball in R^s.
inline double unit_ball_volume(int s) {
  require(s >= 1, ErrorCode::kInvalidArgument, "unit_ball_volume needs s >= 1");
  const double half = 0.5 * s;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(1.0 + half));
}

// ---------------------------------------------------------------------------
// Domain parameter types

/// Unit sphere S^d in R^{d+1}.
struct Sphere {
  int d = 2;
};

/// Closed unit ball in R^d.
struct Ball {
  int d = 2;
};

/// [0,1]^d.
struct Cube {
  int d = 2;
};

/// [0,1] with Lebesgue measure.
struct IntervalUniform {};

/// [-1,1] with dx / (pi sqrt(1-x^2)).
struct ArcsineInterval {};

/// Middle-third Cantor set; points are generated to `depth` ternary digits.
struct Cantor {
  int depth = 40;
};

class Polyline {
 public:
  explicit Polyline(PointCloud vertices) : vertices_(std::move(vertices)) {
    require(vertices_.size() >= 2, ErrorCode::kInvalidGeometry,
            "polyline needs at least two vertices");
    cumulative_.assign(1, 0.0);
    for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
      const double len = distance(vertices_[i], vertices_[i + 1]);
      require(len > 0.0, ErrorCode::kInvalidGeometry,
              "consecutive polyline vertices must be distinct");
      cumulative_.push_back(cumulative_.back() + len);
    }
  }

  const PointCloud& vertices() const noexcept { return vertices_; }
  std::size_t edge_count() const noexcept { return vertices_.size() - 1; }
  double edge_length(std::size_t e) const { return cumulative_[e + 1] - cumulative_[e]; }
  double length() const noexcept { return cumulative_.back(); }
  /// Arclength offsets of the vertices; front() == 0, back() == length().
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  std::size_t ambient_dim() const noexcept { return vertices_.dim(); }

  /// Point at arclength `s` along edge `e` (s measured from the edge start).
  void point_on_edge(std::size_t e, double s, std::span<double> out) const {
    const auto a = vertices_[e];
    const auto b = vertices_[e + 1];
    const double t = s / edge_length(e);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + t * (b[k] - a[k]);
  }

 private:
  PointCloud vertices_;
  std::vector<double> cumulative_;
};

using Vec3 = std::array<double, 3>;

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double length(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct PolyEdge {
  std::array<std::size_t, 2> vertices{};
  /// The two faces meeting along this edge.
  std::array<std::size_t, 2> faces{};
};

/// Polyhedron in R^3 supplied with a tetrahedral decomposition, outward
/// oriented face polygons (counter-clockwise seen from outside) and an edge
/// list carrying the two adjacent faces of every edge.
class Polyhedron3 {
 public:
  Polyhedron3(std::vector<Vec3> vertices, std::vector<std::array<std::size_t, 4>> tetrahedra,
              std::vector<std::vector<std::size_t>> faces, std::vector<PolyEdge> edges = {})
      : vertices_(std::move(vertices)),
        tetrahedra_(std::move(tetrahedra)),
        faces_(std::move(faces)),
        edges_(std::move(edges)) {
    require(!vertices_.empty() && !tetrahedra_.empty() && !faces_.empty(),
            ErrorCode::kInvalidGeometry, "polyhedron needs vertices, tetrahedra and faces");
    const auto check_index = [&](std::size_t i) {
      require(i < vertices_.size(), ErrorCode::kInvalidGeometry,
              "polyhedron vertex index out of range");
    };
    for (const auto& tet : tetrahedra_) {
      for (auto i : tet) check_index(i);
      const double v = signed_tet_volume(tet);
      require(std::abs(v) > 0.0, ErrorCode::kInvalidGeometry,
              "tetrahedron with zero volume");
      tet_volumes_.push_back(std::abs(v));
    }
    double tet_total = 0.0;
    for (double v : tet_volumes_) tet_total += v;

    double divergence = 0.0;
    for (const auto& face : faces_) {
      require(face.size() >= 3, ErrorCode::kInvalidGeometry, "face with fewer than 3 vertices");
      for (auto i : face) check_index(i);
      const Vec3& p0 = vertices_[face[0]];
      for (std::size_t k = 1; k + 1 < face.size(); ++k) {
        divergence += dot(p0, cross(vertices_[face[k]], vertices_[face[k + 1]]));
      }
    }
    volume_ = divergence / 6.0;
    require(volume_ > 0.0, ErrorCode::kInvalidGeometry,
            "faces must be oriented outward (divergence volume is not positive)");
    require(std::abs(tet_total - volume_) <= 1e-9 * volume_, ErrorCode::kInvalidGeometry,
            "tetrahedra volumes do not sum to the polyhedron volume");

    if (edges_.empty()) edges_ = derive_edges(faces_);
    for (const auto& e : edges_) {
      check_index(e.vertices[0]);
      check_index(e.vertices[1]);
      require(e.faces[0] < faces_.size() && e.faces[1] < faces_.size() &&
                  e.faces[0] != e.faces[1],
              ErrorCode::kInvalidGeometry, "edge must reference two distinct faces");
    }
  }

  /// Pairs every undirected face edge with the two faces that share it.
  static std::vector<PolyEdge> derive_edges(const std::vector<std::vector<std::size_t>>& faces) {
    struct Half {
      std::size_t lo, hi, face;
    };
    std::vector<Half> halves;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto& face = faces[f];
      for (std::size_t k = 0; k < face.size(); ++k) {
        const std::size_t a = face[k];
        const std::size_t b = face[(k + 1) % face.size()];
        halves.push_back({std::min(a, b), std::max(a, b), f});
      }
    }
    std::sort(halves.begin(), halves.end(), [](const Half& x, const Half& y) {
      return std::tie(x.lo, x.hi, x.face) < std::tie(y.lo, y.hi, y.face);
    });
    std::vector<PolyEdge> edges;
    for (std::size_t i = 0; i < halves.size();) {
      std::size_t j = i;
      while (j < halves.size() && halves[j].lo == halves[i].lo && halves[j].hi == halves[i].hi) ++j;
      require(j - i == 2, ErrorCode::kInvalidGeometry,
              "every face edge must be shared by exactly two faces");
      edges.push_back({{halves[i].lo, halves[i].hi}, {halves[i].face, halves[i + 1].face}});
      i = j;
    }
    return edges;
  }

  /// Axis-aligned box [lo, hi].
  static Polyhedron3 box(const Vec3& lo, const Vec3& hi) {
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) {
      v.push_back({(i & 1) ? hi[0] : lo[0], (i & 2) ? hi[1] : lo[1], (i & 4) ? hi[2] : lo[2]});
    }
    // Kuhn split along the 0 -> 7 diagonal.
    std::vector<std::array<std::size_t, 4>> tets;
    const std::array<int, 3> axes{1, 2, 4};
    std::array<int, 3> perm{0, 1, 2};
    do {
      const std::size_t a = axes[perm[0]];
      const std::size_t b = a + axes[perm[1]];
      tets.push_back({0, a, b, 7});
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<std::vector<std::size_t>> faces = {
        {0, 2, 3, 1}, {4, 5, 7, 6},  // z = lo, z = hi
        {0, 1, 5, 4}, {2, 6, 7, 3},  // y = lo, y = hi
        {0, 4, 6, 2}, {1, 3, 7, 5},  // x = lo, x = hi
    };
    return Polyhedron3(std::move(v), std::move(tets), std::move(faces));
  }

  /// Right prism over the equilateral triangle with the given side.
  static Polyhedron3 triangular_prism(double side, double height) {
    const double h = side * std::sqrt(3.0) / 2.0;
    std::vector<Vec3> v = {{0, 0, 0},      {side, 0, 0},      {side / 2, h, 0},
                           {0, 0, height}, {side, 0, height}, {side / 2, h, height}};
    std::vector<std::array<std::size_t, 4>> tets = {{0, 1, 2, 3}, {1, 2, 3, 4}, {2, 3, 4, 5}};
    std::vector<std::vector<std::size_t>> faces = {
        {0, 2, 1}, {3, 4, 5}, {0, 1, 4, 3}, {1, 2, 5, 4}, {2, 0, 3, 5}};
    return Polyhedron3(std::move(v), std::move(tets), std::move(faces));
  }

  static Polyhedron3 regular_tetrahedron() {
    std::vector<Vec3> v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    std::vector<std::array<std::size_t, 4>> tets = {{0, 1, 2, 3}};
    std::vector<std::vector<std::size_t>> faces = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
    return Polyhedron3(std::move(v), std::move(tets), std::move(faces));
  }

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<std::array<std::size_t, 4>>& tetrahedra() const noexcept { return tetrahedra_; }
  const std::vector<std::vector<std::size_t>>& faces() const noexcept { return faces_; }
  const std::vector<PolyEdge>& edges() const noexcept { return edges_; }
  const std::vector<double>& tet_volumes() const noexcept { return tet_volumes_; }
  double volume() const noexcept { return volume_; }

  /// Newell normal of face f, scaled to unit length.
  Vec3 face_normal(std::size_t f) const {
    const auto& face = faces_[f];
    Vec3 n{0, 0, 0};
    for (std::size_t k = 0; k < face.size(); ++k) {
      const Vec3& a = vertices_[face[k]];
      const Vec3& b = vertices_[face[(k + 1) % face.size()]];
      n[0] += (a[1] - b[1]) * (a[2] + b[2]);
      n[1] += (a[2] - b[2]) * (a[0] + b[0]);
      n[2] += (a[0] - b[0]) * (a[1] + b[1]);
    }
    const double len = length(n);
    require(len > 1e-300, ErrorCode::kInvalidGeometry, "face with zero area");
    return scale(n, 1.0 / len);
  }

  /// Barycentric containment test over the tetrahedral decomposition.
  bool contains(const Vec3& p, double tol = 1e-12) const {
    for (const auto& tet : tetrahedra_) {
      if (tet_contains(tet, p, tol)) return true;
    }
    return false;
  }

  bool tet_contains(const std::array<std::size_t, 4>& tet, const Vec3& p, double tol) const {
    const Vec3& a = vertices_[tet[0]];
    const Vec3 e1 = sub(vertices_[tet[1]], a);
    const Vec3 e2 = sub(vertices_[tet[2]], a);
    const Vec3 e3 = sub(vertices_[tet[3]], a);
    const Vec3 q = sub(p, a);
    const double det = dot(e1, cross(e2, e3));
    const double l1 = dot(q, cross(e2, e3)) / det;
    const double l2 = dot(e1, cross(q, e3)) / det;
    const double l3 = dot(e1, cross(e2, q)) / det;
    const double l0 = 1.0 - l1 - l2 - l3;
    return l0 >= -tol && l1 >= -tol && l2 >= -tol && l3 >= -tol;
  }

  double signed_tet_volume(const std::array<std::size_t, 4>& tet) const {
    const Vec3& a = vertices_[tet[0]];
    return dot(sub(vertices_[tet[1]], a),
               cross(sub(vertices_[tet[2]], a), sub(vertices_[tet[3]], a))) /
           6.0;
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<std::size_t, 4>> tetrahedra_;
  std::vector<std::vector<std::size_t>> faces_;
  std::vector<PolyEdge> edges_;
  std::vector<double> tet_volumes_;
  double volume_ = 0.0;
};

// ---------------------------------------------------------------------------

/// A member of the domain catalog. Immutable after construction.
class DomainModel {
 public:
  using Params = std::variant<Sphere, Ball, Cube, IntervalUniform, ArcsineInterval, Polyline,
                              Polyhedron3, Cantor>;

  DomainModel(Params params) : params_(std::move(params)) { validate(); }  // NOLINT

  /// Implicit from any single domain type, e.g. `DomainModel d = Sphere{2};`.
  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, DomainModel> && !std::is_same_v<std::decay_t<T>, Params> &&
             std::is_constructible_v<Params, T>)
  DomainModel(T&& alt) : params_(std::forward<T>(alt)) {  // NOLINT
    validate();
  }

  DomainKind kind() const noexcept { return static_cast<DomainKind>(params_.index()); }
  const Params& params() const noexcept { return params_; }

  template <typename T>
  const T& as() const {
    const T* p = std::get_if<T>(&params_);
    require(p != nullptr, ErrorCode::kUnsupportedDomain, "domain is not of the requested kind");
    return *p;
  }
  template <typename T>
  bool is() const noexcept {
    return std::holds_alternative<T>(params_);
  }

  std::size_t ambient_dim() const {
    return std::visit(
        [](const auto& p) -> std::size_t {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere>) return p.d + 1;
          else if constexpr (std::is_same_v<T, Ball> || std::is_same_v<T, Cube>) return p.d;
          else if constexpr (std::is_same_v<T, Polyline>) return p.ambient_dim();
          else if constexpr (std::is_same_v<T, Polyhedron3>) return 3;
          else return 1;
        },
        params_);
  }

  /// Hausdorff dimension s of the reference measure.
  double intrinsic_dim() const {
    return std::visit(
        [](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Ball> ||
                        std::is_same_v<T, Cube>)
            return p.d;
          else if constexpr (std::is_same_v<T, Polyhedron3>) return 3.0;
          else if constexpr (std::is_same_v<T, Cantor>) return log_ratio_cantor();
          else return 1.0;
        },
        params_);
  }

  /// Sphere d = 1 is the only closed curve in the catalog.
  bool is_circle() const noexcept {
    const auto* s = std::get_if<Sphere>(&params_);
    return s != nullptr && s->d == 1;
  }

  double diameter() const {
    return std::visit(
        [](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Ball>) return 2.0;
          else if constexpr (std::is_same_v<T, Cube>) return std::sqrt(double(p.d));
          else if constexpr (std::is_same_v<T, ArcsineInterval>) return 2.0;
          else if constexpr (std::is_same_v<T, Polyline>) {
            double best = 0.0;
            const auto& v = p.vertices();
            for (std::size_t i = 0; i < v.size(); ++i)
              for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, distance(v[i], v[j]));
            return best;
          } else if constexpr (std::is_same_v<T, Polyhedron3>) {
            double best = 0.0;
            const auto& v = p.vertices();
            for (std::size_t i = 0; i < v.size(); ++i)
              for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, length(sub(v[i], v[j])));
            return best;
          } else return 1.0;
        },
        params_);
  }

  /// Axis-aligned bounding box of the domain.
  std::pair<Point, Point> bounding_box() const {
    const std::size_t dim = ambient_dim();
    Point lo(dim, 0.0), hi(dim, 1.0);
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Ball> ||
                        std::is_same_v<T, ArcsineInterval>) {
            std::fill(lo.begin(), lo.end(), -1.0);
          } else if constexpr (std::is_same_v<T, Polyline>) {
            const auto& v = p.vertices();
            for (std::size_t k = 0; k < dim; ++k) lo[k] = hi[k] = v[0][k];
            for (std::size_t i = 1; i < v.size(); ++i)
              for (std::size_t k = 0; k < dim; ++k) {
                lo[k] = std::min(lo[k], v[i][k]);
                hi[k] = std::max(hi[k], v[i][k]);
              }
          } else if constexpr (std::is_same_v<T, Polyhedron3>) {
            const auto& v = p.vertices();
            for (std::size_t k = 0; k < 3; ++k) lo[k] = hi[k] = v[0][k];
            for (const auto& x : v)
              for (std::size_t k = 0; k < 3; ++k) {
                lo[k] = std::min(lo[k], x[k]);
                hi[k] = std::max(hi[k], x[k]);
              }
          }
        },
        params_);
    return {lo, hi};
  }

  /// Membership within `tol` (ideal Cantor set tested to `tol` resolution).
  bool contains(std::span<const double> x, double tol = 1e-12) const {
    if (x.size() != ambient_dim()) return false;
    for (double v : x)
      if (!std::isfinite(v)) return false;
    return std::visit(
        [&](const auto& p) -> bool {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere>) return std::abs(norm(x) - 1.0) <= tol;
          else if constexpr (std::is_same_v<T, Ball>) return norm(x) <= 1.0 + tol;
          else if constexpr (std::is_same_v<T, Cube> || std::is_same_v<T, IntervalUniform>) {
            for (double v : x)
              if (v < -tol || v > 1.0 + tol) return false;
            return true;
          } else if constexpr (std::is_same_v<T, ArcsineInterval>) {
            return x[0] >= -1.0 - tol && x[0] <= 1.0 + tol;
          } else if constexpr (std::is_same_v<T, Polyline>) {
            return distance_to_polyline(p, x) <= tol;
          } else if constexpr (std::is_same_v<T, Polyhedron3>) {
            return p.contains({x[0], x[1], x[2]}, tol);
          } else {
            return cantor_distance(x[0]) <= tol;
          }
        },
        params_);
  }

  /// Euclidean distance from t to the ideal middle-third Cantor set.
  static double cantor_distance(double t) {
    if (t <= 0.0) return -t;
    if (t >= 1.0) return t - 1.0;
    const auto [lo, hi] = cantor_bracket(t);
    return std::min(t - lo, hi - t);
  }

  /// Largest Cantor point <= t and smallest Cantor point >= t, for t in [0,1].
  static std::pair<double, double> cantor_bracket(double t) {
    double a = 0.0;
    double w = 1.0;
    for (int k = 0; k < 64; ++k) {
      const double third = w / 3.0;
      if (t <= a + third) {
        w = third;
      } else if (t >= a + 2.0 * third) {
        a += 2.0 * third;
        w = third;
      } else {
        return {a + third, a + 2.0 * third};
      }
      if (w < 1e-300) break;
    }
    return {std::min(t, a), std::max(t, a)};
  }

  static double distance_to_polyline(const Polyline& line, std::span<const double> x) {
    const auto& v = line.vertices();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < line.edge_count(); ++e) {
      const auto a = v[e];
      const auto b = v[e + 1];
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        num += (x[k] - a[k]) * (b[k] - a[k]);
        den += (b[k] - a[k]) * (b[k] - a[k]);
      }
      const double t = std::clamp(num / den, 0.0, 1.0);
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - (a[k] + t * (b[k] - a[k]));
        s += d * d;
      }
      best = std::min(best, std::sqrt(s));
    }
    return best;
  }

  std::string describe() const {
    std::string out(to_string(kind()));
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Ball> ||
                        std::is_same_v<T, Cube>)
            out += "(d=" + std::to_string(p.d) + ")";
          else if constexpr (std::is_same_v<T, Cantor>)
            out += "(depth=" + std::to_string(p.depth) + ")";
        },
        params_);
    return out;
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Ball> ||
                        std::is_same_v<T, Cube>) {
            require(p.d >= 1, ErrorCode::kInvalidArgument, "dimension must be >= 1");
            require(p.d <= 16, ErrorCode::kInvalidArgument, "dimension above 16 is not supported");
          } else if constexpr (std::is_same_v<T, Cantor>) {
            require(p.depth >= 1, ErrorCode::kInvalidArgument, "Cantor depth must be >= 1");
            require(p.depth <= 64, ErrorCode::kInvalidArgument, "Cantor depth must be <= 64");
          }
        },
        params_);
  }

  Params params_;
};

// ---------------------------------------------------------------------------
// Constants

struct GeometryConstants {
  double upsilon_s = 0.0;
  double hausdorff_mass = 0.0;
  /// Absent for the Cantor set and the arcsine interval.
  std::optional<double> limit_constant_base;
};

/// H_s(K) with H_s([0,1]^s) = 1.
inline double hausdorff_mass(const DomainModel& domain) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sphere>) return (p.d + 1) * unit_ball_volume(p.d + 1);
        else if constexpr (std::is_same_v<T, Ball>) return unit_ball_volume(p.d);
        else if constexpr (std::is_same_v<T, Cube> || std::is_same_v<T, IntervalUniform>) return 1.0;
        else if constexpr (std::is_same_v<T, Polyline>) return p.length();
        else if constexpr (std::is_same_v<T, Polyhedron3>) return p.volume();
        else
          fail(ErrorCode::kUnsupportedDomain,
               "Cantor and arcsine domains carry regularity witnesses, not a mass constant");
      },
      domain.params());
}

/// Interior dihedral angle at every edge, from outward face normals.
/// Convex edges give angles in (0, pi); reflex edges give (pi, 2 pi).
inline std::vector<double> dihedral_angles(const Polyhedron3& poly) {
  std::vector<double> out;
  out.reserve(poly.edges().size());
  for (const auto& edge : poly.edges()) {
    const auto f1 = edge.faces[0];
    const auto& loop = poly.faces()[f1];
    // Orient the edge the way face f1 traverses it.
    std::size_t a = edge.vertices[0], b = edge.vertices[1];
    bool found = false;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const auto u = loop[k], v = loop[(k + 1) % loop.size()];
      if ((u == a && v == b) || (u == b && v == a)) {
        a = u;
        b = v;
        found = true;
        break;
      }
    }
    require(found, ErrorCode::kInvalidGeometry, "edge does not belong to its first face");
    const Vec3 n1 = poly.face_normal(f1);
    const Vec3 n2 = poly.face_normal(edge.faces[1]);
    Vec3 e = sub(poly.vertices()[b], poly.vertices()[a]);
    e = scale(e, 1.0 / length(e));
    const double turn = std::atan2(dot(cross(n1, n2), e), dot(n1, n2));
    out.push_back(std::numbers::pi - turn);
  }
  return out;
}

inline double min_dihedral_angle(const Polyhedron3& poly) {
  const auto angles = dihedral_angles(poly);
  require(!angles.empty(), ErrorCode::kInvalidGeometry, "polyhedron has no edges");
  return *std::min_element(angles.begin(), angles.end());
}

inline double min_dihedral_angle(const DomainModel& domain) {
  return min_dihedral_angle(domain.as<Polyhedron3>());
}

/// lim E[rho^p] (N / log N)^{p/s} for the domains with a sharp constant.
inline double limit_constant(const DomainModel& domain, double p = 1.0) {
  require(p >= 1.0, ErrorCode::kInvalidArgument, "limit_constant needs p >= 1");
  return std::visit(
      [p](const auto& params) -> double {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          const int d = params.d;
          const double base = (d + 1) * unit_ball_volume(d + 1) / unit_ball_volume(d);
          return std::pow(base, p / d);
        } else if constexpr (std::is_same_v<T, Ball>) {
          require(params.d >= 2, ErrorCode::kUnsupportedDomain,
                  "ball constant needs d >= 2; model [-1,1] as a polyline");
          const int d = params.d;
          return std::pow(2.0 * (d - 1) / d, p / d);
        } else if constexpr (std::is_same_v<T, Cube>) {
          const int d = params.d;
          if (d == 1) return std::pow(0.5, p);
          return std::pow(std::pow(2.0, d - 1) / (d * unit_ball_volume(d)), p / d);
        } else if constexpr (std::is_same_v<T, IntervalUniform>) {
          return std::pow(0.5, p);
        } else if constexpr (std::is_same_v<T, Polyline>) {
          return std::pow(params.length() / 2.0, p);
        } else if constexpr (std::is_same_v<T, Polyhedron3>) {
          const double theta = min_dihedral_angle(params);
          const double v = params.volume();
          if (theta <= std::numbers::pi / 2) {
            return std::pow(2.0 * std::numbers::pi * v / (3.0 * theta * unit_ball_volume(3)),
                            p / 3.0);
          }
          return std::pow(v / std::numbers::pi, p / 3.0);
        } else {
          fail(ErrorCode::kNoSharpConstant,
               "only two-sided bounds are known for Cantor and arcsine domains");
        }
      },
      domain.params());
}

inline GeometryConstants geometry_constants(const DomainModel& domain) {
  GeometryConstants out;
  const double s = domain.intrinsic_dim();
  if (domain.is<Cantor>() || domain.is<ArcsineInterval>()) {
    // H_s of the whole Cantor set is 1 under the normalization of its
    // self-similar measure; the arcsine measure is a probability measure.
    out.upsilon_s = domain.is<Cantor>()
                        ? std::exp(0.5 * s * std::log(std::numbers::pi) - std::lgamma(1.0 + 0.5 * s))
                        : unit_ball_volume(1);
    out.hausdorff_mass = domain.is<Cantor>() ? 1.0 : 2.0;
    return out;
  }
  out.upsilon_s = unit_ball_volume(static_cast<int>(s));
  out.hausdorff_mass = hausdorff_mass(domain);
  if (domain.is<Ball>() && domain.as<Ball>().d == 1) return out;
  out.limit_constant_base = limit_constant(domain, 1.0);
  return out;
}

/// Scale (H_s/upsilon_s * log N / N)^{1/s} of the covering radius of N
/// random points. Used for probe mesh sizing and index cell sizes.
inline double covering_scale(const DomainModel& domain, std::size_t n_points) {
  const auto c = geometry_constants(domain);
  const double n = std::max<double>(static_cast<double>(n_points), 3.0);
  const double s = domain.intrinsic_dim();
  return std::pow(c.hausdorff_mass / c.upsilon_s * std::log(n) / n, 1.0 / s);
}

// ---------------------------------------------------------------------------
// Regularity witnesses: c Phi(r) <= mu(B(x, r)) <= C Phi(r) for r < r0, with
// mu the normalized reference measure.

struct PowerLaw {
  double s = 1.0;
};
struct PowerLog {
  double alpha = 1.0;
  double beta = 0.0;
};

struct RegularityWitness {
  std::variant<PowerLaw, PowerLog> phi;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double r0 = 0.0;
  /// When set, the bounds are only claimed for centers x with |x| <= value.
  std::optional<double> center_window;

  double phi_value(double r) const {
    return std::visit(
        [r](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PowerLaw>) return std::pow(r, f.s);
          else return std::pow(r, f.alpha) * std::pow(std::log(1.0 / r), f.beta);
        },
        phi);
  }

  void validate() const {
    require(c_lower > 0.0 && c_lower <= c_upper && r0 > 0.0, ErrorCode::kInvalidArgument,
            "witness needs 0 < c_lower <= c_upper and r0 > 0");
    if (const auto* pl = std::get_if<PowerLog>(&phi)) {
      require(pl->alpha > 0.0 && pl->beta >= 0.0, ErrorCode::kInvalidArgument,
              "PowerLog needs alpha > 0 and beta >= 0");
    }
  }
};

/// Built-in witnesses; derivations are in docs/regularity.md.
inline RegularityWitness regularity_witness(const DomainModel& domain) {
  using std::numbers::pi;
  RegularityWitness w = std::visit(
      [&](const auto& p) -> RegularityWitness {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IntervalUniform>) {
          return {PowerLaw{1.0}, 1.0, 2.0, 0.5, {}};
        } else if constexpr (std::is_same_v<T, Cube>) {
          const double u = unit_ball_volume(p.d);
          return {PowerLaw{double(p.d)}, u / std::pow(2.0, p.d), u, 0.5, {}};
        } else if constexpr (std::is_same_v<T, Ball>) {
          return {PowerLaw{double(p.d)}, std::pow(2.0, -p.d), 1.0, 1.0, {}};
        } else if constexpr (std::is_same_v<T, Sphere>) {
          if (p.d == 1) return {PowerLaw{1.0}, 1.0 / pi, 0.5, 2.0, {}};
          if (p.d == 2) return {PowerLaw{2.0}, 0.25, 0.25, 2.0, {}};
          const double total = (p.d + 1) * unit_ball_volume(p.d + 1);
          const double u = unit_ball_volume(p.d);
          return {PowerLaw{double(p.d)}, u * std::pow(std::sqrt(3.0) / 2.0, p.d) / total,
                  u * std::pow(pi / 3.0, p.d) / total, 1.0, {}};
        } else if constexpr (std::is_same_v<T, ArcsineInterval>) {
          return {PowerLaw{1.0}, 1.0 / pi, 8.0 / (pi * std::sqrt(7.0)), 0.25, 0.5};
        } else if constexpr (std::is_same_v<T, Polyline>) {
          const double len = p.length();
          return {PowerLaw{1.0}, 1.0 / len, 2.0 * double(p.edge_count()) / len, len / 2.0, {}};
        } else if constexpr (std::is_same_v<T, Polyhedron3>) {
          // Each tetrahedron T contains its inscribed ball B(c_T, R_T); a
          // homothety of that ball towards x fits inside B(x, r).
          double c_low = std::numeric_limits<double>::infinity();
          double r0 = std::numeric_limits<double>::infinity();
          const auto& v = p.vertices();
          for (std::size_t t = 0; t < p.tetrahedra().size(); ++t) {
            const auto& tet = p.tetrahedra()[t];
            std::array<double, 4> area{};
            for (int i = 0; i < 4; ++i) {
              const Vec3& a = v[tet[(i + 1) % 4]];
              const Vec3& b = v[tet[(i + 2) % 4]];
              const Vec3& c = v[tet[(i + 3) % 4]];
              area[i] = 0.5 * length(cross(sub(b, a), sub(c, a)));
            }
            const double total_area = area[0] + area[1] + area[2] + area[3];
            Vec3 center{0, 0, 0};
            for (int i = 0; i < 4; ++i) center = add(center, scale(v[tet[i]], area[i] / total_area));
            const double inradius = 3.0 * p.tet_volumes()[t] / total_area;
            double reach = 0.0;
            for (int i = 0; i < 4; ++i) reach = std::max(reach, length(sub(v[tet[i]], center)));
            c_low = std::min(c_low, unit_ball_volume(3) * std::pow(inradius / (2.0 * reach), 3) /
                                        p.volume());
            r0 = std::min(r0, 2.0 * reach);
          }
          return {PowerLaw{3.0}, c_low, unit_ball_volume(3) / p.volume(), r0, {}};
        } else {
          return {PowerLaw{log_ratio_cantor()}, 0.5, 4.0, 1.0, {}};
        }
      },
      domain.params());
  w.validate();
  return w;
}

}  // namespace covrad
