#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <gtest/gtest.h>

#include "covrad/sampler.hpp"

using namespace covrad;
using std::numbers::pi;

namespace {

// sqrt(n) * D above 1.95 has probability about 0.001 under the null.
constexpr double kKsCritical = 1.95;

double ks_statistic(std::vector<double> v, const std::function<double(double)>& cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
  }
  return d * std::sqrt(n);
}

std::vector<double> column(const PointCloud& pc, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = 0; i < pc.size(); ++i) out.push_back(pc[i][k]);
  return out;
}

// Cantor function by recursion on ternary digits.
double cantor_function(double x, int depth = 60) {
  if (depth == 0 || x <= 0.0) return x <= 0.0 ? 0.0 : 0.5;
  if (x >= 1.0) return 1.0;
  if (x < 1.0 / 3.0) return 0.5 * cantor_function(3.0 * x, depth - 1);
  if (x <= 2.0 / 3.0) return 0.5;
  return 0.5 + 0.5 * cantor_function(3.0 * x - 2.0, depth - 1);
}

Polyline l_shape() { return Polyline(PointCloud::from_points(2, {{0, 0}, {1, 0}, {1, 2}})); }

Polyhedron3 corner_simplex() {
  return Polyhedron3({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1, 2, 3}},
                     {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
}

}  // namespace

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswers) {
  using B = Philox4x32::Block;
  EXPECT_EQ(Philox4x32(0)(B{0, 0, 0, 0}), (B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32(0xffffffffffffffffull)(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}),
            (B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32(0x299f31d0a4093822ull)(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}),
            (B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, UniformIsOpenInterval) {
  RandomStream rng(SeedSpec{1, 2});
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RandomStream, NormalQuantileInvertsCdf) {
  for (double p : {1e-300, 1e-12, 1e-4, 0.01, 0.02425, 0.3, 0.5, 0.77, 0.97575, 0.999, 1.0 - 1e-12}) {
    const double x = RandomStream::normal_quantile(p);
    const double back = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    EXPECT_NEAR(back / p, 1.0, 1e-12) << p;
  }
  EXPECT_EQ(RandomStream::normal_quantile(0.5), 0.0);
}

TEST(RandomStream, StreamsDiffer) {
  RandomStream a(SeedSpec{5, 0}), b(SeedSpec{5, 1}), c(SeedSpec{6, 0});
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(Sample, IsPureFunctionOfSeed) {
  const DomainModel d = Sphere{2};
  const auto a = sample(d, 1000, SeedSpec{42, 7});
  const auto b = sample(d, 1000, SeedSpec{42, 7});
  EXPECT_EQ(a.points.coords(), b.points.coords());
  EXPECT_NE(a.points.coords(), sample(d, 1000, SeedSpec{42, 8}).points.coords());
  // A prefix of a longer sample is the shorter sample.
  const auto longer = sample(d, 2000, SeedSpec{42, 7});
  EXPECT_TRUE(std::equal(a.points.coords().begin(), a.points.coords().end(), longer.points.coords().begin()));
}

TEST(Sample, StreamUsesTrialIndexAsStreamId) {
  const auto sets = sample_stream(Cube{2}, 50, 9, 4);
  ASSERT_EQ(sets.size(), 4u);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(sets[t].seed, (SeedSpec{9, t}));
    EXPECT_EQ(sets[t].points.coords(), sample(Cube{2}, 50, SeedSpec{9, t}).points.coords());
  }
}

TEST(Sample, RejectsEmpty) {
  EXPECT_THROW(sample(Cube{2}, 0, SeedSpec{}), Error);
  EXPECT_THROW(sample_stream(Cube{2}, 5, 0, 0), Error);
}

TEST(Sample, PointsLieInDomain) {
  const std::vector<DomainModel> domains = {Sphere{1}, Sphere{2}, Sphere{5}, Ball{2}, Ball{3}, Cube{1}, Cube{4},
                                            IntervalUniform{}, ArcsineInterval{}, Cantor{}, Cantor{5}, l_shape(),
                                            Polyhedron3::box({0, 0, 0}, {1, 2, 3}),
                                            Polyhedron3::triangular_prism(1, 2), Polyhedron3::regular_tetrahedron()};
  for (const auto& d : domains) {
    const auto s = sample(d, 5000, SeedSpec{3, 1});
    ASSERT_EQ(s.points.dim(), d.ambient_dim());
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_TRUE(d.contains(s.points[i], 1e-9)) << d.describe();
  }
}

TEST(Distribution, IntervalUniform) {
  const auto s = sample(IntervalUniform{}, 100000, SeedSpec{10, 0});
  EXPECT_LT(ks_statistic(column(s.points, 0), [](double x) { return x; }), kKsCritical);
}

TEST(Distribution, CubeMarginals) {
  const auto s = sample(Cube{3}, 100000, SeedSpec{10, 1});
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_LT(ks_statistic(column(s.points, k), [](double x) { return x; }), kKsCritical);
}

TEST(Distribution, Arcsine) {
  const auto s = sample(ArcsineInterval{}, 100000, SeedSpec{10, 2});
  const auto cdf = [](double x) { return 2.0 / pi * std::asin(std::sqrt((x + 1.0) / 2.0)); };
  EXPECT_LT(ks_statistic(column(s.points, 0), cdf), kKsCritical);
}

TEST(Distribution, CantorFunction) {
  const auto s = sample(Cantor{}, 100000, SeedSpec{10, 3});
  EXPECT_LT(ks_statistic(column(s.points, 0), [](double x) { return cantor_function(x); }), kKsCritical);
}

TEST(Distribution, CircleAngle) {
  const auto s = sample(Sphere{1}, 100000, SeedSpec{10, 5});
  std::vector<double> angle;
  for (std::size_t i = 0; i < s.size(); ++i) angle.push_back(std::atan2(s.points[i][1], s.points[i][0]));
  EXPECT_LT(ks_statistic(angle, [](double a) { return (a + pi) / (2.0 * pi); }), kKsCritical);
}

TEST(Distribution, SphereHeightIsUniform) {
  // On S^2 each coordinate is uniform on [-1, 1].
  const auto s = sample(Sphere{2}, 100000, SeedSpec{10, 6});
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_LT(ks_statistic(column(s.points, k), [](double z) { return 0.5 * (z + 1.0); }), kKsCritical);
}

TEST(Distribution, BallRadius) {
  for (int d : {2, 3}) {
    const auto s = sample(Ball{d}, 100000, SeedSpec{10, 7});
    std::vector<double> r;
    for (std::size_t i = 0; i < s.size(); ++i) r.push_back(norm(s.points[i]));
    EXPECT_LT(ks_statistic(r, [d](double x) { return std::pow(x, d); }), kKsCritical);
  }
}

TEST(Distribution, PolylineArclength) {
  const auto s = sample(l_shape(), 100000, SeedSpec{10, 8});
  std::vector<double> arclength;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto p = s.points[i];
    arclength.push_back(p[0] < 1.0 ? p[0] : 1.0 + p[1]);
  }
  EXPECT_LT(ks_statistic(arclength, [](double t) { return t / 3.0; }), kKsCritical);
}

TEST(Distribution, SimplexMarginals) {
  const auto s = sample(corner_simplex(), 100000, SeedSpec{10, 9});
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_LT(ks_statistic(column(s.points, k), [](double x) { return 1.0 - std::pow(1.0 - x, 3); }),
              kKsCritical);
  std::vector<double> sum;
  for (std::size_t i = 0; i < s.size(); ++i) sum.push_back(s.points[i][0] + s.points[i][1] + s.points[i][2]);
  EXPECT_LT(ks_statistic(sum, [](double t) { return t * t * t; }), kKsCritical);
}

TEST(Distribution, BoxFromTetrahedra) {
  const auto s = sample(Polyhedron3::box({0, 0, 0}, {1, 2, 3}), 100000, SeedSpec{10, 10});
  for (std::size_t k = 0; k < 3; ++k) {
    const double side = double(k + 1);
    EXPECT_LT(ks_statistic(column(s.points, k), [side](double x) { return x / side; }), kKsCritical);
  }
}

namespace {

// Upper 0.001 quantiles of chi-square by degrees of freedom.
double chi2_critical(std::size_t df) {
  switch (df) {
    case 3: return 16.27;
    case 7: return 24.32;
    case 9: return 27.88;
    case 11: return 31.26;
    case 15: return 37.70;
    default: ADD_FAILURE() << "no critical value for df " << df; return 0.0;
  }
}

struct Partition {
  DomainModel domain;
  std::size_t cells;
  // Cell index of a point; every cell has measure 1/cells.
  std::function<std::size_t(std::span<const double>)> cell;
};

std::size_t nearest_vertex(std::span<const double> x, const std::vector<Vec3>& v) {
  std::size_t best = 0;
  double bd = 1e300;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = std::pow(x[0] - v[i][0], 2) + std::pow(x[1] - v[i][1], 2) + std::pow(x[2] - v[i][2], 2);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::vector<Partition> partitions() {
  const auto sign_bits = [](std::span<const double> x, std::size_t k) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < k; ++j) idx = 2 * idx + (x[j] > 0.0);
    return idx;
  };
  const auto tet = Polyhedron3::regular_tetrahedron();
  const auto prism = Polyhedron3::triangular_prism(1.0, 2.0);
  const std::vector<Vec3> tet_v = tet.vertices();
  const std::vector<Vec3> tri = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}};
  return {
      {Sphere{1}, 8, [](auto x) { return std::size_t((std::atan2(x[1], x[0]) + pi) / (2 * pi) * 8) % 8; }},
      {Sphere{2}, 8, [=](auto x) { return sign_bits(x, 3); }},
      {Sphere{3}, 16, [=](auto x) { return sign_bits(x, 4); }},
      {Ball{2}, 8, [=](auto x) { return 2 * sign_bits(x, 2) + (norm(x) > std::sqrt(0.5)); }},
      {Ball{3}, 16, [=](auto x) { return 2 * sign_bits(x, 3) + (norm(x) > std::cbrt(0.5)); }},
      {Cube{2}, 16, [](auto x) { return std::size_t(x[0] * 4) * 4 + std::size_t(x[1] * 4); }},
      {Cube{3}, 8, [](auto x) { return std::size_t(x[0] * 2) * 4 + std::size_t(x[1] * 2) * 2 + std::size_t(x[2] * 2); }},
      {IntervalUniform{}, 10, [](auto x) { return std::size_t(x[0] * 10); }},
      {ArcsineInterval{}, 8, [](auto x) { return std::min<std::size_t>(7, std::size_t(std::acos(x[0]) / pi * 8)); }},
      {l_shape(), 12, [](auto x) { return std::size_t((x[0] < 1.0 ? x[0] : 1.0 + x[1]) * 4); }},
      {Cantor{}, 16,
       [](auto x) {
         double t = x[0];
         std::size_t idx = 0;
         for (int k = 0; k < 4; ++k) {
           t *= 3.0;
           const int digit = static_cast<int>(t);
           idx = 2 * idx + (digit >= 2);
           t -= digit;
         }
         return idx;
       }},
      {Polyhedron3::box({0, 0, 0}, {1, 2, 3}), 8,
       [](auto x) { return std::size_t(x[0] * 2) * 4 + std::size_t(x[1]) * 2 + std::size_t(x[2] / 1.5); }},
      {tet, 4, [=](auto x) { return nearest_vertex(x, tet_v); }},
      {prism, 12, [=](auto x) { return std::size_t(x[2] * 2) * 3 + nearest_vertex(std::vector<double>{x[0], x[1], 0.0}, tri); }},
      {corner_simplex(), 8, [](auto x) { return std::size_t(std::pow(x[0] + x[1] + x[2], 3) * 8); }},
  };
}

}  // namespace

TEST(Distribution, ChiSquareOverRegionsOfKnownMeasure) {
  const std::size_t n = 100000;
  std::uint64_t stream = 0;
  for (const auto& part : partitions()) {
    const auto s = sample(part.domain, n, SeedSpec{11, stream++});
    std::vector<double> counts(part.cells, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = part.cell(s.points[i]);
      ASSERT_LT(c, part.cells) << part.domain.describe();
      counts[c] += 1.0;
    }
    const double expected = double(n) / double(part.cells);
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, chi2_critical(part.cells - 1)) << part.domain.describe();
  }
}

TEST(Distribution, BallRadialLaw) {
  const std::size_t n = 100000;
  for (int d : {2, 3, 5}) {
    const auto s = sample(Ball{d}, n, SeedSpec{12, std::uint64_t(d)});
    for (double r : {0.3, 0.7}) {
      double inside = 0.0;
      for (std::size_t i = 0; i < n; ++i) inside += norm(s.points[i]) <= r;
      const double p = std::pow(r, d);
      EXPECT_NEAR(inside / double(n), p, 3.0 * std::sqrt(p * (1 - p) / double(n)) + 1e-12) << d << " " << r;
    }
  }
}

TEST(Distribution, ArcsineBoundaryMass) {
  // mu([1 - u, 1]) = arccos(1 - u) / pi = (2 / pi) asin(sqrt(u / 2)), u = 1 / N.
  const std::size_t n = 10000;
  const double u = 1.0 / double(n);
  const double mass = 2.0 / pi * std::asin(std::sqrt(u / 2.0));
  EXPECT_NEAR(mass, std::acos(1.0 - u) / pi, 1e-12);
  double hits = 0.0;
  const std::size_t draws = 2000000;
  const auto s = sample(ArcsineInterval{}, draws, SeedSpec{13, 0});
  for (std::size_t i = 0; i < draws; ++i) hits += s.points[i][0] >= 1.0 - u;
  EXPECT_NEAR(hits / double(draws), mass, 3.0 * std::sqrt(mass * (1 - mass) / double(draws)));
}

TEST(Examples, IntervalThreePoints) {
  const auto s = sample(IntervalUniform{}, 3, SeedSpec{42, 0});
  ASSERT_EQ(s.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GE(s.points[i][0], 0.0);
    EXPECT_LE(s.points[i][0], 1.0);
  }
}

TEST(Examples, SquareCoordinateMeans) {
  const std::size_t n = 100000;
  const auto s = sample(Cube{2}, n, SeedSpec{7, 0});
  for (std::size_t k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += s.points[i][k];
    EXPECT_NEAR(mean / double(n), 0.5, 3.0 / std::sqrt(12.0) / std::sqrt(double(n)));
  }
}

TEST(Examples, ArcsineKolmogorovSmirnov) {
  const std::size_t n = 100000;
  const auto s = sample(ArcsineInterval{}, n, SeedSpec{7, 0});
  // 1% critical value 1.628 / sqrt(N).
  EXPECT_LT(ks_statistic(column(s.points, 0), [](double x) { return 1.0 - std::acos(x) / pi; }), 1.628);
}

TEST(Examples, SphereNormsAndMeans) {
  const std::size_t n = 10000;
  const auto s = sample(Sphere{2}, n, SeedSpec{9, 0});
  std::array<double, 3> mean{};
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(norm(s.points[i]), 1.0, 1e-12);
    for (std::size_t k = 0; k < 3; ++k) mean[k] += s.points[i][k] / double(n);
  }
  for (double m : mean) EXPECT_NEAR(m, 0.0, 3.0 / std::sqrt(3.0 * double(n)));
}

TEST(Examples, TrialRerunMatchesStream) {
  const auto all = sample_stream(Sphere{2}, 100, 31, 10);
  EXPECT_EQ(sample(Sphere{2}, 100, SeedSpec{31, 5}).points.coords(), all[5].points.coords());
  EXPECT_NE(all[0].points.coords(), all[1].points.coords());
}

TEST(Examples, CantorDigitsAtDepth20) {
  const auto s = sample_stream(Cantor{20}, 100, 0, 1)[0];
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double scaled = s.points[i][0] * std::pow(3.0, 20);
    auto digits = static_cast<std::uint64_t>(std::llround(scaled));
    ASSERT_NEAR(scaled, double(digits), 1e-4);
    for (int k = 0; k < 20; ++k, digits /= 3) ASSERT_NE(digits % 3, 1u);
    EXPECT_EQ(digits, 0u);
  }
}
