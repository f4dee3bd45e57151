#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "covrad/experiments.hpp"
#include "covrad/io.hpp"

using namespace covrad;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

// E[rho] for N uniform points on [0,1], estimated independently of the
// library: normalized exponential spacings, end gaps count in full and
// inner gaps by half.
double interval_oracle_mc(std::size_t N, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> gap(N + 1);
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    double total = 0.0;
    for (auto& g : gap) total += (g = expo(rng));
    double worst = std::max(gap.front(), gap.back());
    for (std::size_t i = 1; i < N; ++i) worst = std::max(worst, gap[i] / 2.0);
    acc += worst / total;
  }
  return acc / trials;
}

const Json& band(const char* name) {
  static const Json doc = read_json_file(COVRAD_BANDS_PATH);
  return doc.at("bands").at(name);
}

StudyConfig small_config(const DomainModel& domain, std::vector<std::size_t> grid, std::size_t T) {
  StudyConfig c;
  c.domain = domain;
  c.n_grid = std::move(grid);
  c.trials = T;
  c.master_seed = 5;
  return c;
}

std::vector<std::string> lines_of(const std::vector<StudyRow>& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(csv_line(r));
  return out;
}

}  // namespace

TEST(CircleOracle, SmallN) {
  const double L = 2 * std::numbers::pi;
  EXPECT_DOUBLE_EQ(circle_expectation_oracle(1, L), L / 2);
  EXPECT_DOUBLE_EQ(circle_expectation_oracle(2, L), 3 * L / 8);
  double h = 0.0;
  for (int k = 1; k <= 1000; ++k) h += 1.0 / k;
  EXPECT_NEAR(circle_expectation_oracle(1000, L), std::numbers::pi * h / 1000, 1e-15);
  EXPECT_EQ(code_of([] { circle_expectation_oracle(0, 1.0); }), ErrorCode::kInvalidArgument);
}

// Two points: by rotation one sits at 0; the covering radius is half the
// longer arc.
TEST(CircleOracle, TwoPointsMonteCarlo) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int trials = 1000000;
  double acc = 0.0, acc2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double v = u(rng);
    const double r = std::max(v, 1.0 - v) / 2.0;
    acc += r;
    acc2 += r * r;
  }
  const double mean = acc / trials;
  const double se = std::sqrt((acc2 / trials - mean * mean) / trials);
  EXPECT_NEAR(circle_expectation_oracle(2, 1.0), mean, 5 * se);
}

TEST(CircleOracle, MatchesLibraryCoveringRadius) {
  const std::size_t N = 200, T = 2000;
  std::vector<double> arc(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double chord = covering_radius_1d(Sphere{1}, sample(Sphere{1}, N, SeedSpec{31, t}).points);
    arc[t] = 2.0 * std::asin(chord / 2.0);
  }
  const auto s = summarize(arc);
  EXPECT_NEAR(s.mean, circle_expectation_oracle(N, 2 * std::numbers::pi), 3 * s.ci99);
}

TEST(ExpectationStudy, IntervalMatchesFiniteNOracle) {
  const auto rows = run_expectation_study(small_config(IntervalUniform{}, {1000}, 1000));
  ASSERT_EQ(rows.size(), 1u);
  const auto& r = rows[0];
  EXPECT_EQ(r.mean_rho_p_lower, r.mean_rho_p_upper);
  EXPECT_NEAR(r.mean_rho_p_lower, interval_oracle_mc(1000, 50000, 3), 3 * r.ci_half_width);
  EXPECT_NEAR(r.rescaled, r.mean_rho_p_lower * 1000 / std::log(1000.0), 1e-12);
  ASSERT_TRUE(r.target.has_value());
  EXPECT_DOUBLE_EQ(*r.target, 0.5);
  EXPECT_EQ(r.probe_points, 0u);
}

TEST(ExpectationStudy, CircleCloserToPiAtLargerN) {
  auto c = small_config(Sphere{1}, {100, 10000}, 200);
  const auto rows = run_expectation_study(c);
  ASSERT_TRUE(rows[0].target.has_value());
  EXPECT_NEAR(*rows[0].target, std::numbers::pi, 1e-12);
  EXPECT_LT(std::abs(rows[1].rescaled - std::numbers::pi), std::abs(rows[0].rescaled - std::numbers::pi));
}

TEST(ExpectationStudy, SquarePowerTwoVersusSquaredPowerOne) {
  auto c = small_config(Cube{2}, {1000}, 100);
  c.probe_eta = 0.1;
  const auto one = run_expectation_study(c).front();
  c.p = 2.0;
  const auto two = run_expectation_study(c).front();
  // Same trials, so Jensen holds exactly for each bound.
  EXPECT_GE(two.mean_rho_p_lower, one.mean_rho_p_lower * one.mean_rho_p_lower * (1 - 1e-12));
  EXPECT_GE(two.mean_rho_p_upper, one.mean_rho_p_upper * one.mean_rho_p_upper * (1 - 1e-12));
  const double tol = two.rescaled_ci + 2 * one.rescaled * one.rescaled_ci + two.rescaled_systematic +
                     2 * one.rescaled * one.rescaled_systematic;
  EXPECT_NEAR(two.rescaled, one.rescaled * one.rescaled, tol);
}

TEST(ExpectationStudy, RowInvariants) {
  for (const DomainModel& d : {DomainModel{Cube{2}}, DomainModel{Ball{2}}, DomainModel{Cantor{}},
                               DomainModel{Polyhedron3::triangular_prism(1, 1)}}) {
    auto c = small_config(d, {50, 200}, 8);
    c.probe_eta = 0.2;
    for (const auto& r : run_expectation_study(c)) {
      EXPECT_LE(r.mean_rho_p_lower, r.mean_rho_p_upper) << d.describe();
      EXPECT_GE(r.ci_half_width, 0.0);
      EXPECT_GE(r.rescaled_ci, 0.0);
      EXPECT_GE(r.rescaled_systematic, 0.0);
      EXPECT_EQ(r.T, 8u);
    }
  }
}

TEST(ExpectationStudy, SystematicWidthTracksProbeMesh) {
  auto c = small_config(Cube{2}, {500}, 6);
  c.probe_eta = 0.2;
  const auto coarse = run_expectation_study(c).front();
  c.probe_eta = 0.1;
  const auto fine = run_expectation_study(c).front();
  const double factor = rate_factor(500, 0.5);
  EXPECT_NEAR(coarse.rescaled_systematic, coarse.probe_mesh / 2 * factor, 1e-12);
  EXPECT_NEAR(fine.rescaled_systematic, fine.probe_mesh / 2 * factor, 1e-12);
  const double ratio = fine.rescaled_systematic / coarse.rescaled_systematic;
  EXPECT_GT(ratio, 0.4);
  EXPECT_LT(ratio, 0.6);
}

TEST(ExpectationStudy, DeterministicAcrossThreadCounts) {
  auto c = small_config(Cube{2}, {100, 300}, 12);
  c.probe_eta = 0.2;
  c.threads = 1;
  const auto serial = lines_of(run_expectation_study(c));
  c.threads = 4;
  EXPECT_EQ(lines_of(run_expectation_study(c)), serial);
  EXPECT_EQ(lines_of(run_expectation_study(c)), serial);
  c.master_seed = 6;
  EXPECT_NE(lines_of(run_expectation_study(c)), serial);
}

TEST(ExpectationStudy, SinkSeesEveryRow) {
  std::vector<std::size_t> seen;
  const auto rows =
      run_expectation_study(small_config(IntervalUniform{}, {10, 20, 40}, 4), [&](const StudyRow& r) {
        seen.push_back(r.N);
      });
  EXPECT_EQ(seen, (std::vector<std::size_t>{10, 20, 40}));
  EXPECT_EQ(rows.size(), 3u);
}

TEST(ExpectationStudy, ConfigErrors) {
  auto c = small_config(IntervalUniform{}, {10}, 4);
  c.p = 0.5;
  EXPECT_EQ(code_of([&] { run_expectation_study(c); }), ErrorCode::kInvalidArgument);
  c = small_config(IntervalUniform{}, {20, 10}, 4);
  EXPECT_EQ(code_of([&] { run_expectation_study(c); }), ErrorCode::kInvalidArgument);
  c = small_config(IntervalUniform{}, {}, 4);
  EXPECT_EQ(code_of([&] { run_expectation_study(c); }), ErrorCode::kInvalidArgument);
  c = small_config(IntervalUniform{}, {10}, 1);
  EXPECT_EQ(code_of([&] { run_expectation_study(c); }), ErrorCode::kInvalidArgument);
  c = small_config(Cube{2}, {10}, 4);
  c.probe_eta = 1.5;
  EXPECT_EQ(code_of([&] { run_expectation_study(c); }), ErrorCode::kInvalidArgument);
}

TEST(ExpectationStudy, BudgetRefusal) {
  auto c = small_config(Cube{3}, {1000000}, 1000);
  EXPECT_EQ(code_of([&] { run_expectation_study(c); }), ErrorCode::kResourceLimit);
  c.budget = 1.0;
  c.n_grid = {100};
  c.trials = 2;
  EXPECT_EQ(code_of([&] { run_expectation_study(c); }), ErrorCode::kResourceLimit);
  EXPECT_NO_THROW(check_study_budget(1e20, 1.0, true));
  EXPECT_NO_THROW(check_study_budget(1.0, 1.0, false));
  EXPECT_GT(estimate_study_cost(Cube{2}, {1000}, 10, 0.05), estimate_study_cost(Cube{2}, {1000}, 10, 0.1));
}

TEST(ExpectationStudy, BoxTargetMatchesCube) {
  auto c = small_config(Polyhedron3::box({0, 0, 0}, {1, 1, 1}), {50}, 2);
  c.probe_eta = 0.3;
  c.p = 2.0;
  const auto row = run_expectation_study(c).front();
  EXPECT_TRUE(row.target.has_value());
  EXPECT_NEAR(*row.target, limit_constant(Cube{3}, 2.0), 1e-12);
}

TEST(RateFactor, UsesNaturalLog) {
  EXPECT_NEAR(rate_factor(1000, 1.0), 1000.0 / 6.907755278982137, 1e-9);
  EXPECT_GT(std::abs(rate_factor(1000, 1.0) - 1000.0 / 3.0), 100.0);
  EXPECT_NEAR(rate_factor(1000, 0.5), std::sqrt(1000.0 / std::log(1000.0)), 1e-12);
}

TEST(TailStudy, Extremes) {
  const auto rows = run_tail_study(IntervalUniform{}, 100, 50, {0.0, 2.0}, 8);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].empirical_prob, 1.0);
  EXPECT_EQ(rows[0].prob_lower, 1.0);
  EXPECT_EQ(rows[1].empirical_prob, 0.0);
  EXPECT_EQ(rows[1].prob_upper, 0.0);
  EXPECT_EQ(rows[0].bound_form, "lower_tail_concentration");
  EXPECT_EQ(rows[1].bound_form, "upper_tail_decay");

  const auto sq = run_tail_study(Cube{2}, 100, 10, {0.0, std::sqrt(2.0) + 1.0}, 8, 0.2);
  EXPECT_EQ(sq[0].empirical_prob, 1.0);
  EXPECT_EQ(sq[1].prob_upper, 0.0);
}

TEST(TailStudy, IntervalUpperTail) {
  const auto& b = band("interval_tail");
  const auto N = b.at("N").get<std::size_t>();
  const double t = b.at("log_multiple").get<double>() * std::log(double(N)) / double(N);
  const auto rows = run_tail_study(IntervalUniform{}, N, b.at("trials"), {t}, b.at("seed"));
  EXPECT_LE(rows[0].empirical_prob, b.at("max_prob").get<double>());
}

TEST(TailStudy, BandsAreOrdered) {
  const auto rows = run_tail_study(Cube{2}, 200, 20, {0.05, 0.1, 0.15, 0.2}, 10, 0.2);
  for (const auto& r : rows) {
    EXPECT_LE(r.prob_lower, r.empirical_prob);
    EXPECT_LE(r.empirical_prob, r.prob_upper);
  }
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].empirical_prob, rows[i - 1].empirical_prob);
}

TEST(TailStudy, Errors) {
  EXPECT_EQ(code_of([] { run_tail_study(IntervalUniform{}, 10, 5, {}, 1); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { run_tail_study(IntervalUniform{}, 10, 5, {0.2, 0.1}, 1); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { run_tail_study(IntervalUniform{}, 10, 5, {-0.1}, 1); }), ErrorCode::kInvalidArgument);
}

TEST(ZnStudy, CircleConcentrates) {
  const auto rows = run_zn_study(1, {100, 100000}, 200, 12);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[1].within_0_2, rows[0].within_0_2);
  EXPECT_LT(rows[1].stdev, rows[0].stdev);
}

TEST(ZnStudy, SphereMeanAndSpread) {
  const auto& b = band("zn_sphere");
  const auto rows = run_zn_study(2, b.at("n_grid").get<std::vector<std::size_t>>(), b.at("trials"), b.at("seed"),
                                 b.at("probe_eta"));
  const auto window = b.at("mean_open_interval").get<std::vector<double>>();
  EXPECT_GT(rows[1].mean, window[0]);
  EXPECT_LT(rows[1].mean, window[1]);
  EXPECT_LT(rows[1].stdev, rows[0].stdev);
}

TEST(ZnStudy, TwoTrialSchema) {
  const auto rows = run_zn_study(1, {50, 500}, 2, 14);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.T, 2u);
    EXPECT_GE(r.stdev, 0.0);
    for (double f : {r.within_0_1, r.within_0_2}) EXPECT_TRUE(f == 0.0 || f == 0.5 || f == 1.0);
    EXPECT_LE(r.within_0_1, r.within_0_2);
  }
  EXPECT_EQ(csv_header<ZnRow>(), "N,T,mean,stdev,within_0.1,within_0.2");
  EXPECT_EQ(code_of([] { run_zn_study(3, {100}, 2, 1); }), ErrorCode::kInvalidArgument);
}

TEST(ArcsineStudy, RescaledIsBounded) {
  for (const auto& [a, side] : std::vector<std::pair<double, WindowSide>>{
           {1.0, WindowSide::kRightEdge}, {3.0, WindowSide::kRightEdge}, {1.0, WindowSide::kInterior}}) {
    const auto rows = run_arcsine_study(a, side, {1000, 10000}, 100, 15);
    ASSERT_EQ(rows.size(), 2u);
    const double ratio = rows[1].rescaled / rows[0].rescaled;
    const double limit = band("arcsine").at("max_ratio");
    EXPECT_GT(ratio, 1.0 / limit) << a;
    EXPECT_LT(ratio, limit) << a;
    EXPECT_GT(rows[0].rescaled, 0.0);
  }
  EXPECT_DOUBLE_EQ(arcsine_rate(3.0, WindowSide::kRightEdge, 100), 1e4);
  EXPECT_DOUBLE_EQ(arcsine_rate(1.0, WindowSide::kRightEdge, 100), std::pow(100.0, 1.5) / std::log(100.0));
  EXPECT_EQ(code_of([] { run_arcsine_study(0.0, WindowSide::kRightEdge, {10}, 2, 1); }), ErrorCode::kInvalidArgument);
}

TEST(Versus, CenteredGrid) {
  EXPECT_EQ(integer_root(100, 1), 100u);
  EXPECT_EQ(integer_root(1000, 3), 10u);
  EXPECT_EQ(integer_root(999, 3), 9u);
  EXPECT_EQ(integer_root(10000, 2), 100u);
  EXPECT_DOUBLE_EQ(centered_grid_radius(100, 1), 1.0 / 200.0);
  for (int d : {1, 2, 3}) {
    const std::size_t k = 4;
    const auto grid = centered_grid(k, d);
    EXPECT_EQ(grid.size(), std::size_t(std::pow(k, d)));
    // Brute force over a fine net of the cube.
    const auto probe = build_probe_net(Cube{d}, 0.01);
    const auto b = covering_radius_bounds(Cube{d}, grid, probe);
    EXPECT_LE(b.lower, centered_grid_radius(k, d) + 1e-12);
    EXPECT_GE(b.upper, centered_grid_radius(k, d) - 1e-12);
  }
}

TEST(Versus, RandomIsWorseThanGrid) {
  const auto& b = band("versus_line");
  const auto d1 = run_random_vs_structured(1, {b.at("N").get<std::size_t>()}, b.at("trials"), b.at("seed"));
  EXPECT_DOUBLE_EQ(d1[0].grid_rho, 1.0 / 200.0);
  EXPECT_EQ(d1[0].grid_points, 100u);
  EXPECT_GT(d1[0].ratio, b.at("min_ratio").get<double>());
  const auto d2 = run_random_vs_structured(2, {100, 10000}, 10, 17, 0.25);
  EXPECT_GT(d2[1].ratio, d2[0].ratio);
  EXPECT_EQ(d2[1].grid_side, 100u);
}

TEST(EpsNetStudy, SingleTrialGivesZeroOrOne) {
  const auto rows = run_epsnet_study(Sphere{1}, {100, 1000}, 1, 1.0, 18);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.yes_fraction == 0.0 || r.yes_fraction == 1.0);
    // One-dimensional domains are decided exactly.
    EXPECT_EQ(r.yes_fraction, r.yes_or_unknown_fraction);
  }
}

TEST(EpsNetStudy, LargeAndSmallMultipliers) {
  const auto& b = band("epsnet");
  const std::vector<std::size_t> grid{b.at("N").get<std::size_t>()};
  EXPECT_GE(run_epsnet_study(Sphere{1}, grid, 100, b.at("large_c_mult"), 19)[0].yes_fraction,
            b.at("min_yes_fraction").get<double>());
  EXPECT_LE(run_epsnet_study(Sphere{1}, grid, 100, b.at("small_c_mult"), 19)[0].yes_fraction,
            b.at("max_yes_fraction").get<double>());
  const auto sq = run_epsnet_study(Cube{2}, {200}, 10, 3.0, 20, 0.2);
  EXPECT_LE(sq[0].yes_fraction, sq[0].yes_or_unknown_fraction);
}

TEST(FGrid, RowsMatchDirectCalls) {
  const std::vector<OccupancyParams> grid{{100, 10.0, 5}, {1000, 200.0, 200}};
  const auto rows = run_f_grid(grid);
  ASSERT_EQ(rows.size(), 2u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(rows[i].f_dp, f_dp(grid[i]));
    EXPECT_EQ(rows[i].f_lower_bound, f_lower_bound(grid[i]));
  }
  EXPECT_EQ(csv_header<FRow>(), "N,n,m,f_dp,f_lower_bound");
  EXPECT_EQ(csv_line(rows[0]).substr(0, 10), "100,10,5,0");
}

TEST(Csv, StudyRowLayout) {
  StudyRow r;
  r.N = 10;
  r.T = 2;
  r.rescaled = 0.25;
  const auto line = csv_line(r);
  const auto header = csv_header<StudyRow>();
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(line, "10,2,0,0,0,0.25,0,0,,0,0");
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
}

TEST(ParallelFor, PropagatesErrors) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) fail(ErrorCode::kInvalidGeometry, "boom");
                            }),
               Error);
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 3, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 1000);
}
