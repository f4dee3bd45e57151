#pragma once

// Monte Carlo studies. Every study is a pure function of its configuration:
// trial t at grid position g draws from stream (g << 32) | t, trials may run
// on several threads, and rows are reduced in trial order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "covrad/covering.hpp"
#include "covrad/nets.hpp"
#include "covrad/occupancy.hpp"
#include "covrad/sampler.hpp"
#include "covrad/spaces.hpp"
#include "covrad/stats.hpp"

namespace covrad {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

/// Refuse configs above this many estimated distance evaluations.
inline constexpr double kDefaultBudget = 1e10;

struct StudyConfig {
  DomainModel domain{IntervalUniform{}};
  double p = 1.0;
  std::vector<std::size_t> n_grid;
  std::size_t trials = 2;
  double probe_eta = 0.05;
  std::uint64_t master_seed = 0;
  bool force = false;
  double budget = kDefaultBudget;
  /// 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;

  void validate() const {
    require(p >= 1.0 && std::isfinite(p), ErrorCode::kInvalidArgument, "p must be >= 1");
    require(!n_grid.empty(), ErrorCode::kInvalidArgument, "n_grid must be non-empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      require(n_grid[i] >= 1, ErrorCode::kInvalidArgument, "n_grid entries must be >= 1");
      require(i == 0 || n_grid[i] > n_grid[i - 1], ErrorCode::kInvalidArgument,
              "n_grid must be strictly increasing");
    }
    require(trials >= 2, ErrorCode::kInvalidArgument, "a study needs at least 2 trials");
    require(probe_eta > 0.0 && probe_eta < 1.0, ErrorCode::kInvalidArgument, "probe_eta must lie in (0, 1)");
  }
};

struct StudyRow {
  std::size_t N = 0;
  std::size_t T = 0;
  double mean_rho_p_lower = 0.0;
  double mean_rho_p_upper = 0.0;
  /// 99% CI half-width of the midpoint mean.
  double ci_half_width = 0.0;
  /// Midpoint mean times the rate factor.
  double rescaled = 0.0;
  double rescaled_ci = 0.0;
  /// Half the sandwich width after rescaling (systematic, not statistical).
  double rescaled_systematic = 0.0;
  std::optional<double> target;
  double probe_mesh = 0.0;
  std::size_t probe_points = 0;
};

struct TailRow {
  std::size_t N = 0;
  double threshold = 0.0;
  /// Fraction of trials whose midpoint is >= threshold.
  double empirical_prob = 0.0;
  /// P(L >= t) <= P(rho >= t) <= P(U >= t).
  double prob_lower = 0.0;
  double prob_upper = 0.0;
  std::string bound_form;
};

struct ZnRow {
  std::size_t N = 0;
  std::size_t T = 0;
  double mean = 0.0;
  double stdev = 0.0;
  double within_0_1 = 0.0;
  double within_0_2 = 0.0;
};

struct VersusRow {
  std::size_t N = 0;
  std::size_t T = 0;
  std::size_t grid_side = 0;
  std::size_t grid_points = 0;
  double grid_rho = 0.0;
  double random_mean = 0.0;
  double random_ci = 0.0;
  double ratio = 0.0;
};

struct EpsNetRow {
  std::size_t N = 0;
  std::size_t T = 0;
  double eps = 0.0;
  double yes_fraction = 0.0;
  double yes_or_unknown_fraction = 0.0;
};

struct FRow {
  OccupancyParams params;
  double f_dp = 0.0;
  double f_lower_bound = 0.0;
};

template <typename Row>
using RowSink = std::function<void(const Row&)>;

// ---------------------------------------------------------------------------
// Plumbing

inline std::uint64_t study_stream(std::size_t grid_index, std::size_t trial) {
  return (static_cast<std::uint64_t>(grid_index) << 32) | static_cast<std::uint64_t>(trial);
}

/// Runs fn(t) for t in [0, count) on up to `threads` workers. Results must be
/// written to per-trial slots; the first exception is rethrown.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= count) return;
        try {
          fn(t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Estimated distance evaluations for T trials at size N: sampling plus
/// probe queries (about 2^s points scanned per pruned query), or a sort
/// for exact one-dimensional domains.
inline double estimate_trial_cost(const DomainModel& domain, std::size_t N, double eta) {
  const double n = static_cast<double>(N);
  if (has_exact_covering(domain)) return n + n * std::log2(std::max(2.0, n));
  const double probes = estimate_probe_count(domain, eta * covering_scale(domain, N));
  return n + probes * std::pow(2.0, domain.intrinsic_dim());
}

inline double estimate_study_cost(const DomainModel& domain, const std::vector<std::size_t>& n_grid,
                                  std::size_t trials, double eta) {
  double total = 0.0;
  for (std::size_t N : n_grid) total += static_cast<double>(trials) * estimate_trial_cost(domain, N, eta);
  return total;
}

inline void check_study_budget(double cost, double budget, bool force) {
  if (force) return;
  char buf[160];
  std::snprintf(buf, sizeof buf, "estimated cost %.3g distance evaluations exceeds budget %.3g (use --force)",
                cost, budget);
  require(cost <= budget, ErrorCode::kResourceLimit, buf);
}

/// Exact value on one-dimensional domains, certified sandwich otherwise.
class CoveringEvaluator {
 public:
  CoveringEvaluator(const DomainModel& domain, std::size_t N, double eta) : domain_(domain) {
    if (!has_exact_covering(domain)) probe_ = build_probe_net(domain, eta * covering_scale(domain, N));
  }

  CoveringRadiusInterval operator()(const PointCloud& x) const {
    return covering_interval(domain_, x, probe_ ? &*probe_ : nullptr);
  }

  double mesh() const { return probe_ ? probe_->certified_mesh : 0.0; }
  std::size_t probe_points() const { return probe_ ? probe_->size() : 0; }
  const ProbeNet* probe() const { return probe_ ? &*probe_ : nullptr; }

 private:
  DomainModel domain_;
  std::optional<ProbeNet> probe_;
};

/// (N / log N)^{exponent} with the natural logarithm.
inline double rate_factor(std::size_t N, double exponent) {
  const double n = static_cast<double>(N);
  return std::pow(n / std::log(n), exponent);
}

// ---------------------------------------------------------------------------
// Studies

/// Means of L^p and U^p over T trials per N, rescaled by (N / log N)^{p/s}.
inline std::vector<StudyRow> run_expectation_study(const StudyConfig& config,
                                                   const RowSink<StudyRow>& sink = {}) {
  config.validate();
  check_study_budget(estimate_study_cost(config.domain, config.n_grid, config.trials, config.probe_eta),
                     config.budget, config.force);
  const double s = config.domain.intrinsic_dim();
  std::optional<double> target;
  try {
    target = limit_constant(config.domain, config.p);
  } catch (const Error&) {
    target.reset();
  }
  std::vector<StudyRow> rows;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const std::size_t N = config.n_grid[g];
    const CoveringEvaluator eval(config.domain, N, config.probe_eta);
    std::vector<double> lo(config.trials), hi(config.trials), mid(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
      const auto x = sample(config.domain, N, SeedSpec{config.master_seed, study_stream(g, t)});
      const auto b = eval(x.points);
      lo[t] = std::pow(b.lower, config.p);
      hi[t] = std::pow(b.upper, config.p);
      mid[t] = 0.5 * (lo[t] + hi[t]);
    });
    const auto ms = summarize(mid);
    const double factor = rate_factor(N, config.p / s);
    StudyRow row;
    row.N = N;
    row.T = config.trials;
    row.mean_rho_p_lower = summarize(lo).mean;
    row.mean_rho_p_upper = summarize(hi).mean;
    row.ci_half_width = ms.ci99;
    row.rescaled = ms.mean * factor;
    row.rescaled_ci = ms.ci99 * factor;
    row.rescaled_systematic = 0.5 * (row.mean_rho_p_upper - row.mean_rho_p_lower) * factor;
    row.target = target;
    row.probe_mesh = eval.mesh();
    row.probe_points = eval.probe_points();
    rows.push_back(row);
    if (sink) sink(row);
  }
  return rows;
}

/// Exact E[arclength covering radius] of N uniform points on a circle of
/// circumference L: half the expected maximal spacing, L H_N / (2N).
inline double circle_expectation_oracle(std::size_t N, double circumference) {
  require(N >= 1, ErrorCode::kInvalidArgument, "oracle needs N >= 1");
  double h = 0.0;
  for (std::size_t k = N; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return circumference * h / (2.0 * static_cast<double>(N));
}

inline std::vector<TailRow> run_tail_study(const DomainModel& domain, std::size_t N, std::size_t T,
                                           const std::vector<double>& thresholds, std::uint64_t seed,
                                           double eta = 0.05, unsigned threads = 0) {
  require(N >= 1 && T >= 1, ErrorCode::kInvalidArgument, "tail study needs N >= 1 and T >= 1");
  require(!thresholds.empty(), ErrorCode::kInvalidArgument, "thresholds must be non-empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    require(thresholds[i] >= 0.0 && std::isfinite(thresholds[i]), ErrorCode::kInvalidArgument,
            "thresholds must be finite and non-negative");
    require(i == 0 || thresholds[i] > thresholds[i - 1], ErrorCode::kInvalidArgument,
            "thresholds must be increasing");
  }
  const CoveringEvaluator eval(domain, N, eta);
  std::vector<double> lo(T), hi(T), mid(T);
  parallel_for(T, threads, [&](std::size_t t) {
    const auto b = eval(sample(domain, N, SeedSpec{seed, study_stream(0, t)}).points);
    lo[t] = b.lower;
    hi[t] = b.upper;
    mid[t] = b.midpoint();
  });
  const double scale = covering_scale(domain, N);
  std::vector<TailRow> rows;
  for (double th : thresholds) {
    TailRow row;
    row.N = N;
    row.threshold = th;
    row.empirical_prob = fraction_if(mid, [&](double v) { return v >= th; });
    row.prob_lower = fraction_if(lo, [&](double v) { return v >= th; });
    row.prob_upper = fraction_if(hi, [&](double v) { return v >= th; });
    row.bound_form = th >= scale ? "upper_tail_decay" : "lower_tail_concentration";
    rows.push_back(row);
  }
  return rows;
}

/// Z_N = rho * (upsilon_d / ((d+1) upsilon_{d+1}) * N / log N)^{1/d} on S^d.
inline std::vector<ZnRow> run_zn_study(int d, const std::vector<std::size_t>& n_grid, std::size_t T,
                                       std::uint64_t seed, double eta = 0.05, unsigned threads = 0) {
  require(d == 1 || d == 2, ErrorCode::kInvalidArgument, "Z_N study supports d in {1, 2}");
  require(T >= 1 && !n_grid.empty(), ErrorCode::kInvalidArgument, "Z_N study needs T >= 1 and an N grid");
  const DomainModel domain{Sphere{d}};
  const double c = unit_ball_volume(d) / ((d + 1) * unit_ball_volume(d + 1));
  std::vector<ZnRow> rows;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t N = n_grid[g];
    require(N >= 2, ErrorCode::kInvalidArgument, "Z_N needs N >= 2");
    const CoveringEvaluator eval(domain, N, eta);
    const double factor = std::pow(c * static_cast<double>(N) / std::log(static_cast<double>(N)), 1.0 / d);
    std::vector<double> z(T);
    parallel_for(T, threads, [&](std::size_t t) {
      z[t] = eval(sample(domain, N, SeedSpec{seed, study_stream(g, t)}).points).midpoint() * factor;
    });
    const auto sm = summarize(z);
    rows.push_back({N, T, sm.mean, sm.stdev, fraction_if(z, [](double v) { return std::abs(v - 1.0) <= 0.1; }),
                    fraction_if(z, [](double v) { return std::abs(v - 1.0) <= 0.2; })});
  }
  return rows;
}

/// Rate that makes the windowed arcsine covering radius bounded: N^2 on
/// the edge window for a >= 2, N^{1+a/2}/log N for 0 < a < 2, N/log N on
/// the interior window.
inline double arcsine_rate(double a, WindowSide side, std::size_t N) {
  const double n = static_cast<double>(N);
  if (side == WindowSide::kInterior) return n / std::log(n);
  if (a >= 2.0) return n * n;
  return std::pow(n, 1.0 + a / 2.0) / std::log(n);
}

inline std::vector<StudyRow> run_arcsine_study(double a, WindowSide side, const std::vector<std::size_t>& n_grid,
                                               std::size_t T, std::uint64_t seed, unsigned threads = 0) {
  require(a > 0.0 && std::isfinite(a), ErrorCode::kInvalidArgument, "window exponent must be positive");
  require(T >= 1 && !n_grid.empty(), ErrorCode::kInvalidArgument, "arcsine study needs T >= 1 and an N grid");
  const DomainModel domain{ArcsineInterval{}};
  const WindowSpec window{a, side};
  std::vector<StudyRow> rows;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t N = n_grid[g];
    std::vector<double> v(T);
    parallel_for(T, threads, [&](std::size_t t) {
      const auto x = sample(domain, N, SeedSpec{seed, study_stream(g, t)});
      v[t] = covering_radius_window(domain, x.points, window, static_cast<double>(N));
    });
    const auto sm = summarize(v);
    const double rate = arcsine_rate(a, side, N);
    StudyRow row;
    row.N = N;
    row.T = T;
    row.mean_rho_p_lower = row.mean_rho_p_upper = sm.mean;
    row.ci_half_width = sm.ci99;
    row.rescaled = sm.mean * rate;
    row.rescaled_ci = sm.ci99 * rate;
    rows.push_back(row);
  }
  return rows;
}

/// Largest k with k^d <= N.
inline std::size_t integer_root(std::size_t N, int d) {
  auto k = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(N), 1.0 / d)));
  const auto power = [d](std::size_t b) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= static_cast<double>(b);
    return v;
  };
  while (k > 1 && power(k) > static_cast<double>(N)) --k;
  while (power(k + 1) <= static_cast<double>(N)) ++k;
  return std::max<std::size_t>(k, 1);
}

/// Covering radius of the centered k^d grid {(i + 1/2)/k} in [0,1]^d.
inline double centered_grid_radius(std::size_t k, int d) {
  return std::sqrt(static_cast<double>(d)) / (2.0 * static_cast<double>(k));
}

inline PointCloud centered_grid(std::size_t k, int d) {
  PointCloud out(static_cast<std::size_t>(d));
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  for (;;) {
    for (int i = 0; i < d; ++i) p[i] = (static_cast<double>(idx[i]) + 0.5) / static_cast<double>(k);
    out.push_back(p);
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == k) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return out;
}

inline std::vector<VersusRow> run_random_vs_structured(int d, const std::vector<std::size_t>& n_grid,
                                                       std::size_t T, std::uint64_t seed, double eta = 0.05,
                                                       unsigned threads = 0) {
  require(d >= 1 && d <= 3, ErrorCode::kInvalidArgument, "random-vs-structured supports d in {1, 2, 3}");
  require(T >= 1 && !n_grid.empty(), ErrorCode::kInvalidArgument, "study needs T >= 1 and an N grid");
  const DomainModel domain{Cube{d}};
  std::vector<VersusRow> rows;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t N = n_grid[g];
    require(N >= 2, ErrorCode::kInvalidArgument, "random-vs-structured needs N >= 2");
    const CoveringEvaluator eval(domain, N, eta);
    std::vector<double> v(T);
    parallel_for(T, threads, [&](std::size_t t) {
      v[t] = eval(sample(domain, N, SeedSpec{seed, study_stream(g, t)}).points).midpoint();
    });
    const auto sm = summarize(v);
    VersusRow row;
    row.N = N;
    row.T = T;
    row.grid_side = integer_root(N, d);
    row.grid_points = static_cast<std::size_t>(std::llround(std::pow(double(row.grid_side), d)));
    row.grid_rho = centered_grid_radius(row.grid_side, d);
    row.random_mean = sm.mean;
    row.random_ci = sm.ci99;
    row.ratio = sm.mean / row.grid_rho;
    rows.push_back(row);
  }
  return rows;
}

/// eps = c_mult * covering_scale(N); fraction of trials certified as eps-nets.
inline std::vector<EpsNetRow> run_epsnet_study(const DomainModel& domain, const std::vector<std::size_t>& n_grid,
                                               std::size_t T, double c_mult, std::uint64_t seed,
                                               double eta = 0.05, unsigned threads = 0) {
  require(c_mult > 0.0 && std::isfinite(c_mult), ErrorCode::kInvalidArgument, "c_mult must be positive");
  require(T >= 1 && !n_grid.empty(), ErrorCode::kInvalidArgument, "study needs T >= 1 and an N grid");
  std::vector<EpsNetRow> rows;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t N = n_grid[g];
    const CoveringEvaluator eval(domain, N, eta);
    const double eps = c_mult * covering_scale(domain, N);
    std::vector<double> yes(T), maybe(T);
    parallel_for(T, threads, [&](std::size_t t) {
      const auto v = eps_net_verdict(eval(sample(domain, N, SeedSpec{seed, study_stream(g, t)}).points), eps);
      yes[t] = v.value == Verdict::kYes ? 1.0 : 0.0;
      maybe[t] = v.value != Verdict::kNo ? 1.0 : 0.0;
    });
    rows.push_back({N, T, eps, summarize(yes).mean, summarize(maybe).mean});
  }
  return rows;
}

inline std::vector<FRow> run_f_grid(const std::vector<OccupancyParams>& grid) {
  std::vector<FRow> rows;
  rows.reserve(grid.size());
  for (const auto& p : grid) rows.push_back({p, f_dp(p), f_lower_bound(p)});
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_number(std::optional<double> v) { return v ? csv_number(*v) : std::string(); }

inline std::string csv_header(const StudyRow*) {
  return "N,T,mean_rho_p_lower,mean_rho_p_upper,ci_half_width,rescaled,rescaled_ci,rescaled_systematic,target,"
         "probe_mesh,probe_points";
}
inline std::string csv_line(const StudyRow& r) {
  return std::to_string(r.N) + "," + std::to_string(r.T) + "," + csv_number(r.mean_rho_p_lower) + "," +
         csv_number(r.mean_rho_p_upper) + "," + csv_number(r.ci_half_width) + "," + csv_number(r.rescaled) + "," +
         csv_number(r.rescaled_ci) + "," + csv_number(r.rescaled_systematic) + "," + csv_number(r.target) + "," +
         csv_number(r.probe_mesh) + "," + std::to_string(r.probe_points);
}

inline std::string csv_header(const TailRow*) { return "N,threshold,empirical_prob,prob_lower,prob_upper,bound_form"; }
inline std::string csv_line(const TailRow& r) {
  return std::to_string(r.N) + "," + csv_number(r.threshold) + "," + csv_number(r.empirical_prob) + "," +
         csv_number(r.prob_lower) + "," + csv_number(r.prob_upper) + "," + r.bound_form;
}

inline std::string csv_header(const ZnRow*) { return "N,T,mean,stdev,within_0.1,within_0.2"; }
inline std::string csv_line(const ZnRow& r) {
  return std::to_string(r.N) + "," + std::to_string(r.T) + "," + csv_number(r.mean) + "," + csv_number(r.stdev) +
         "," + csv_number(r.within_0_1) + "," + csv_number(r.within_0_2);
}

inline std::string csv_header(const VersusRow*) {
  return "N,T,grid_side,grid_points,grid_rho,random_mean,random_ci,ratio";
}
inline std::string csv_line(const VersusRow& r) {
  return std::to_string(r.N) + "," + std::to_string(r.T) + "," + std::to_string(r.grid_side) + "," +
         std::to_string(r.grid_points) + "," + csv_number(r.grid_rho) + "," + csv_number(r.random_mean) + "," +
         csv_number(r.random_ci) + "," + csv_number(r.ratio);
}

inline std::string csv_header(const EpsNetRow*) { return "N,T,eps,yes_fraction,yes_or_unknown_fraction"; }
inline std::string csv_line(const EpsNetRow& r) {
  return std::to_string(r.N) + "," + std::to_string(r.T) + "," + csv_number(r.eps) + "," +
         csv_number(r.yes_fraction) + "," + csv_number(r.yes_or_unknown_fraction);
}

inline std::string csv_header(const FRow*) { return "N,n,m,f_dp,f_lower_bound"; }
inline std::string csv_line(const FRow& r) {
  return std::to_string(r.params.N) + "," + csv_number(r.params.n) + "," + std::to_string(r.params.m) + "," +
         csv_number(r.f_dp) + "," + csv_number(r.f_lower_bound);
}

template <typename Row>
std::string csv_header() {
  return csv_header(static_cast<const Row*>(nullptr));
}

}  // namespace covrad
