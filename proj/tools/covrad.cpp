// covrad: command-line driver for the covering-radius studies.
//
//   covrad <study|tail|zn|arcsine|epsnet|versus|fgrid|constants>
//          [--config FILE] [--seed S] [--trials T] [--out FILE] [--force]
//
// Each subcommand reads one JSON config (see README for the schema); flags
// override config fields. Rows go to --out as CSV (stdout if absent) and a
// metadata line is appended to <out>.meta.jsonl.
//
// Exit codes: 0 success, 1 invalid config, 2 budget refusal.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "covrad/covrad.hpp"

namespace {

using covrad::Json;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  bool force = false;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      covrad::require(static_cast<bool>(*file_), covrad::ErrorCode::kInvalidArgument, "cannot open " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void line(const std::string& s) { stream() << s << "\n" << std::flush; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

Json load_config(const Options& opt) {
  Json cfg = opt.config_path.empty() ? Json::object() : covrad::read_json_file(opt.config_path);
  covrad::require(cfg.is_object(), covrad::ErrorCode::kInvalidArgument, "config must be a JSON object");
  if (opt.seed) cfg["seed"] = *opt.seed;
  if (opt.trials) cfg["trials"] = *opt.trials;
  return cfg;
}

template <typename T>
T field(const Json& cfg, const char* key) {
  covrad::require(cfg.contains(key), covrad::ErrorCode::kInvalidArgument, std::string("config needs \"") + key + "\"");
  try {
    return cfg.at(key).get<T>();
  } catch (const Json::exception& e) {
    covrad::fail(covrad::ErrorCode::kInvalidArgument, std::string("config field \"") + key + "\": " + e.what());
  }
}

template <typename T>
T field_or(const Json& cfg, const char* key, T fallback) {
  return cfg.contains(key) ? field<T>(cfg, key) : fallback;
}

void announce_budget(double cost, bool force) {
  std::fprintf(stderr, "estimated cost: %.3g distance evaluations (budget %.3g)\n", cost, covrad::kDefaultBudget);
  covrad::check_study_budget(cost, covrad::kDefaultBudget, force);
}

template <typename Row>
void emit(Output& out, const std::vector<Row>& rows) {
  out.line(covrad::csv_header<Row>());
  for (const auto& r : rows) out.line(covrad::csv_line(r));
}

int run(const std::string& command, const Options& opt) {
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  const Json cfg = load_config(opt);
  const std::uint64_t seed = field_or<std::uint64_t>(cfg, "seed", 0);
  const double eta = field_or<double>(cfg, "probe_eta", 0.05);
  Output out(opt.out);

  if (command == "study") {
    covrad::StudyConfig sc;
    sc.domain = covrad::domain_from_json(field<Json>(cfg, "domain"));
    sc.p = field_or<double>(cfg, "p", 1.0);
    sc.n_grid = field<std::vector<std::size_t>>(cfg, "n_grid");
    sc.trials = field<std::size_t>(cfg, "trials");
    sc.probe_eta = eta;
    sc.master_seed = seed;
    sc.force = opt.force;
    sc.validate();
    if (sc.trials < 30) std::fprintf(stderr, "warning: T < 30, normal CIs may be unreliable\n");
    announce_budget(covrad::estimate_study_cost(sc.domain, sc.n_grid, sc.trials, sc.probe_eta), opt.force);
    out.line(covrad::csv_header<covrad::StudyRow>());
    covrad::run_expectation_study(sc, [&](const covrad::StudyRow& r) { out.line(covrad::csv_line(r)); });
  } else if (command == "tail") {
    const auto domain = covrad::domain_from_json(field<Json>(cfg, "domain"));
    const auto N = field<std::size_t>(cfg, "N");
    const auto T = field<std::size_t>(cfg, "trials");
    announce_budget(covrad::estimate_study_cost(domain, {N}, T, eta), opt.force);
    emit(out, covrad::run_tail_study(domain, N, T, field<std::vector<double>>(cfg, "thresholds"), seed, eta));
  } else if (command == "zn") {
    const int d = field<int>(cfg, "d");
    const auto grid = field<std::vector<std::size_t>>(cfg, "n_grid");
    const auto T = field<std::size_t>(cfg, "trials");
    covrad::require(d == 1 || d == 2, covrad::ErrorCode::kInvalidArgument, "zn needs d in {1, 2}");
    announce_budget(covrad::estimate_study_cost(covrad::Sphere{d}, grid, T, eta), opt.force);
    emit(out, covrad::run_zn_study(d, grid, T, seed, eta));
  } else if (command == "arcsine") {
    const std::string side = field_or<std::string>(cfg, "side", "right_edge");
    covrad::require(side == "right_edge" || side == "interior", covrad::ErrorCode::kInvalidArgument,
                    "side must be right_edge or interior");
    emit(out, covrad::run_arcsine_study(field<double>(cfg, "a"),
                                        side == "interior" ? covrad::WindowSide::kInterior
                                                           : covrad::WindowSide::kRightEdge,
                                        field<std::vector<std::size_t>>(cfg, "n_grid"),
                                        field<std::size_t>(cfg, "trials"), seed));
  } else if (command == "epsnet") {
    const auto domain = covrad::domain_from_json(field<Json>(cfg, "domain"));
    const auto grid = field<std::vector<std::size_t>>(cfg, "n_grid");
    const auto T = field<std::size_t>(cfg, "trials");
    announce_budget(covrad::estimate_study_cost(domain, grid, T, eta), opt.force);
    emit(out, covrad::run_epsnet_study(domain, grid, T, field<double>(cfg, "c_mult"), seed, eta));
  } else if (command == "versus") {
    const int d = field<int>(cfg, "d");
    const auto grid = field<std::vector<std::size_t>>(cfg, "n_grid");
    const auto T = field<std::size_t>(cfg, "trials");
    covrad::require(d >= 1 && d <= 3, covrad::ErrorCode::kInvalidArgument, "versus needs d in {1, 2, 3}");
    announce_budget(covrad::estimate_study_cost(covrad::Cube{d}, grid, T, eta), opt.force);
    emit(out, covrad::run_random_vs_structured(d, grid, T, seed, eta));
  } else if (command == "fgrid") {
    std::vector<covrad::OccupancyParams> grid;
    if (cfg.contains("triples")) {
      for (const auto& t : cfg.at("triples")) {
        grid.push_back({t.at(0).get<std::uint64_t>(), t.at(1).get<double>(), t.at(2).get<std::uint64_t>()});
      }
    } else {
      const Json r = field<Json>(cfg, "regime");
      covrad::RegimeSpec spec;
      const std::string v = field_or<std::string>(r, "variant", "I");
      covrad::require(v == "I" || v == "II" || v == "III", covrad::ErrorCode::kInvalidArgument,
                      "variant must be I, II or III");
      spec.variant = v == "I" ? covrad::RegimeVariant::kI
                              : v == "II" ? covrad::RegimeVariant::kII : covrad::RegimeVariant::kIII;
      spec.kappa = field_or<double>(r, "kappa", 1.0);
      spec.alpha = field_or<double>(r, "alpha", 1.5);
      spec.d = field_or<int>(r, "d", 2);
      for (auto N : field<std::vector<std::uint64_t>>(cfg, "n_grid")) grid.push_back(covrad::regime_params(spec, N));
    }
    emit(out, covrad::run_f_grid(grid));
  } else if (command == "constants") {
    const double p = field_or<double>(cfg, "p", 1.0);
    out.line("domain,s,upsilon_s,hausdorff_mass,limit_constant");
    const std::vector<covrad::DomainModel> catalog = {
        covrad::Sphere{1}, covrad::Sphere{2}, covrad::Sphere{3}, covrad::Ball{2},
        covrad::Ball{3},   covrad::Cube{1},   covrad::Cube{2},   covrad::Cube{3},
        covrad::IntervalUniform{}, covrad::Polyhedron3::box({0, 0, 0}, {1, 1, 1}),
        covrad::Polyhedron3::regular_tetrahedron(), covrad::ArcsineInterval{}, covrad::Cantor{}};
    for (const auto& dom : catalog) {
      const auto c = covrad::geometry_constants(dom);
      std::optional<double> lc;
      if (c.limit_constant_base) lc = covrad::limit_constant(dom, p);
      out.line(dom.describe() + "," + covrad::csv_number(dom.intrinsic_dim()) + "," + covrad::csv_number(c.upsilon_s) +
               "," + covrad::csv_number(c.hausdorff_mass) + "," + covrad::csv_number(lc));
    }
  } else {
    covrad::fail(covrad::ErrorCode::kInvalidArgument, "unknown subcommand " + command);
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::time_t now = std::chrono::system_clock::to_time_t(started);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const Json meta = {{"command", command},
                     {"config", cfg},
                     {"generator", covrad::generator_json()},
                     {"library_version", std::string(covrad::kLibraryVersion)},
                     {"started_at", stamp},
                     {"wall_time_s", wall}};
  if (opt.out.empty()) {
    std::cerr << meta.dump() << "\n";
  } else {
    std::ofstream meta_out(opt.out + ".meta.jsonl", std::ios::app);
    meta_out << meta.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covering radii of random point sets"};
  app.require_subcommand(1);
  Options opt;
  const char* commands[][2] = {
      {"study", "expectation study of E[rho^p] against the limit constant"},
      {"tail", "tail probabilities P(rho >= t)"},
      {"zn", "normalized covering radius Z_N on the circle or sphere"},
      {"arcsine", "windowed covering radius under the arcsine measure"},
      {"epsnet", "fraction of samples that are eps-nets"},
      {"versus", "random points versus the regular grid on the cube"},
      {"fgrid", "occupancy function f(N, n, m) and its lower bound"},
      {"constants", "table of limit constants"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--trials", opt.trials, "trials per N");
    sub->add_option("--out", opt.out, "CSV output path (stdout if absent)");
    sub->add_flag("--force", opt.force, "run even above the cost budget");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(app.get_subcommands().front()->get_name(), opt);
  } catch (const covrad::Error& e) {
    std::cerr << "covrad: " << e.what() << "\n";
    return e.code() == covrad::ErrorCode::kResourceLimit ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "covrad: " << e.what() << "\n";
    return 1;
  }
}
