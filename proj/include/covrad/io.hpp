#pragma once

// JSON form of domains, and file export of sample sets and probe nets:
// raw little-endian float64 coordinates plus a JSON sidecar, or CSV.
//
// Domain documents look like {"kind": "sphere", "params": {"d": 2}}.
//   sphere, ball, cube : {"d": int}
//   interval, arcsine  : {}
//   cantor             : {"depth": int}
//   polyline           : {"vertices": [[x, ...], ...]}
//   polyhedron         : {"vertices": [[x, y, z], ...], "tetrahedra": [[i, j, k, l], ...],
//                         "faces": [[i, j, k, ...], ...],
//                         "edges": [{"vertices": [a, b], "faces": [f, g]}, ...]}
// The polyhedron edge list is optional and derived from the faces if absent.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "covrad/error.hpp"
#include "covrad/nets.hpp"
#include "covrad/rng.hpp"
#include "covrad/sampler.hpp"
#include "covrad/spaces.hpp"

namespace covrad {

using Json = nlohmann::json;

inline Json domain_to_json(const DomainModel& domain) {
  Json params = Json::object();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Ball> || std::is_same_v<T, Cube>) {
          params["d"] = p.d;
        } else if constexpr (std::is_same_v<T, Cantor>) {
          params["depth"] = p.depth;
        } else if constexpr (std::is_same_v<T, Polyline>) {
          Json v = Json::array();
          for (std::size_t i = 0; i < p.vertices().size(); ++i) v.push_back(p.vertices().point(i));
          params["vertices"] = v;
        } else if constexpr (std::is_same_v<T, Polyhedron3>) {
          params["vertices"] = p.vertices();
          params["tetrahedra"] = p.tetrahedra();
          params["faces"] = p.faces();
          Json edges = Json::array();
          for (const auto& e : p.edges()) edges.push_back({{"vertices", e.vertices}, {"faces", e.faces}});
          params["edges"] = edges;
        }
      },
      domain.params());
  return {{"kind", std::string(to_string(domain.kind()))}, {"params", params}};
}

inline DomainModel domain_from_json(const Json& doc) {
  try {
    require(doc.is_object() && doc.contains("kind"), ErrorCode::kInvalidArgument,
            "domain document needs a \"kind\" field");
    const std::string kind = doc.at("kind").get<std::string>();
    const Json params = doc.value("params", Json::object());
    if (kind == "sphere") return Sphere{params.at("d").get<int>()};
    if (kind == "ball") return Ball{params.at("d").get<int>()};
    if (kind == "cube") return Cube{params.at("d").get<int>()};
    if (kind == "interval") return IntervalUniform{};
    if (kind == "arcsine") return ArcsineInterval{};
    if (kind == "cantor") return Cantor{params.value("depth", 40)};
    if (kind == "polyline") {
      const auto rows = params.at("vertices").get<std::vector<Point>>();
      require(!rows.empty(), ErrorCode::kInvalidGeometry, "polyline needs vertices");
      return Polyline(PointCloud::from_points(rows.front().size(), rows));
    }
    if (kind == "polyhedron") {
      std::vector<PolyEdge> edges;
      if (params.contains("edges")) {
        for (const auto& e : params.at("edges")) {
          PolyEdge pe;
          pe.vertices = e.at("vertices").get<std::array<std::size_t, 2>>();
          pe.faces = e.at("faces").get<std::array<std::size_t, 2>>();
          edges.push_back(pe);
        }
      }
      return Polyhedron3(params.at("vertices").get<std::vector<Vec3>>(),
                         params.at("tetrahedra").get<std::vector<std::array<std::size_t, 4>>>(),
                         params.at("faces").get<std::vector<std::vector<std::size_t>>>(), std::move(edges));
    }
    fail(ErrorCode::kInvalidArgument, "unknown domain kind \"" + kind + "\"");
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed domain document: ") + e.what());
  }
}

inline Json seed_to_json(const SeedSpec& seed) {
  return {{"master_seed", seed.master_seed}, {"stream_id", seed.stream_id}};
}

inline Json generator_json() {
  return {{"name", std::string(Philox4x32::kName)}, {"version", Philox4x32::kVersion}};
}

inline void write_float64_le(const std::string& path, const PointCloud& points) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kInvalidArgument, "cannot open " + path);
  for (double v : points.coords()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  require(static_cast<bool>(out), ErrorCode::kInvalidArgument, "write failed for " + path);
}

inline PointCloud read_float64_le(const std::string& path, std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kInvalidArgument, "cannot open " + path);
  PointCloud out(dim);
  std::vector<double> row;
  char buf[8];
  while (in.read(buf, 8)) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    row.push_back(std::bit_cast<double>(bits));
    if (row.size() == dim) {
      out.push_back(row);
      row.clear();
    }
  }
  require(row.empty(), ErrorCode::kInvalidArgument, path + " does not hold whole points");
  return out;
}

inline void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kInvalidArgument, "cannot open " + path);
  out << doc.dump(2) << "\n";
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kInvalidArgument, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::kInvalidArgument, path + ": " + e.what());
  }
}

/// Writes `<stem>.bin` and `<stem>.json`.
inline void export_sample_set(const SampleSet& set, const std::string& stem) {
  write_float64_le(stem + ".bin", set.points);
  write_json_file(stem + ".json", {{"domain", domain_to_json(set.domain)},
                                   {"N", set.size()},
                                   {"dim", set.points.dim()},
                                   {"seed", seed_to_json(set.seed)},
                                   {"generator", generator_json()}});
}

inline SampleSet import_sample_set(const std::string& stem) {
  const Json meta = read_json_file(stem + ".json");
  SampleSet set{domain_from_json(meta.at("domain")),
                SeedSpec{meta.at("seed").at("master_seed").get<std::uint64_t>(),
                         meta.at("seed").at("stream_id").get<std::uint64_t>()},
                read_float64_le(stem + ".bin", meta.at("dim").get<std::size_t>())};
  require(set.size() == meta.at("N").get<std::size_t>(), ErrorCode::kInvalidArgument,
          stem + ": point count does not match sidecar");
  return set;
}

inline void export_probe_net(const ProbeNet& net, const std::string& stem) {
  write_float64_le(stem + ".bin", net.points);
  write_json_file(stem + ".json", {{"domain", domain_to_json(net.domain)},
                                   {"N", net.size()},
                                   {"dim", net.points.dim()},
                                   {"certified_mesh", net.certified_mesh}});
}

inline void export_csv(const PointCloud& points, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kInvalidArgument, "cannot open " + path);
  char buf[40];
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < points.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", points[i][k]);
      out << (k ? "," : "") << buf;
    }
    out << "\n";
  }
}

}  // namespace covrad
