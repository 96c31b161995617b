#include "triodlab/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "triodlab/version.hpp"

namespace triodlab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_connection_csv(const fs::path& path, const ConnectionPath& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "# sigma=" << c.action
      << " equipartition_residual=" << c.equipartition_residual
      << " el_residual=" << c.el_residual << " w_near_end=" << c.w_near_end
      << " endpoints=" << c.endpoint_i << "," << c.endpoint_j << "\n";
  out << "eta,U1,U2,U3\n";
  for (std::size_t k = 0; k < c.eta.size(); ++k)
    out << c.eta[k] << "," << c.values[k].x << "," << c.values[k].y << ","
        << c.values[k].z << "\n";
}

ConnectionPath read_connection_csv(const fs::path& path,
                                   std::shared_ptr<const Potential> potential) {
  std::ifstream in(path);
  if (!in) throw DependencyError("dependency error: missing " + path.string());
  ConnectionPath c;
  c.potential = potential;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# sigma=", 0) != 0)
    throw std::runtime_error("bad connection csv header in " + path.string());
  {
    std::istringstream hdr(line.substr(1));
    std::string tok;
    while (hdr >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "sigma") c.action = std::stod(val);
      if (key == "equipartition_residual") c.equipartition_residual = std::stod(val);
      if (key == "el_residual") c.el_residual = std::stod(val);
      if (key == "w_near_end") c.w_near_end = std::stod(val);
      if (key == "endpoints") {
        const auto comma = val.find(',');
        c.endpoint_i = std::stoi(val.substr(0, comma));
        c.endpoint_j = std::stoi(val.substr(comma + 1));
      }
    }
  }
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double eta;
    Vec3 u;
    char sep;
    row >> eta >> sep >> u.x >> sep >> u.y >> sep >> u.z;
    c.eta.push_back(eta);
    c.values.push_back(u);
  }
  if (c.eta.size() < 3)
    throw std::runtime_error("connection csv too short: " + path.string());
  return c;
}

namespace {

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_field_snapshot(const fs::path& path, const FarField& field,
                          const SnapshotMeta& meta) {
  const GridField& g = field.grid();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write("TRIO", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kSnapshotFormatVersion));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n));
  put<double>(out, g.h);
  put<double>(out, g.extent);
  char tag[32] = {};
  std::snprintf(tag, sizeof(tag), "%s", g.potential->family().c_str());
  out.write(tag, sizeof(tag));
  const auto minima = g.potential->minima();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(minima.size()));
  for (const Vec3& a : minima) {
    put<double>(out, a.x);
    put<double>(out, a.y);
    put<double>(out, a.z);
  }
  for (const Vec3& v : g.values) {
    put<double>(out, v.x);
    put<double>(out, v.y);
    put<double>(out, v.z);
  }

  ordered_json side;
  side["provenance"] = provenance_json(meta.config_hash);
  side["grid"] = {{"nodes", g.n}, {"spacing", g.h}, {"extent", g.extent}};
  side["potential"] = {{"family", g.potential->family()}};
  {
    ordered_json m = ordered_json::array();
    for (const Vec3& a : minima) m.push_back(vec3_json(a));
    side["potential"]["minima"] = m;
  }
  side["residual_norm"] = meta.residual_norm;
  side["blending_tolerance"] = meta.blending_tolerance;
  side["tube_half_width"] = meta.tube_half_width;
  side["core_blend_radius"] = meta.core_blend_radius;
  {
    ordered_json rays = ordered_json::array();
    for (int k = 0; k < 3; ++k)
      rays.push_back({{"azimuth", meta.ray_azimuths[static_cast<std::size_t>(k)]},
                      {"connection",
                       meta.connection_files[static_cast<std::size_t>(k)]}});
    side["rays"] = rays;
  }
  if (!meta.extra.is_null()) side["diagnostics"] = meta.extra;
  std::ofstream js(path.string() + ".json");
  if (!js) throw std::runtime_error("cannot write sidecar for " + path.string());
  js << side.dump(2) << "\n";
}

SnapshotMeta read_snapshot_meta(const fs::path& sidecar) {
  std::ifstream js(sidecar);
  if (!js) throw DependencyError("dependency error: missing " + sidecar.string());
  ordered_json side = ordered_json::parse(js);
  SnapshotMeta meta;
  meta.residual_norm = side.value("residual_norm", 0.0);
  meta.blending_tolerance = side.value("blending_tolerance", 0.0);
  meta.tube_half_width = side.value("tube_half_width", 10.0);
  meta.core_blend_radius = side.value("core_blend_radius", 5.0);
  if (side.contains("provenance") && side["provenance"].contains("config_hash"))
    meta.config_hash = side["provenance"]["config_hash"].get<std::string>();
  const auto& rays = side.at("rays");
  for (std::size_t k = 0; k < 3; ++k) {
    meta.ray_azimuths[k] = rays.at(k).at("azimuth").get<double>();
    meta.connection_files[k] = rays.at(k).at("connection").get<std::string>();
  }
  return meta;
}

FarField read_field_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("dependency error: missing " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, "TRIO", 4) != 0)
    throw std::runtime_error("bad snapshot magic in " + path.string());
  const auto version = get<std::uint32_t>(in);
  if (version != static_cast<std::uint32_t>(kSnapshotFormatVersion))
    throw std::runtime_error("unsupported snapshot version in " + path.string());
  GridField g;
  const auto nx = get<std::uint32_t>(in);
  const auto ny = get<std::uint32_t>(in);
  if (nx != ny) throw std::runtime_error("snapshot grid must be square");
  g.n = static_cast<int>(nx);
  g.h = get<double>(in);
  g.extent = get<double>(in);
  char tag[32];
  in.read(tag, sizeof(tag));
  tag[31] = '\0';
  const auto n_minima = get<std::uint32_t>(in);
  std::vector<Vec3> minima(n_minima);
  for (auto& a : minima) {
    a.x = get<double>(in);
    a.y = get<double>(in);
    a.z = get<double>(in);
  }
  g.potential = make_potential(tag, minima);
  g.values.resize(static_cast<std::size_t>(g.n) * static_cast<std::size_t>(g.n));
  for (Vec3& v : g.values) {
    v.x = get<double>(in);
    v.y = get<double>(in);
    v.z = get<double>(in);
  }
  if (!in) throw std::runtime_error("snapshot truncated: " + path.string());

  const SnapshotMeta meta = read_snapshot_meta(path.string() + ".json");
  std::array<std::shared_ptr<const ConnectionPath>, 3> paths;
  for (std::size_t k = 0; k < 3; ++k) {
    const fs::path csv = path.parent_path() / meta.connection_files[k];
    paths[k] = std::make_shared<ConnectionPath>(
        read_connection_csv(csv, g.potential));
  }
  TriodAnsatz ansatz(g.potential, paths, meta.ray_azimuths,
                     meta.tube_half_width, meta.core_blend_radius);
  g.residual_norm = meta.residual_norm;
  return FarField(std::move(g), std::move(ansatz));
}

ordered_json provenance_json(const std::string& config_hash) {
  ordered_json p;
  p["config_hash"] = config_hash;
  p["versions"] = {{"triodlab", kVersion},
                   {"snapshot_format", kSnapshotFormatVersion},
                   {"report_schema", kReportSchemaVersion}};
  return p;
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }
ordered_json vec2_json(const Vec2& v) { return ordered_json::array({v.x, v.y}); }

void write_json_report(const fs::path& path, const ordered_json& body, bool force) {
  if (!force && fs::exists(path))
    throw std::runtime_error("refusing to overwrite " + path.string() +
                             " (pass --force)");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body.dump(2) << "\n";
}

}  // namespace triodlab
