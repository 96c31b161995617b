#include "triodlab/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace triodlab {

namespace {

using nlohmann::json;

void require_known_keys(const json& obj, const std::string& where,
                        const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.contains(it.key()))
      throw std::runtime_error("config: unknown key " + where + "." + it.key());
}

Vec3 parse_vec3(const json& a, const std::string& where) {
  if (!a.is_array() || a.size() != 3)
    throw std::runtime_error("config: " + where + " must be a 3-array");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

void require_positive(double v, const std::string& name) {
  if (!(v > 0.0)) throw std::runtime_error("config: " + name + " must be > 0");
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json root = json::parse(text);
  if (!root.is_object()) throw std::runtime_error("config: root must be an object");
  require_known_keys(root, "<root>",
                     {"potential", "connection", "field", "flux", "young",
                      "workers", "output"});

  RunConfig cfg;

  if (root.contains("potential")) {
    const json& p = root["potential"];
    require_known_keys(p, "potential", {"family", "minima"});
    if (p.contains("family")) cfg.potential.family = p["family"].get<std::string>();
    if (p.contains("minima")) {
      if (!p["minima"].is_array())
        throw std::runtime_error("config: potential.minima must be an array");
      for (std::size_t k = 0; k < p["minima"].size(); ++k)
        cfg.potential.minima.push_back(
            parse_vec3(p["minima"][k], "potential.minima[" + std::to_string(k) + "]"));
    }
  }

  if (root.contains("connection")) {
    const json& c = root["connection"];
    require_known_keys(c, "connection",
                       {"half_length", "samples", "tolerance", "max_iterations",
                        "pairs"});
    if (c.contains("half_length")) cfg.connection.half_length = c["half_length"];
    if (c.contains("samples")) cfg.connection.samples = c["samples"];
    if (c.contains("tolerance")) cfg.connection.tolerance = c["tolerance"];
    if (c.contains("max_iterations"))
      cfg.connection.max_iterations = c["max_iterations"];
    if (c.contains("pairs")) {
      const json& pr = c["pairs"];
      if (!pr.is_array() || pr.size() != 3)
        throw std::runtime_error("config: connection.pairs must list 3 pairs");
      for (std::size_t k = 0; k < 3; ++k) {
        if (!pr[k].is_array() || pr[k].size() != 2)
          throw std::runtime_error("config: connection.pairs entries are 2-arrays");
        cfg.connection.pairs[k] = {pr[k][0].get<int>(), pr[k][1].get<int>()};
      }
    }
  }

  if (root.contains("field")) {
    const json& f = root["field"];
    require_known_keys(f, "field",
                       {"spacing", "extent", "time_step", "max_steps",
                        "tolerance", "check_interval", "ray_angles",
                        "tube_half_width", "core_blend_radius"});
    if (f.contains("spacing")) cfg.field.spacing = f["spacing"];
    if (f.contains("extent")) cfg.field.extent = f["extent"];
    if (f.contains("time_step")) cfg.field.time_step = f["time_step"];
    if (f.contains("max_steps")) cfg.field.max_steps = f["max_steps"];
    if (f.contains("tolerance")) cfg.field.tolerance = f["tolerance"];
    if (f.contains("check_interval")) cfg.field.check_interval = f["check_interval"];
    if (f.contains("tube_half_width"))
      cfg.field.tube_half_width = f["tube_half_width"];
    if (f.contains("core_blend_radius"))
      cfg.field.core_blend_radius = f["core_blend_radius"];
    if (f.contains("ray_angles")) {
      const json& r = f["ray_angles"];
      if (r.is_string()) {
        if (r.get<std::string>() != "predict")
          throw std::runtime_error(
              "config: field.ray_angles must be \"predict\" or a 3-array of degrees");
      } else {
        if (!r.is_array() || r.size() != 3)
          throw std::runtime_error("config: field.ray_angles needs 3 angles");
        cfg.field.ray_angles_deg = {{r[0].get<double>(), r[1].get<double>(),
                                     r[2].get<double>()}};
      }
    }
  }

  if (root.contains("flux")) {
    const json& fl = root["flux"];
    require_known_keys(fl, "flux",
                       {"radii_2d", "quadrature_2d", "radii_3d", "schedule",
                        "delta", "resolution", "gate_total_fraction",
                        "gate_window_fraction", "gate_slice_fraction"});
    if (fl.contains("radii_2d"))
      cfg.flux.radii_2d = fl["radii_2d"].get<std::vector<double>>();
    if (fl.contains("quadrature_2d")) cfg.flux.quadrature_2d = fl["quadrature_2d"];
    if (fl.contains("radii_3d"))
      cfg.flux.radii_3d = fl["radii_3d"].get<std::vector<double>>();
    if (fl.contains("delta")) cfg.flux.delta = fl["delta"];
    if (fl.contains("resolution")) cfg.flux.resolution = fl["resolution"];
    if (fl.contains("gate_total_fraction"))
      cfg.flux.gate_total_fraction = fl["gate_total_fraction"];
    if (fl.contains("gate_window_fraction"))
      cfg.flux.gate_window_fraction = fl["gate_window_fraction"];
    if (fl.contains("gate_slice_fraction"))
      cfg.flux.gate_slice_fraction = fl["gate_slice_fraction"];
    if (fl.contains("schedule")) {
      const json& s = fl["schedule"];
      require_known_keys(s, "flux.schedule", {"type", "c1", "c2", "p1", "p2"});
      const std::string type = s.value("type", "desk-scale");
      if (type == "reference" || type == "paper-exact") {
        cfg.flux.schedule = AngleSchedule::reference();
        cfg.flux.schedule_name = "reference";
      } else if (type == "desk-scale") {
        cfg.flux.schedule = AngleSchedule::desk_scale();
        cfg.flux.schedule_name = "desk-scale";
      } else if (type == "custom") {
        cfg.flux.schedule_name = "custom";
      } else {
        throw std::runtime_error("config: unknown flux.schedule.type " + type);
      }
      if (s.contains("c1")) cfg.flux.schedule.c1 = s["c1"];
      if (s.contains("c2")) cfg.flux.schedule.c2 = s["c2"];
      if (s.contains("p1")) cfg.flux.schedule.p1 = s["p1"];
      if (s.contains("p2")) cfg.flux.schedule.p2 = s["p2"];
    }
  }

  if (root.contains("young")) {
    const json& y = root["young"];
    require_known_keys(y, "young",
                       {"annulus", "sine_tolerance", "balance_tolerance",
                        "angle_tolerance_deg"});
    if (y.contains("annulus")) {
      const json& a = y["annulus"];
      if (!a.is_array() || a.size() != 2)
        throw std::runtime_error("config: young.annulus must be [r_min, r_max]");
      cfg.young.annulus_min = a[0];
      cfg.young.annulus_max = a[1];
    }
    if (y.contains("sine_tolerance")) cfg.young.sine_tolerance = y["sine_tolerance"];
    if (y.contains("balance_tolerance"))
      cfg.young.balance_tolerance = y["balance_tolerance"];
    if (y.contains("angle_tolerance_deg"))
      cfg.young.angle_tolerance_deg = y["angle_tolerance_deg"];
  }

  if (root.contains("workers")) cfg.workers = root["workers"];
  if (root.contains("output")) {
    const json& o = root["output"];
    require_known_keys(o, "output", {"directory"});
    if (o.contains("directory")) cfg.output_directory = o["directory"];
  }

  // Validation.
  require_positive(cfg.connection.half_length, "connection.half_length");
  require_positive(cfg.connection.tolerance, "connection.tolerance");
  if (cfg.connection.samples < 3)
    throw std::runtime_error("config: connection.samples must be >= 3");
  require_positive(cfg.field.spacing, "field.spacing");
  require_positive(cfg.field.extent, "field.extent");
  require_positive(cfg.field.tolerance, "field.tolerance");
  require_positive(cfg.young.sine_tolerance, "young.sine_tolerance");
  require_positive(cfg.young.balance_tolerance, "young.balance_tolerance");
  require_positive(cfg.flux.resolution, "flux.resolution");
  if (cfg.workers < 1) throw std::runtime_error("config: workers must be >= 1");
  // Three connection-profile widths; the diffuse layer is O(1) wide.
  const double min_extent = 3.0 * 2.0;
  if (cfg.field.extent < min_extent)
    throw std::runtime_error(
        "config: field.extent must cover at least three connection widths (>= 6)");
  if (cfg.young.annulus_min < min_extent)
    throw std::runtime_error(
        "config: young.annulus r_min must be >= three connection widths");
  if (cfg.young.annulus_max <= cfg.young.annulus_min)
    throw std::runtime_error("config: young.annulus must have r_max > r_min");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config_json(buf.str());
  cfg.config_hash = config_hash_hex(buf.str());
  return cfg;
}

std::string config_hash_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace triodlab
