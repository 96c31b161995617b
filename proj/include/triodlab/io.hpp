#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "triodlab/grid_field.hpp"

namespace triodlab {

class DependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Path columns eta, U1, U2, U3 after a comment header carrying the
/// action and residuals.
void write_connection_csv(const std::filesystem::path& path,
                          const ConnectionPath& connection);
ConnectionPath read_connection_csv(const std::filesystem::path& path,
                                   std::shared_ptr<const Potential> potential);

struct SnapshotMeta {
  std::array<double, 3> ray_azimuths{};  // radians, one per connection entry
  std::array<std::string, 3> connection_files{};
  double tube_half_width = 10.0;
  double core_blend_radius = 5.0;
  double residual_norm = 0.0;
  double blending_tolerance = 0.0;
  std::string config_hash;
  nlohmann::ordered_json extra;  // free-form diagnostics
};

/// Fixed-width binary snapshot ("TRIO" magic, version, grid geometry,
/// potential tag, row-major float64 triples) plus a JSON sidecar with
/// residuals and provenance at <path>.json.
void write_field_snapshot(const std::filesystem::path& path,
                          const FarField& field, const SnapshotMeta& meta);

/// Rebuilds the far-field evaluator from a snapshot and its sidecar;
/// missing files raise DependencyError naming the path.
FarField read_field_snapshot(const std::filesystem::path& path);

SnapshotMeta read_snapshot_meta(const std::filesystem::path& sidecar);

nlohmann::ordered_json provenance_json(const std::string& config_hash);
nlohmann::ordered_json vec3_json(const Vec3& v);
nlohmann::ordered_json vec2_json(const Vec2& v);

void write_json_report(const std::filesystem::path& path,
                       const nlohmann::ordered_json& body, bool force);

}  // namespace triodlab
