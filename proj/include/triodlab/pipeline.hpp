#pragma once

#include <filesystem>

#include "json.hpp"
#include "triodlab/config.hpp"
#include "triodlab/io.hpp"

namespace triodlab {

struct StageContext {
  RunConfig cfg;
  std::filesystem::path out;
  bool force = false;
};

std::shared_ptr<const Potential> potential_from_config(const PotentialConfig& pc);

// One function per CLI stage. Each writes its artifacts under ctx.out,
// returns the report body it wrote, and throws on failure (dependency
// errors name the missing file).
nlohmann::ordered_json stage_validate(const StageContext& ctx);
nlohmann::ordered_json stage_connect(const StageContext& ctx);
nlohmann::ordered_json stage_relax(const StageContext& ctx);
nlohmann::ordered_json stage_flux2d(const StageContext& ctx);
nlohmann::ordered_json stage_flux3d(const StageContext& ctx);
nlohmann::ordered_json stage_young(const StageContext& ctx);

/// Chains every stage and writes summary.json; the returned body's
/// "gates_pass" says whether every configured gate held.
nlohmann::ordered_json run_all(const StageContext& ctx);

}  // namespace triodlab
