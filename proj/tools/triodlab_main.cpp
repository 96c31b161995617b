// triodlab: steady triple-junction states of the vector Allen-Cahn
// system, heteroclinic connection actions, stress-tensor flux balances,
// and junction-angle verification. One subcommand per pipeline stage.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "triodlab/pipeline.hpp"
#include "triodlab/version.hpp"

namespace fs = std::filesystem;

namespace {

fs::path resolve_run_dir(const std::string& out_flag,
                         const triodlab::RunConfig& cfg, bool force) {
  fs::path root;
  if (!out_flag.empty()) {
    root = out_flag;
  } else if (!cfg.output_directory.empty()) {
    root = cfg.output_directory;
  } else if (const char* env = std::getenv("TRIOD_LAB_OUT")) {
    root = env;
  } else {
    root = "runs";
  }
  if (force) {
    fs::create_directories(root);
    return root;
  }
  // Fresh timestamped subdirectory; never overwrite an earlier run.
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "run-%Y%m%d-%H%M%S", std::gmtime(&t));
  fs::path dir = root / stamp;
  for (int k = 1; fs::exists(dir); ++k)
    dir = root / (std::string(stamp) + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"triodlab: triple-junction lab for the vector Allen-Cahn system"};
  app.set_version_flag("--version", triodlab::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_flag;
  bool force = false;
  app.add_option("--config", config_path, "run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_flag, "output directory root");
  app.add_flag("--force", force,
               "write into --out directly, overwriting existing artifacts");

  const std::vector<std::string> stages = {"validate-potential", "connect",
                                           "relax", "flux2d", "flux3d",
                                           "young", "all"};
  for (const auto& name : stages) app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    triodlab::StageContext ctx;
    ctx.cfg = triodlab::load_config(config_path);
    ctx.force = force;
    ctx.out = resolve_run_dir(out_flag, ctx.cfg, force);
    std::cerr << "triodlab " << stage << " -> " << ctx.out.string() << "\n";

    nlohmann::ordered_json body;
    if (stage == "validate-potential") {
      body = triodlab::stage_validate(ctx);
    } else if (stage == "connect") {
      body = triodlab::stage_connect(ctx);
      for (const auto& c : body["connections"])
        std::cout << c["file"].get<std::string>()
                  << "  sigma=" << c["sigma"].get<double>() << "\n";
    } else if (stage == "relax") {
      body = triodlab::stage_relax(ctx);
      std::cout << "relaxed in " << body["steps"] << " steps, residual "
                << body["residual_norm"] << "\n";
    } else if (stage == "flux2d") {
      body = triodlab::stage_flux2d(ctx);
    } else if (stage == "flux3d") {
      body = triodlab::stage_flux3d(ctx);
    } else if (stage == "young") {
      body = triodlab::stage_young(ctx);
      std::cout << "angles (deg): " << body["measured_angles_deg"].dump()
                << "  balance " << body["balance_residual"] << "\n";
    } else if (stage == "all") {
      body = triodlab::run_all(ctx);
      if (!body["gates_pass"].get<bool>()) {
        std::cerr << "error in stage all: configured gates failed; see "
                  << (ctx.out / "summary.json").string() << "\n";
        return 3;
      }
    }
    if (body.contains("pass") && !body["pass"].get<bool>()) {
      std::cerr << "error in stage " << stage << ": gates failed\n";
      return 3;
    }
  } catch (const triodlab::DependencyError& e) {
    std::cerr << "error in stage " << stage << ": " << e.what() << "\n";
    std::cout << e.what() << "\n";  // visible to scripted callers
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error in stage " << stage << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
