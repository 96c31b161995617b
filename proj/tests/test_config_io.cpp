#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "triodlab/config.hpp"
#include "triodlab/io.hpp"
#include "triodlab/pipeline.hpp"

using namespace triodlab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("triodlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kMinimalConfig = R"({
  "potential": {"family": "triple-well-product"},
  "connection": {"half_length": 12.0, "samples": 201, "tolerance": 1e-5},
  "field": {"spacing": 0.3, "extent": 10.0, "max_steps": 2500, "tolerance": 8e-3,
            "ray_angles": [90, 210, 330]},
  "flux": {"radii_2d": [7.0], "quadrature_2d": 1024, "radii_3d": [10.0, 20.0],
           "resolution": 8.0},
  "young": {"annulus": [6.0, 9.5], "sine_tolerance": 0.1,
            "balance_tolerance": 0.1, "angle_tolerance_deg": 5.0},
  "workers": 1
})";

}  // namespace

TEST_CASE("unknown config keys are rejected with their path") {
  const char* text = R"({"potential": {"family": "triple-well-product"},
                         "flux": {"shedule": {"type": "desk-scale"}}})";
  try {
    parse_config_json(text);
    FAIL("expected a config error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("flux.shedule") != std::string::npos);
  }
}

TEST_CASE("nonpositive tolerances and undersized domains are rejected") {
  CHECK_THROWS(parse_config_json(R"({"connection": {"tolerance": 0.0}})"));
  CHECK_THROWS(parse_config_json(R"({"field": {"extent": 4.0}})"));
  CHECK_THROWS(parse_config_json(R"({"young": {"annulus": [5.0, 4.0]}})"));
  CHECK_THROWS(parse_config_json(R"({"workers": 0})"));
}

TEST_CASE("defaults parse and carry the documented values") {
  const RunConfig cfg = parse_config_json("{}");
  CHECK(cfg.connection.samples == 801);
  CHECK(cfg.field.spacing == 0.1);
  CHECK(cfg.flux.schedule.c1 == 0.3);
  CHECK_FALSE(cfg.field.ray_angles_deg.has_value());  // predict mode
}

TEST_CASE("config hash is the FNV-1a of the raw bytes") {
  CHECK(config_hash_hex("") == "cbf29ce484222325");  // offset basis
  CHECK(config_hash_hex("a") != config_hash_hex("b"));
  CHECK(config_hash_hex(kMinimalConfig) == config_hash_hex(kMinimalConfig));
}

TEST_CASE("connection CSV round trip preserves samples and header") {
  const fs::path dir = temp_dir("csv");
  ConnectionParams params;
  params.samples = 101;
  const auto pot = testing::quartic_potential();
  const ConnectionPath path = solve_connection(pot, 0, 1, params);
  write_connection_csv(dir / "c.csv", path);
  const ConnectionPath back = read_connection_csv(dir / "c.csv", pot);
  REQUIRE(back.values.size() == path.values.size());
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    CHECK(back.eta[k] == path.eta[k]);
    CHECK((back.values[k] - path.values[k]).norm() == 0.0);
  }
  CHECK(back.action == path.action);
  CHECK(back.endpoint_i == 0);
  CHECK(back.endpoint_j == 1);
}

TEST_CASE("missing connection CSV raises a dependency error") {
  CHECK_THROWS_AS(read_connection_csv("/nonexistent/c.csv",
                                      testing::quartic_potential()),
                  DependencyError);
}

TEST_CASE("field snapshot round trip is bit exact") {
  const fs::path dir = temp_dir("snap");
  FarField field = init_triod(testing::equilateral_potential(),
                              testing::symmetric_paths_rotated(),
                              testing::symmetric_azimuths(), GridParams{0.4, 8.0});
  SnapshotMeta meta;
  meta.ray_azimuths = testing::symmetric_azimuths();
  meta.connection_files = {"c01.csv", "c12.csv", "c20.csv"};
  meta.residual_norm = field.grid().residual_norm;
  meta.blending_tolerance = field.blending_tolerance();
  meta.config_hash = "deadbeefdeadbeef";
  const auto paths = testing::symmetric_paths_rotated();
  write_connection_csv(dir / "c01.csv", *paths[0]);
  write_connection_csv(dir / "c12.csv", *paths[1]);
  write_connection_csv(dir / "c20.csv", *paths[2]);
  write_field_snapshot(dir / "field.trio", field, meta);

  const FarField back = read_field_snapshot(dir / "field.trio");
  REQUIRE(back.grid().n == field.grid().n);
  CHECK(back.grid().h == field.grid().h);
  for (std::size_t k = 0; k < field.grid().values.size(); ++k)
    CHECK((back.grid().values[k] - field.grid().values[k]).norm() == 0.0);
  CHECK(back.grid().potential->family() == "triple-well-product");
  // The rebuilt evaluator agrees outside the grid too.
  CHECK((back.value(15.0, 3.0) - field.value(15.0, 3.0)).norm() <= 1e-12);
}

TEST_CASE("missing snapshot raises a dependency error naming the file") {
  try {
    read_field_snapshot("/nonexistent/field.trio");
    FAIL("expected DependencyError");
  } catch (const DependencyError& e) {
    CHECK(std::string(e.what()).find("field.trio") != std::string::npos);
  }
}

TEST_CASE("json reports refuse to overwrite without force") {
  const fs::path dir = temp_dir("report");
  nlohmann::ordered_json body = {{"x", 1}};
  write_json_report(dir / "r.json", body, false);
  CHECK_THROWS(write_json_report(dir / "r.json", body, false));
  CHECK_NOTHROW(write_json_report(dir / "r.json", body, true));
}

TEST_CASE("single-worker pipeline runs are byte identical") {
  auto run_into = [&](const std::string& name) {
    StageContext ctx;
    ctx.cfg = parse_config_json(kMinimalConfig);
    ctx.cfg.config_hash = config_hash_hex(kMinimalConfig);
    ctx.out = temp_dir(name);
    ctx.force = true;
    run_all(ctx);
    return ctx.out;
  };
  const fs::path a = run_into("det_a");
  const fs::path b = run_into("det_b");
  for (const char* name : {"summary.json", "young.json", "flux3d.json",
                           "flux2d.json", "relax.json", "connect.json"}) {
    std::ifstream fa(a / name), fb(b / name);
    std::string sa((std::istreambuf_iterator<char>(fa)),
                   std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)),
                   std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK_FALSE(sa.empty());
  }
}
