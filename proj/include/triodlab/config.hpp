#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "triodlab/flux.hpp"
#include "triodlab/vec.hpp"

namespace triodlab {

struct PotentialConfig {
  std::string family = "triple-well-product";
  std::vector<Vec3> minima;  // empty selects the built-in equilateral wells
};

struct ConnectionConfig {
  double half_length = 12.0;
  int samples = 801;
  double tolerance = 1e-6;
  int max_iterations = 200000;
  std::array<std::array<int, 2>, 3> pairs = {{{0, 1}, {1, 2}, {2, 0}}};
};

struct FieldConfig {
  double spacing = 0.1;
  double extent = 25.6;
  double time_step = 0.0;  // 0 selects the stability-guarded step
  int max_steps = 20000;
  double tolerance = 1.5e-3;
  int check_interval = 200;
  std::optional<std::array<double, 3>> ray_angles_deg;  // absent: predict
  double tube_half_width = 10.0;
  double core_blend_radius = 5.0;
};

struct FluxConfig {
  std::vector<double> radii_2d = {20.0};
  int quadrature_2d = 4096;
  std::vector<double> radii_3d = {40.0, 80.0, 160.0};
  AngleSchedule schedule = AngleSchedule::desk_scale();
  std::string schedule_name = "desk-scale";
  double delta = 0.0;  // 0: slice boundaries at azimuthal midpoints
  double resolution = 16.0;
  double gate_total_fraction = 0.02;   // 2d: |total| / sum sigma
  double gate_window_fraction = 0.05;  // 2d windows vs -sigma nu
  double gate_slice_fraction = 0.05;   // 3d slices vs -2 sigma nu
};

struct YoungConfig {
  double annulus_min = 10.0;
  double annulus_max = 20.0;
  double sine_tolerance = 0.03;
  double balance_tolerance = 0.02;
  double angle_tolerance_deg = 2.0;
};

struct RunConfig {
  PotentialConfig potential;
  ConnectionConfig connection;
  FieldConfig field;
  FluxConfig flux;
  YoungConfig young;
  int workers = 1;
  std::string output_directory;
  std::string config_hash;  // filled by load_config
};

/// Strict parse: unknown keys anywhere in the file are errors, as are
/// nonpositive tolerances and a grid extent below three profile widths.
RunConfig load_config(const std::string& path);
RunConfig parse_config_json(const std::string& text);

/// FNV-1a-64 of the raw config bytes, hex encoded.
std::string config_hash_hex(const std::string& bytes);

}  // namespace triodlab
