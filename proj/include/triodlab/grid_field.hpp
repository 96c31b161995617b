#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "triodlab/sampler.hpp"
#include "triodlab/triod.hpp"

namespace triodlab {

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridParams {
  double spacing = 0.1;
  double extent = 25.6;  // square domain [-extent, extent]^2
};

/// Rectangular-grid sample of the order parameter on a square domain.
struct GridField {
  int n = 0;           // nodes per side
  double h = 0.0;      // spacing
  double extent = 0.0;
  std::vector<Vec3> values;  // row-major, index = iy * n + ix
  double residual_norm = 0.0;  // sup |lap_h u - grad W(u)| over the interior
  std::shared_ptr<const Potential> potential;

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(n) +
           static_cast<std::size_t>(ix);
  }
  double coord(int i) const { return -extent + h * static_cast<double>(i); }
  Vec3& at(int ix, int iy) { return values[index(ix, iy)]; }
  const Vec3& at(int ix, int iy) const { return values[index(ix, iy)]; }

  Vec3 bilinear(double x1, double x2) const;

  /// sup |lap_h u - grad W(u)| over interior nodes.
  double compute_residual() const;

  /// Discrete energy: sum over edges of 1/2 |du|^2 plus h^2 sum W.
  double discrete_energy() const;

  double sup_norm() const;
};

/// The far-field evaluator: bilinear interpolation inside the computed
/// grid, the triod ansatz outside.
class FarField final : public PlanarSampler {
 public:
  FarField(GridField grid, TriodAnsatz ansatz);

  Vec3 value(double x1, double x2) const override;
  double gradient_step() const override { return grid_.h; }

  GridField& grid() { return grid_; }
  const GridField& grid() const { return grid_; }
  const TriodAnsatz& ansatz() const { return ansatz_; }

  /// Max seam sampled across the grid boundary at construction.
  double blending_tolerance() const { return blending_tolerance_; }

 private:
  GridField grid_;
  TriodAnsatz ansatz_;
  double blending_tolerance_ = 0.0;
};

/// Builds the initial triod state: grid nodes filled from the ansatz,
/// boundary values meant to stay frozen during relaxation.
FarField init_triod(std::shared_ptr<const Potential> potential,
                    std::array<std::shared_ptr<const ConnectionPath>, 3> paths,
                    std::array<double, 3> azimuths, const GridParams& grid,
                    double tube_half_width = 10.0,
                    double core_blend_radius = 5.0);

struct RelaxParams {
  double time_step = 0.0;  // <= 0 selects the stability-guarded step
  int max_steps = 20000;
  double tolerance = 1e-3;
  int check_interval = 200;
  int workers = 1;
};

struct RelaxReport {
  int steps = 0;
  double residual = 0.0;
  double time_step = 0.0;
  bool converged = false;
  std::vector<double> energy_history;  // at every residual checkpoint
};

/// Explicit gradient-flow relaxation (5-point Laplacian, Jacobi update,
/// Dirichlet boundary frozen at the initial values). Throws
/// InstabilityError if the field blows past 10x its initial bound and
/// ConvergenceError when the step budget runs out above tolerance.
RelaxReport relax(FarField& field, const RelaxParams& params);

/// Per-node nearest-well labels plus the interface crossing points
/// (equidistance loci in order-parameter space) between each pair.
struct PhaseMap {
  int n = 0;
  std::vector<int> labels;
  std::map<std::pair<int, int>, std::vector<Vec2>> interface_points;

  int label(int ix, int iy) const {
    return labels[static_cast<std::size_t>(iy) * static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(ix)];
  }
  bool has_all_regions(int nwells) const;
};

PhaseMap compute_phase_map(const GridField& field);

}  // namespace triodlab
