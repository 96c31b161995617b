#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "triodlab/grid_field.hpp"

namespace triodlab {

/// Thrown by predict_angles when the three actions cannot close a force
/// triangle (no junction angle balances them).
class NoBalanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RayFit {
  std::pair<int, int> pair;  // well labels (i < j)
  Vec2 conormal;             // unit, pointing away from the junction
  double rms = 0.0;          // transverse scatter of the fitted points
  int points = 0;
};

/// Fits a ray through the origin to the equidistance points of each
/// well pair inside the annulus [r_min, r_max] (total least squares).
/// Fewer than 10 points for a pair is an extraction error.
std::vector<RayFit> extract_interfaces(const GridField& field,
                                       const PhaseMap& pm, double r_min,
                                       double r_max);

/// Junction angles from the force triangle:
/// cos(phi_1) = (s23^2 - s12^2 - s31^2) / (2 s12 s31), cyclically.
/// Input order is (sigma_12, sigma_23, sigma_31); output (phi_1, phi_2,
/// phi_3) sums to 2 pi.
std::array<double, 3> predict_angles(double sigma12, double sigma23,
                                     double sigma31);

/// |sigma_12 nu_12 + sigma_23 nu_23 + sigma_31 nu_31| / (sum sigma).
/// Conormals must be unit to 1e-6.
double balance_residual(const std::array<double, 3>& sigma,
                        const std::array<Vec2, 3>& conormal);

/// Everything the junction-angle verdict rests on, in one record.
/// Index convention: entry k of conormal/sigma refers to interface
/// (k, k+1 mod 3), i.e. nu_12, nu_23, nu_31; region_angle[k] is the
/// opening angle phi_{k+1} of region C_{k+1} and pairs with the
/// opposite action in the sine ratios.
struct AngleReport {
  std::array<Vec2, 3> conormal;
  std::array<double, 3> sigma;
  std::array<double, 3> region_angle;  // phi_1, phi_2, phi_3 (radians)
  std::array<double, 3> sine_ratio;    // sin(phi_1)/sigma_23, ...
  std::array<double, 3> fit_rms{};
  double angle_sum = 0.0;
  double balance = 0.0;  // normalized balance residual
};

/// Assembles the report from fitted conormals and the three actions
/// given as sigma[k] = action of interface (k, k+1 mod 3).
AngleReport make_angle_report(const std::vector<RayFit>& fits,
                              const std::array<double, 3>& sigma);

struct SineLawCheck {
  bool pass = false;
  double spread = 0.0;  // (max - min) / mean of the three ratios
  std::array<double, 3> ratios{};
};

SineLawCheck verify_sine_law(const AngleReport& report, double tolerance);

}  // namespace triodlab
