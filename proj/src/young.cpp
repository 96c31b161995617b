#include "triodlab/young.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace triodlab {

namespace {

double wrap_2pi(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

}  // namespace

std::vector<RayFit> extract_interfaces(const GridField& field,
                                       const PhaseMap& pm, double r_min,
                                       double r_max) {
  if (r_min <= 0.0 || r_max <= r_min)
    throw std::invalid_argument("extract_interfaces: bad annulus");
  const int nwells = static_cast<int>(field.potential->minima().size());

  std::vector<RayFit> fits;
  for (int i = 0; i < nwells; ++i)
    for (int j = i + 1; j < nwells; ++j) {
      std::vector<Vec2> pts;
      const auto it = pm.interface_points.find({i, j});
      if (it != pm.interface_points.end()) {
        for (const Vec2& p : it->second) {
          const double r = p.norm();
          if (r >= r_min && r <= r_max) pts.push_back(p);
        }
      }
      if (pts.size() < 10) {
        std::ostringstream msg;
        msg << "extract_interfaces: only " << pts.size()
            << " equidistance points for pair (" << i << "," << j
            << ") in the annulus";
        throw ExtractionError(msg.str());
      }

      // Total least squares through the origin: the direction maximizing
      // sum (p . d)^2 is the principal eigenvector of sum p p^T.
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      Vec2 centroid{};
      for (const Vec2& p : pts) {
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
        centroid += p;
      }
      const double tr = sxx + syy;
      const double det = sxx * syy - sxy * sxy;
      const double lam = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
      Vec2 dir;
      if (std::abs(sxy) > 1e-300)
        dir = {lam - syy, sxy};
      else
        dir = (sxx >= syy) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
      const double norm = dir.norm();
      dir = {dir.x / norm, dir.y / norm};
      if (dir.dot(centroid) < 0.0) dir = {-dir.x, -dir.y};

      double ss = 0.0;
      for (const Vec2& p : pts) {
        const double t = p.x * dir.y - p.y * dir.x;  // transverse offset
        ss += t * t;
      }

      RayFit fit;
      fit.pair = {i, j};
      fit.conormal = dir;
      fit.rms = std::sqrt(ss / static_cast<double>(pts.size()));
      fit.points = static_cast<int>(pts.size());
      fits.push_back(fit);
    }
  return fits;
}

std::array<double, 3> predict_angles(double sigma12, double sigma23,
                                     double sigma31) {
  const double s[3] = {sigma12, sigma23, sigma31};
  for (double v : s)
    if (!(v > 0.0))
      throw std::invalid_argument("predict_angles: actions must be positive");
  for (int k = 0; k < 3; ++k)
    if (!(s[k] < s[(k + 1) % 3] + s[(k + 2) % 3]))
      throw NoBalanceError(
          "predict_angles: actions violate the strict triangle inequality; "
          "no junction angles balance them");

  auto angle = [](double opposite, double a, double b) {
    const double c =
        (opposite * opposite - a * a - b * b) / (2.0 * a * b);
    return std::acos(std::clamp(c, -1.0, 1.0));
  };
  return {angle(sigma23, sigma12, sigma31), angle(sigma31, sigma12, sigma23),
          angle(sigma12, sigma23, sigma31)};
}

double balance_residual(const std::array<double, 3>& sigma,
                        const std::array<Vec2, 3>& conormal) {
  double total = 0.0;
  Vec2 sum{};
  for (int k = 0; k < 3; ++k) {
    const double len = conormal[static_cast<std::size_t>(k)].norm();
    if (std::abs(1.0 - len) > 1e-6)
      throw std::invalid_argument("balance_residual: conormal is not unit length");
    sum += conormal[static_cast<std::size_t>(k)] * sigma[static_cast<std::size_t>(k)];
    total += sigma[static_cast<std::size_t>(k)];
  }
  return sum.norm() / total;
}

AngleReport make_angle_report(const std::vector<RayFit>& fits,
                              const std::array<double, 3>& sigma) {
  AngleReport report;
  report.sigma = sigma;

  // Order the fitted rays into the (0,1), (1,2), (0,2) slots.
  const std::array<std::pair<int, int>, 3> wanted = {
      std::pair<int, int>{0, 1}, {1, 2}, {0, 2}};
  std::array<const RayFit*, 3> ray{};
  for (int k = 0; k < 3; ++k) {
    for (const RayFit& f : fits)
      if (f.pair == wanted[static_cast<std::size_t>(k)])
        ray[static_cast<std::size_t>(k)] = &f;
    if (!ray[static_cast<std::size_t>(k)])
      throw ExtractionError("make_angle_report: missing interface fit");
    report.conormal[static_cast<std::size_t>(k)] =
        ray[static_cast<std::size_t>(k)]->conormal;
    report.fit_rms[static_cast<std::size_t>(k)] =
        ray[static_cast<std::size_t>(k)]->rms;
  }

  // Region angles: consecutive azimuthal gaps, each attributed to the
  // well label the two bounding interfaces share.
  std::array<int, 3> order = {0, 1, 2};
  std::array<double, 3> azim{};
  for (int k = 0; k < 3; ++k)
    azim[static_cast<std::size_t>(k)] =
        wrap_2pi(std::atan2(report.conormal[static_cast<std::size_t>(k)].y,
                            report.conormal[static_cast<std::size_t>(k)].x));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return azim[static_cast<std::size_t>(a)] < azim[static_cast<std::size_t>(b)];
  });

  auto shared_label = [&](int ka, int kb) {
    const auto& pa = wanted[static_cast<std::size_t>(ka)];
    const auto& pb = wanted[static_cast<std::size_t>(kb)];
    for (int x : {pa.first, pa.second})
      for (int y : {pb.first, pb.second})
        if (x == y) return x;
    return -1;
  };

  report.angle_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int ka = order[static_cast<std::size_t>(k)];
    const int kb = order[static_cast<std::size_t>((k + 1) % 3)];
    double gap = azim[static_cast<std::size_t>(kb)] - azim[static_cast<std::size_t>(ka)];
    if (k == 2) gap += 2.0 * std::numbers::pi;
    const int region = shared_label(ka, kb);
    if (region < 0)
      throw ExtractionError("make_angle_report: inconsistent interface pairs");
    report.region_angle[static_cast<std::size_t>(region)] = gap;
    report.angle_sum += gap;
  }

  // sin(phi_i) pairs with the action of the interface opposite C_i.
  for (int k = 0; k < 3; ++k)
    report.sine_ratio[static_cast<std::size_t>(k)] =
        std::sin(report.region_angle[static_cast<std::size_t>(k)]) /
        report.sigma[static_cast<std::size_t>((k + 1) % 3)];

  report.balance = balance_residual(report.sigma, report.conormal);
  return report;
}

SineLawCheck verify_sine_law(const AngleReport& report, double tolerance) {
  SineLawCheck check;
  check.ratios = report.sine_ratio;
  const auto [lo, hi] = std::minmax_element(check.ratios.begin(), check.ratios.end());
  const double mean = (check.ratios[0] + check.ratios[1] + check.ratios[2]) / 3.0;
  check.spread = (*hi - *lo) / mean;
  check.pass = check.spread <= tolerance;
  return check;
}

}  // namespace triodlab
