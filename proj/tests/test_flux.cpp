#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "triodlab/flux.hpp"

using namespace triodlab;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("circle flux of a constant field is zero") {
  const auto pot = testing::equilateral_potential();
  const Vec3 a = pot->minima()[1];
  AnalyticSampler constant([a](double, double) { return a; });
  const std::array<double, 2> az = {0.5 * kPi, 1.5 * kPi};
  const CircleFlux flux = flux_circle_2d(constant, *pot, 5.0, 256, az);
  CHECK(flux.total.norm() == 0.0);
  CHECK(flux.windows[0].norm() == 0.0);
}

TEST_CASE("circle flux crossings of a single extruded connection") {
  // The interface line x1 = 0 meets the circle at azimuths 0 and pi in
  // profile coordinates rotated by +90 degrees: crossings carry
  // -sigma nu with opposite conormals, so the total cancels.
  const auto sampler = testing::tanh_profile_sampler();
  const auto pot = testing::quartic_potential();
  const std::array<double, 2> az = {0.5 * kPi, 1.5 * kPi};
  const CircleFlux flux = flux_circle_2d(sampler, *pot, 20.0, 4096, az);

  const double sigma = testing::kSigmaQuartic;
  CHECK(flux.total.norm() <= 1e-6 * sigma);
  const Vec2 expect_top{0.0, -sigma};
  const Vec2 expect_bottom{0.0, sigma};
  CHECK((flux.windows[0] - expect_top).norm() <= 1e-4 * sigma);
  CHECK((flux.windows[1] - expect_bottom).norm() <= 1e-4 * sigma);
  CHECK(flux.rest.norm() <= 1e-9);
}

TEST_CASE("circle flux input validation") {
  const auto sampler = testing::tanh_profile_sampler();
  const auto pot = testing::quartic_potential();
  const std::array<double, 1> az = {0.0};
  CHECK_THROWS_AS(flux_circle_2d(sampler, *pot, -1.0, 256, az),
                  std::invalid_argument);
  CHECK_THROWS_AS(flux_circle_2d(sampler, *pot, 5.0, 4, az),
                  std::invalid_argument);
}

TEST_CASE("reference schedule gate: rejected at R = 100, accepted at R = 2000") {
  const std::array<double, 3> az = testing::symmetric_azimuths();
  const AngleSchedule ref = AngleSchedule::reference();
  CHECK_THROWS_AS(make_surgery_plan(100.0, ref, az), ScheduleViolationError);
  CHECK_NOTHROW(make_surgery_plan(2000.0, ref, az));
  // The strict inequality sqrt(2) sin(R^{-4/5}) < sin(R^{-3/4}) flips
  // between 1024 and 1025.
  CHECK_THROWS_AS(make_surgery_plan(1024.0, ref, az), ScheduleViolationError);
  CHECK_NOTHROW(make_surgery_plan(1025.0, ref, az));
}

TEST_CASE("desk-scale schedule is valid from R = 10") {
  const std::array<double, 3> az = testing::symmetric_azimuths();
  for (double R : {10.0, 50.0, 160.0})
    CHECK_NOTHROW(make_surgery_plan(R, AngleSchedule::desk_scale(), az));
  CHECK_THROWS_AS(make_surgery_plan(-5.0, AngleSchedule::desk_scale(), az),
                  std::invalid_argument);
}

TEST_CASE("slice tiling: midpoints by default, strict checks for uniform delta") {
  const std::array<double, 3> sym = testing::symmetric_azimuths();
  const AngleSchedule desk = AngleSchedule::desk_scale();

  const SurgeryPlan plan = make_surgery_plan(40.0, desk, sym);
  double covered = 0.0;
  for (const Slice& s : plan.slices) {
    CHECK(s.lo < s.azimuth);
    CHECK(s.azimuth < s.hi);
    covered += s.hi - s.lo;
  }
  CHECK(covered == doctest::Approx(2.0 * kPi).epsilon(1e-12));

  // Uniform delta must tile exactly.
  CHECK_NOTHROW(make_surgery_plan(40.0, desk, sym, kPi / 3.0));
  CHECK_THROWS_AS(make_surgery_plan(40.0, desk, sym, 50.0 * kPi / 180.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_surgery_plan(40.0, desk, sym, 70.0 * kPi / 180.0),
                  std::invalid_argument);

  // Asymmetric azimuths still tile with midpoint boundaries.
  const std::array<double, 3> asym = {90.0 * kPi / 180.0, 200.0 * kPi / 180.0,
                                      330.0 * kPi / 180.0};
  const SurgeryPlan asym_plan = make_surgery_plan(40.0, desk, asym);
  double asym_covered = 0.0;
  for (const Slice& s : asym_plan.slices) asym_covered += s.hi - s.lo;
  CHECK(asym_covered == doctest::Approx(2.0 * kPi).epsilon(1e-12));
}

TEST_CASE("renormalized cap area matches 4 pi R (1 - cos psi2)") {
  const auto pot = testing::equilateral_potential();
  const Vec3 a = pot->minima()[0];
  AnalyticSampler constant([a](double, double) { return a; });
  const std::array<double, 3> az = testing::symmetric_azimuths();
  const SurgeryPlan plan =
      make_surgery_plan(100.0, AngleSchedule::desk_scale(), az);
  const FluxDecomposition d = flux_sphere_3d(constant, *pot, plan);

  const double psi2 = std::pow(100.0, -0.75);
  const double formula = 4.0 * kPi * 100.0 * (1.0 - std::cos(psi2));
  CHECK(formula == doctest::Approx(0.6283).epsilon(2e-4));  // direct arithmetic
  CHECK(d.cap_area_renormalized == doctest::Approx(formula).epsilon(1e-6));
  CHECK(std::abs(d.cap_area_renormalized - formula) <= 1e-4);
  // Constant well field: every flux contribution is exactly zero.
  CHECK(d.total.norm() == 0.0);
  CHECK(d.cap_abs == 0.0);
  for (const auto& s : d.slices) {
    CHECK(s.strip.norm() == 0.0);
    CHECK(s.offstrip.norm() == 0.0);
  }
}

TEST_CASE("sphere surgery on a single extruded connection hits the slice limit") {
  const auto sampler = testing::tanh_profile_sampler();
  const auto pot = testing::quartic_potential();
  // The interface plane x1 = 0 meets the sphere at two meridians.
  const std::array<double, 2> az = {0.5 * kPi, 1.5 * kPi};
  const SurgeryPlan plan =
      make_surgery_plan(20.0, AngleSchedule::desk_scale(), az, 0.0, 16.0);
  const FluxDecomposition d = flux_sphere_3d(sampler, *pot, plan);

  const double sigma = testing::kSigmaQuartic;
  REQUIRE(d.slices.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const double beta = plan.slices[k].azimuth;
    const Vec3 expected =
        Vec3{std::cos(beta), std::sin(beta), 0.0} * (-2.0 * sigma);
    // Finite-R truncation: removing the polar caps scales the captured
    // profile by about cos(psi2).
    const double truncation = 1.0 - std::cos(plan.psi2);
    CHECK((d.slices[k].total() - expected).norm() / (2.0 * sigma) <=
          1.5 * truncation + 1e-3);
    for (double iv : d.slices[k].strip_I) CHECK(iv <= 2.0 + 1e-3);
    // I2 integrates to exactly 2 cos(psi2); quadrature level agreement.
    CHECK(d.slices[k].strip_I[1] ==
          doctest::Approx(2.0 * std::cos(plan.psi2)).epsilon(1e-4));
  }
  CHECK(d.frobenius_bound_violation <= 1e-12);

  // Partition exactness: the total is the regrouped sum of the parts.
  Vec3 regrouped = d.cap;
  for (const auto& s : d.slices) regrouped += s.strip + s.offstrip;
  CHECK((d.total - regrouped).max_abs() <= 1e-12);
}

TEST_CASE("doubling the quadrature resolution moves the total by < 1e-4 sum sigma") {
  const auto sampler = testing::tanh_profile_sampler();
  const auto pot = testing::quartic_potential();
  const std::array<double, 2> az = {0.5 * kPi, 1.5 * kPi};
  const SurgeryPlan coarse =
      make_surgery_plan(20.0, AngleSchedule::desk_scale(), az, 0.0, 8.0);
  const SurgeryPlan fine =
      make_surgery_plan(20.0, AngleSchedule::desk_scale(), az, 0.0, 16.0);
  const Vec3 t_coarse = flux_sphere_3d(sampler, *pot, coarse).total;
  const Vec3 t_fine = flux_sphere_3d(sampler, *pot, fine).total;
  const double sigma_sum = 2.0 * testing::kSigmaQuartic;
  CHECK((t_coarse - t_fine).norm() <= 1e-4 * sigma_sum);
}

TEST_CASE("reference schedule at large R: strip alone carries the limit") {
  // At R = 2000 the strip half-width R sin(psi1) ~ 4.6 already captures
  // the profile, so the strip term alone approaches -2 sigma nu and the
  // off-strip remainder is negligible.
  const auto sampler = testing::tanh_profile_sampler();
  const auto pot = testing::quartic_potential();
  const std::array<double, 2> az = {0.5 * kPi, 1.5 * kPi};
  const SurgeryPlan plan =
      make_surgery_plan(2000.0, AngleSchedule::reference(), az, 0.0, 6.0);
  const FluxDecomposition d = flux_sphere_3d(sampler, *pot, plan);
  const double sigma = testing::kSigmaQuartic;
  for (std::size_t k = 0; k < 2; ++k) {
    const double beta = plan.slices[k].azimuth;
    const Vec3 expected =
        Vec3{std::cos(beta), std::sin(beta), 0.0} * (-2.0 * sigma);
    CHECK((d.slices[k].strip - expected).norm() / (2.0 * sigma) <= 1e-3);
    CHECK(d.slices[k].offstrip.norm() <= 1e-3 * sigma);
  }
  // The interface runs through the poles, so |T| is O(1) on the caps and
  // only the renormalized area makes their share small.
  CHECK(d.cap_abs <= d.cap_bound);
  CHECK(d.cap_abs <= 0.05);
}

TEST_CASE("exactly symmetric sampler: strips related by 120-degree rotations") {
  // The model field is equivariant to machine precision, so any slice
  // asymmetry is quadrature/frame error.
  const auto sampler = testing::equivariant_model_sampler();
  const auto pot = testing::equilateral_potential();
  const SurgeryPlan plan = make_surgery_plan(
      30.0, AngleSchedule::desk_scale(), testing::symmetric_azimuths(), 0.0, 16.0);
  const FluxDecomposition d = flux_sphere_3d(sampler, *pot, plan);
  const Mat3 rot = Mat3::rotation_z(2.0 * kPi / 3.0);
  const double scale = d.slices[0].strip.norm();
  REQUIRE(scale > 0.0);
  CHECK((rot.matvec(d.slices[0].strip) - d.slices[1].strip).norm() <=
        1e-6 * scale);
  CHECK((rot.matvec(d.slices[1].strip) - d.slices[2].strip).norm() <=
        1e-6 * scale);
}

TEST_CASE("convergence study fits the cap decay and off-strip rate") {
  const FarField& field = testing::symmetric_farfield_small();
  const auto pot = testing::equilateral_potential();
  const std::array<double, 3> radii = {20.0, 40.0, 80.0};
  const ConvergenceStudy study =
      convergence_study(field, *pot, AngleSchedule::desk_scale(),
                        testing::symmetric_azimuths(), radii, 12.0);
  REQUIRE(study.rows.size() == 3);
  // psi2 = R^{-3/4}: the renormalized cap bound scales like R^{-1/2}.
  CHECK(study.cap_exponent == doctest::Approx(-0.5).epsilon(0.35));
  CHECK(study.offstrip_rate <= -0.5);
  CHECK(study.slice_differences_shrink);
  for (std::size_t r = 0; r + 1 < study.rows.size(); ++r)
    CHECK(study.rows[r + 1].total_magnitude < study.rows[r].total_magnitude);
}
