#include "triodlab/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "triodlab/field_checks.hpp"
#include "triodlab/young.hpp"

namespace triodlab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string connection_filename(const std::array<int, 2>& pair) {
  return "connection_" + std::to_string(pair[0] + 1) +
         std::to_string(pair[1] + 1) + ".csv";
}

std::array<std::shared_ptr<const ConnectionPath>, 3> load_connections(
    const StageContext& ctx, std::shared_ptr<const Potential> pot) {
  std::array<std::shared_ptr<const ConnectionPath>, 3> paths;
  for (std::size_t k = 0; k < 3; ++k) {
    const fs::path csv =
        ctx.out / connection_filename(ctx.cfg.connection.pairs[k]);
    if (!fs::exists(csv))
      throw DependencyError("dependency error: missing " + csv.string() +
                            " (run the connect stage first)");
    paths[k] =
        std::make_shared<ConnectionPath>(read_connection_csv(csv, pot));
  }
  return paths;
}

/// Ray azimuths in radians: configured, or laid out from the predicted
/// junction angles with the first interface at 90 degrees.
std::array<double, 3> ray_azimuths(
    const StageContext& ctx,
    const std::array<std::shared_ptr<const ConnectionPath>, 3>& paths) {
  const double deg = std::numbers::pi / 180.0;
  if (ctx.cfg.field.ray_angles_deg) {
    const auto& a = *ctx.cfg.field.ray_angles_deg;
    return {a[0] * deg, a[1] * deg, a[2] * deg};
  }
  const auto phi =
      predict_angles(paths[0]->action, paths[1]->action, paths[2]->action);
  const double base = 90.0 * deg;
  return {base, base + phi[1], base + phi[1] + phi[2]};
}

FarField load_snapshot(const StageContext& ctx) {
  const fs::path snap = ctx.out / "field.trio";
  if (!fs::exists(snap))
    throw DependencyError("dependency error: missing " + snap.string() +
                          " (run the relax stage first)");
  return read_field_snapshot(snap);
}

/// sigma and conormal of every interface ray of a reconstructed field,
/// in ray order.
struct RayData {
  std::array<double, 3> azimuth{};
  std::array<double, 3> sigma{};
};

RayData ray_data(const FarField& field) {
  RayData d;
  const auto& rays = field.ansatz().rays();
  for (std::size_t k = 0; k < 3; ++k) {
    d.azimuth[k] = rays[k].azimuth;
    d.sigma[k] = rays[k].profile->action;
  }
  return d;
}

}  // namespace

std::shared_ptr<const Potential> potential_from_config(const PotentialConfig& pc) {
  if (pc.family == "triple-well-product" && pc.minima.empty())
    return std::make_shared<TripleWellPotential>(TripleWellPotential::equilateral());
  return make_potential(pc.family, pc.minima);
}

ordered_json stage_validate(const StageContext& ctx) {
  const auto pot = potential_from_config(ctx.cfg.potential);
  const ValidationReport report = validate(*pot);

  ordered_json body;
  body["provenance"] = provenance_json(ctx.cfg.config_hash);
  body["family"] = pot->family();
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"measured", c.measured},
                      {"detail", c.detail}});
  body["checks"] = checks;
  body["coercivity_lower_bound"] = report.coercivity_lower_bound;
  body["all_pass"] = report.all_pass();
  write_json_report(ctx.out / "validate.json", body, ctx.force);
  if (!report.all_pass())
    throw std::runtime_error("potential validation failed; see validate.json");
  return body;
}

ordered_json stage_connect(const StageContext& ctx) {
  const auto pot = potential_from_config(ctx.cfg.potential);
  ConnectionParams params;
  params.half_length = ctx.cfg.connection.half_length;
  params.samples = ctx.cfg.connection.samples;
  params.tolerance = ctx.cfg.connection.tolerance;
  params.max_iterations = ctx.cfg.connection.max_iterations;

  ordered_json body;
  body["provenance"] = provenance_json(ctx.cfg.config_hash);
  ordered_json entries = ordered_json::array();
  for (const auto& pair : ctx.cfg.connection.pairs) {
    const ConnectionPath path = solve_connection(pot, pair[0], pair[1], params);
    const std::string name = connection_filename(pair);
    const fs::path csv = ctx.out / name;
    if (!ctx.force && fs::exists(csv))
      throw std::runtime_error("refusing to overwrite " + csv.string());
    write_connection_csv(csv, path);
    entries.push_back({{"pair", {pair[0], pair[1]}},
                       {"file", name},
                       {"sigma", path.action},
                       {"equipartition_residual", path.equipartition_residual},
                       {"el_residual", path.el_residual},
                       {"w_near_end", path.w_near_end},
                       {"descent_iterations", path.action_history.size() - 1}});
  }
  body["connections"] = entries;
  write_json_report(ctx.out / "connect.json", body, ctx.force);
  return body;
}

ordered_json stage_relax(const StageContext& ctx) {
  const auto pot = potential_from_config(ctx.cfg.potential);
  const auto paths = load_connections(ctx, pot);
  const auto azimuths = ray_azimuths(ctx, paths);

  GridParams grid{ctx.cfg.field.spacing, ctx.cfg.field.extent};
  FarField field = init_triod(pot, paths, azimuths, grid,
                              ctx.cfg.field.tube_half_width,
                              ctx.cfg.field.core_blend_radius);

  RelaxParams rp;
  rp.time_step = ctx.cfg.field.time_step;
  rp.max_steps = ctx.cfg.field.max_steps;
  rp.tolerance = ctx.cfg.field.tolerance;
  rp.check_interval = ctx.cfg.field.check_interval;
  rp.workers = ctx.cfg.workers;
  const RelaxReport report = relax(field, rp);

  const PhaseMap pm = compute_phase_map(field.grid());
  const Hypothesis1Report h1 = check_hypothesis1(field, pm);
  const std::array<double, 4> probe_distances = {5.0, 10.0, 15.0, 20.0};
  std::vector<double> usable;
  for (double d : probe_distances)
    if (d + 2.0 * field.grid().h < field.grid().extent) usable.push_back(d);
  const Hypothesis2Report h2 = check_hypothesis2(field, 0, usable, 6.0);

  SnapshotMeta meta;
  meta.ray_azimuths = azimuths;
  for (std::size_t k = 0; k < 3; ++k)
    meta.connection_files[k] = connection_filename(ctx.cfg.connection.pairs[k]);
  meta.tube_half_width = ctx.cfg.field.tube_half_width;
  meta.core_blend_radius = ctx.cfg.field.core_blend_radius;
  meta.residual_norm = field.grid().residual_norm;
  meta.blending_tolerance = field.blending_tolerance();
  meta.config_hash = ctx.cfg.config_hash;

  ordered_json body;
  body["provenance"] = provenance_json(ctx.cfg.config_hash);
  body["steps"] = report.steps;
  body["residual_norm"] = report.residual;
  body["time_step"] = report.time_step;
  body["energy_initial"] = report.energy_history.front();
  body["energy_final"] = report.energy_history.back();
  body["field_bound"] = field.grid().sup_norm();
  body["blending_tolerance"] = field.blending_tolerance();
  body["hypothesis1"] = {{"value_slope", h1.value_fit.slope},
                         {"gradient_slope", h1.gradient_fit.slope},
                         {"degenerate", h1.value_fit.degenerate},
                         {"samples", h1.value_fit.samples}};
  {
    ordered_json rows = ordered_json::array();
    for (const auto& r : h2.rows)
      rows.push_back({{"distance", r.distance},
                      {"value_dev", r.sup_value_dev},
                      {"normal_deriv_dev", r.sup_normal_deriv_dev},
                      {"tangential_deriv", r.sup_tangential_deriv},
                      {"truncated", r.truncated}});
    body["hypothesis2"] = rows;
  }
  meta.extra = body["hypothesis1"];

  const fs::path snap = ctx.out / "field.trio";
  if (!ctx.force && fs::exists(snap))
    throw std::runtime_error("refusing to overwrite " + snap.string());
  write_field_snapshot(snap, field, meta);
  write_json_report(ctx.out / "relax.json", body, ctx.force);
  return body;
}

ordered_json stage_flux2d(const StageContext& ctx) {
  const FarField field = load_snapshot(ctx);
  const RayData rays = ray_data(field);
  const double sigma_sum = rays.sigma[0] + rays.sigma[1] + rays.sigma[2];

  ordered_json body;
  body["provenance"] = provenance_json(ctx.cfg.config_hash);
  ordered_json runs = ordered_json::array();
  bool pass = true;
  for (double R : ctx.cfg.flux.radii_2d) {
    const CircleFlux flux = flux_circle_2d(
        field, *field.grid().potential, R, ctx.cfg.flux.quadrature_2d,
        rays.azimuth, field.ansatz().tube_half_width());
    ordered_json windows = ordered_json::array();
    double worst_window = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const Vec2 nu{std::cos(rays.azimuth[k]), std::sin(rays.azimuth[k])};
      const Vec2 expected = nu * (-rays.sigma[k]);
      const double rel_err =
          (flux.windows[k] - expected).norm() / rays.sigma[k];
      worst_window = std::max(worst_window, rel_err);
      windows.push_back({{"azimuth", rays.azimuth[k]},
                         {"sigma", rays.sigma[k]},
                         {"value", vec2_json(flux.windows[k])},
                         {"expected", vec2_json(expected)},
                         {"relative_error", rel_err},
                         {"half_angle", flux.window_half_angle[k]}});
    }
    const double balance = flux.total.norm() / sigma_sum;
    const bool ok = balance <= ctx.cfg.flux.gate_total_fraction &&
                    worst_window <= ctx.cfg.flux.gate_window_fraction;
    pass = pass && ok;
    runs.push_back({{"R", R},
                    {"quadrature_points", ctx.cfg.flux.quadrature_2d},
                    {"total", vec2_json(flux.total)},
                    {"total_over_sigma_sum", balance},
                    {"windows", windows},
                    {"rest", vec2_json(flux.rest)},
                    {"worst_window_error", worst_window},
                    {"pass", ok}});
  }
  body["runs"] = runs;
  body["pass"] = pass;
  write_json_report(ctx.out / "flux2d.json", body, ctx.force);
  return body;
}

ordered_json stage_flux3d(const StageContext& ctx) {
  const FarField field = load_snapshot(ctx);
  const RayData rays = ray_data(field);

  const ConvergenceStudy study = convergence_study(
      field, *field.grid().potential, ctx.cfg.flux.schedule, rays.azimuth,
      ctx.cfg.flux.radii_3d, ctx.cfg.flux.resolution, ctx.cfg.flux.delta,
      ctx.cfg.workers);

  ordered_json body;
  body["provenance"] = provenance_json(ctx.cfg.config_hash);
  body["schedule"] = {{"name", ctx.cfg.flux.schedule_name},
                      {"c1", ctx.cfg.flux.schedule.c1},
                      {"c2", ctx.cfg.flux.schedule.c2},
                      {"p1", ctx.cfg.flux.schedule.p1},
                      {"p2", ctx.cfg.flux.schedule.p2}};

  bool i_bounds_ok = true;
  ordered_json radii = ordered_json::array();
  for (std::size_t r = 0; r < study.decompositions.size(); ++r) {
    const FluxDecomposition& d = study.decompositions[r];
    ordered_json slices = ordered_json::array();
    for (std::size_t k = 0; k < d.slices.size(); ++k) {
      const SliceContribution& s = d.slices[k];
      const double az = d.plan.slices[k].azimuth;
      // Slices come back sorted by azimuth; match the ray to pair sigma.
      double sigma = 0.0;
      for (std::size_t m = 0; m < 3; ++m)
        if (std::abs(std::remainder(rays.azimuth[m] - az,
                                    2.0 * std::numbers::pi)) < 1e-9)
          sigma = rays.sigma[m];
      const Vec3 nu{std::cos(az), std::sin(az), 0.0};
      const Vec3 expected = nu * (-2.0 * sigma);
      const double rel = (s.total() - expected).norm() / (2.0 * sigma);
      for (double iv : s.strip_I) i_bounds_ok = i_bounds_ok && iv <= 2.0 + 1e-3;
      slices.push_back({{"azimuth", az},
                        {"sigma", sigma},
                        {"strip", vec3_json(s.strip)},
                        {"offstrip", vec3_json(s.offstrip)},
                        {"slice_total", vec3_json(s.total())},
                        {"expected", vec3_json(expected)},
                        {"relative_error", rel},
                        {"I", {s.strip_I[0], s.strip_I[1], s.strip_I[2]}}});
    }
    radii.push_back(
        {{"R", d.plan.R},
         {"psi1", d.plan.psi1},
         {"psi2", d.plan.psi2},
         {"strip_half_width", d.plan.strip_half_width()},
         {"cap", vec3_json(d.cap)},
         {"cap_abs", d.cap_abs},
         {"cap_area_renormalized", d.cap_area_renormalized},
         {"cap_sup_tensor", d.cap_sup_tensor},
         {"cap_bound", d.cap_bound},
         {"frobenius_bound_violation", d.frobenius_bound_violation},
         {"total", vec3_json(d.total)},
         {"total_magnitude", d.total.norm()},
         {"slices", slices},
         {"evaluations", d.evaluations}});
  }
  body["radii"] = radii;
  body["cap_exponent"] = study.cap_exponent;
  body["offstrip_rate"] = study.offstrip_rate;
  body["slice_differences_shrink"] = study.slice_differences_shrink;

  // Gates: slice limits at the largest radius, the I_j bounds, and the
  // decay of the total.
  double worst_slice = 0.0;
  for (const auto& s : radii.back()["slices"])
    worst_slice = std::max(worst_slice, s["relative_error"].get<double>());
  bool total_decreasing = true;
  for (std::size_t r = 0; r + 1 < study.rows.size(); ++r)
    total_decreasing = total_decreasing && study.rows[r + 1].total_magnitude <
                                               study.rows[r].total_magnitude;
  const bool pass = worst_slice <= ctx.cfg.flux.gate_slice_fraction &&
                    i_bounds_ok && total_decreasing;
  body["worst_slice_error"] = worst_slice;
  body["i_bounds_ok"] = i_bounds_ok;
  body["total_decreasing"] = total_decreasing;
  body["pass"] = pass;
  write_json_report(ctx.out / "flux3d.json", body, ctx.force);
  return body;
}

ordered_json stage_young(const StageContext& ctx) {
  const FarField field = load_snapshot(ctx);
  const PhaseMap pm = compute_phase_map(field.grid());
  const auto fits = extract_interfaces(field.grid(), pm,
                                       ctx.cfg.young.annulus_min,
                                       ctx.cfg.young.annulus_max);

  // Actions keyed to the (0,1), (1,2), (0,2) slots.
  std::array<double, 3> sigma{};
  const auto& rays = field.ansatz().rays();
  auto sigma_of = [&](int i, int j) {
    for (const auto& r : rays)
      if ((r.region_cw == i && r.region_ccw == j) ||
          (r.region_cw == j && r.region_ccw == i))
        return r.profile->action;
    throw std::runtime_error("stage_young: missing interface for pair");
  };
  sigma[0] = sigma_of(0, 1);
  sigma[1] = sigma_of(1, 2);
  sigma[2] = sigma_of(2, 0);

  const AngleReport report = make_angle_report(fits, sigma);
  const auto predicted = predict_angles(sigma[0], sigma[1], sigma[2]);
  const SineLawCheck sine = verify_sine_law(report, ctx.cfg.young.sine_tolerance);

  const double rad2deg = 180.0 / std::numbers::pi;
  double worst_angle_dev = 0.0;
  for (std::size_t k = 0; k < 3; ++k)
    worst_angle_dev =
        std::max(worst_angle_dev,
                 std::abs(report.region_angle[k] - predicted[k]) * rad2deg);

  const bool pass = sine.pass &&
                    report.balance <= ctx.cfg.young.balance_tolerance &&
                    worst_angle_dev <= ctx.cfg.young.angle_tolerance_deg;

  ordered_json body;
  body["provenance"] = provenance_json(ctx.cfg.config_hash);
  body["conormals"] = {vec2_json(report.conormal[0]), vec2_json(report.conormal[1]),
                       vec2_json(report.conormal[2])};
  body["sigma"] = {sigma[0], sigma[1], sigma[2]};
  body["measured_angles_deg"] = {report.region_angle[0] * rad2deg,
                                 report.region_angle[1] * rad2deg,
                                 report.region_angle[2] * rad2deg};
  body["predicted_angles_deg"] = {predicted[0] * rad2deg, predicted[1] * rad2deg,
                                  predicted[2] * rad2deg};
  body["angle_sum_deg"] = report.angle_sum * rad2deg;
  body["worst_angle_deviation_deg"] = worst_angle_dev;
  body["sine_ratios"] = {report.sine_ratio[0], report.sine_ratio[1],
                         report.sine_ratio[2]};
  body["sine_spread"] = sine.spread;
  body["balance_residual"] = report.balance;
  body["fit_rms"] = {report.fit_rms[0], report.fit_rms[1], report.fit_rms[2]};
  body["pass"] = pass;
  write_json_report(ctx.out / "young.json", body, ctx.force);

  // Summary line for the run-level CSV table.
  const fs::path csv = ctx.out / "report.csv";
  const bool fresh = !fs::exists(csv);
  std::ofstream table(csv, std::ios::app);
  if (fresh)
    table << "stage,phi1_deg,phi2_deg,phi3_deg,sine_spread,balance_residual\n";
  table.precision(12);
  table << "young," << report.region_angle[0] * rad2deg << ","
        << report.region_angle[1] * rad2deg << ","
        << report.region_angle[2] * rad2deg << "," << sine.spread << ","
        << report.balance << "\n";
  return body;
}

ordered_json run_all(const StageContext& ctx) {
  ordered_json summary;
  summary["provenance"] = provenance_json(ctx.cfg.config_hash);

  const ordered_json validate_body = stage_validate(ctx);
  summary["validate"] = {{"all_pass", validate_body["all_pass"]}};

  const ordered_json connect_body = stage_connect(ctx);
  {
    ordered_json sig = ordered_json::array();
    for (const auto& c : connect_body["connections"]) sig.push_back(c["sigma"]);
    summary["connect"] = {{"sigma", sig}};
  }

  const ordered_json relax_body = stage_relax(ctx);
  summary["relax"] = {{"steps", relax_body["steps"]},
                      {"residual_norm", relax_body["residual_norm"]}};

  const ordered_json flux2d_body = stage_flux2d(ctx);
  summary["flux2d"] = {{"pass", flux2d_body["pass"]}};

  const ordered_json flux3d_body = stage_flux3d(ctx);
  summary["flux3d"] = {{"pass", flux3d_body["pass"]},
                       {"cap_exponent", flux3d_body["cap_exponent"]}};

  const ordered_json young_body = stage_young(ctx);
  summary["young"] = {{"pass", young_body["pass"]},
                      {"measured_angles_deg", young_body["measured_angles_deg"]},
                      {"balance_residual", young_body["balance_residual"]},
                      {"sine_spread", young_body["sine_spread"]}};

  const bool gates = validate_body["all_pass"].get<bool>() &&
                     flux2d_body["pass"].get<bool>() &&
                     flux3d_body["pass"].get<bool>() &&
                     young_body["pass"].get<bool>();
  summary["gates_pass"] = gates;
  write_json_report(ctx.out / "summary.json", summary, ctx.force);
  return summary;
}

}  // namespace triodlab
