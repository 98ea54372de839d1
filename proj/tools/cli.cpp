#include "cli.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "output.hpp"
#include "ssflow/fb_solver.hpp"
#include "ssflow/full_euler.hpp"
#include "ssflow/jump.hpp"
#include "ssflow/local_analysis.hpp"
#include "ssflow/version.hpp"

namespace ssflow::cli {

namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

constexpr double deg = pi / 180.0;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const PreconditionError*>(&e))
    return exit_config;
  if (dynamic_cast<const UnsupportedConfiguration*>(&e)) return exit_unsupported;
  if (dynamic_cast<const NonConvergence*>(&e) || dynamic_cast<const SearchFailure*>(&e)) return exit_nonconvergence;
  return 1;
}

const char* tag_for(int code) {
  switch (code) {
    case exit_config: return "config_error";
    case exit_unsupported: return "unsupported";
    case exit_nonconvergence: return "non_convergence";
    default: return "error";
  }
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results go to caller-owned slots.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

std::string problem_of(const RunConfig& c) { return c.problem.empty() ? "rr" : c.problem; }

GasModel gas_of(const RunConfig& c) { return GasModel(c.gas_gamma); }

// Physical preconditions, with messages that say what to change.
void check_physics(const RunConfig& c, bool need_theta) {
  if (!(c.gas_gamma >= 1.0)) throw ConfigError("--gas-gamma must be >= 1 (got " + fmt(c.gas_gamma) + ")");
  if (problem_of(c) == "rr") {
    if (!(c.rho0 > 0)) throw ConfigError("--rho0 must be positive");
    if (!(c.rho1 > c.rho0)) throw ConfigError("--rho1 must exceed --rho0 for a compressive incident shock");
    if (need_theta) {
      if (!c.theta_w) throw ConfigError("a wedge angle is required: pass --theta-w or --theta-w-deg");
      if (!(*c.theta_w > 0 && *c.theta_w <= pi / 2)) throw ConfigError("wedge angle must lie in (0, pi/2]");
    }
  } else {
    if (!(c.rho_inf > 0)) throw ConfigError("--rho-inf must be positive");
    if (!(c.u_inf > 0)) throw ConfigError("--u-inf must be positive");
    const double mach = c.u_inf / GasModel(c.gas_gamma).sound_speed(c.rho_inf);
    if (!(mach > 1)) throw ConfigError("inflow must be supersonic: u_inf / c(rho_inf) = " + fmt(mach) + " <= 1");
    if (need_theta) {
      if (!c.theta_w) throw ConfigError("a ramp angle is required: pass --theta-w or --theta-w-deg");
      if (!(*c.theta_w > 0 && *c.theta_w < pi / 2)) throw ConfigError("ramp angle must lie in (0, pi/2)");
    }
  }
}

void check_schema(const RunConfig& c) {
  if (c.format != "csv" && c.format != "json" && c.format != "svg")
    throw ConfigError("--format must be csv, json or svg");
  if (!c.problem.empty() && c.problem != "rr" && c.problem != "pm") throw ConfigError("--problem must be rr or pm");
  if (c.nx < 4 || c.ny < 4) throw ConfigError("--grid needs at least 4x4 cells");
  if (!(c.tol > 0)) throw ConfigError("--tol must be positive");
  if (c.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (c.samples < 3) throw ConfigError("--samples must be >= 3");
  if (c.refine_levels < 1 || c.refine_levels > 4) throw ConfigError("--refine-levels must lie in [1, 4]");
  if (c.sonic_ref != "local" && c.sonic_ref != "upstream") throw ConfigError("--sonic-ref must be local or upstream");
  if (c.sweep) {
    static const std::vector<std::string> vars{"gamma", "rho0", "rho1", "u_inf", "rho_inf", "theta_w", "theta_w_deg"};
    if (std::find(vars.begin(), vars.end(), c.sweep->var) == vars.end())
      throw ConfigError("unknown sweep variable '" + c.sweep->var + "'");
    if (c.sweep->n < 0) throw ConfigError("sweep point count must be >= 0");
  }
}

std::vector<RunConfig> expand(const RunConfig& c) {
  if (!c.sweep) return {c};
  std::vector<RunConfig> pts;
  const auto& s = *c.sweep;
  for (int i = 0; i < s.n; ++i) {
    const double v = s.n == 1 ? s.lo : s.lo + (s.hi - s.lo) * i / (s.n - 1);
    RunConfig p = c;
    if (s.var == "gamma") p.gas_gamma = v;
    else if (s.var == "rho0") p.rho0 = v;
    else if (s.var == "rho1") p.rho1 = v;
    else if (s.var == "u_inf") p.u_inf = v;
    else if (s.var == "rho_inf") p.rho_inf = v;
    else if (s.var == "theta_w") p.theta_w = v;
    else p.theta_w = v * deg;
    pts.push_back(p);
  }
  return pts;
}

double sweep_value(const RunConfig& p, const std::string& var) {
  if (var == "gamma") return p.gas_gamma;
  if (var == "rho0") return p.rho0;
  if (var == "rho1") return p.rho1;
  if (var == "u_inf") return p.u_inf;
  if (var == "rho_inf") return p.rho_inf;
  if (var == "theta_w") return p.theta_w.value_or(NAN);
  return p.theta_w.value_or(NAN) / deg;
}

// Output sink: a file under --out, or the given stream.
class Sink {
 public:
  Sink(const RunConfig& c, const std::string& name, std::ostream& fallback) {
    if (c.out.empty()) {
      os_ = &fallback;
      return;
    }
    fs::create_directories(c.out);
    file_.open(fs::path(c.out) / name);
    if (!file_) throw ConfigError("cannot write " + (fs::path(c.out) / name).string());
    os_ = &file_;
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

std::ofstream open_in(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw ConfigError("cannot write " + (dir / name).string());
  return f;
}

json state_json(const UniformState& s) { return {{"u", s.u}, {"v", s.v}, {"k", s.k}, {"rho", s.rho}}; }

json envelope(const RunConfig& c) { return {{"version", version}, {"config", c.to_json()}}; }

// ---------------------------------------------------------------- angles

struct AngleRow {
  std::vector<double> values;
  std::string status = "ok";
  int code = exit_ok;
};

int cmd_angles(const RunConfig& c, std::ostream& out) {
  const bool pm = problem_of(c) == "pm";
  const auto pts = expand(c);
  std::vector<AngleRow> rows(pts.size());
  parallel_for(static_cast<int>(pts.size()), c.jobs, [&](int i) {
    const auto& p = pts[i];
    auto& r = rows[i];
    try {
      check_physics(p, false);
      const auto gas = gas_of(p);
      if (pm) {
        const auto a = local::pm_angles(gas, p.u_inf, p.rho_inf,
                                        p.sonic_ref == "upstream" ? local::SonicReference::upstream
                                                                  : local::SonicReference::local);
        r.values = {p.gas_gamma, p.u_inf, p.rho_inf, p.u_inf / gas.sound_speed(p.rho_inf), a.detachment, a.sonic};
      } else {
        const auto a = local::critical_angles(gas, p.rho0, p.rho1);
        const double u1 = jump::incident_velocity(gas, p.rho0, p.rho1), c1 = gas.sound_speed(p.rho1);
        r.values = {p.gas_gamma, p.rho0, p.rho1, a.detachment, a.sonic, a.diffraction_critical.value_or(NAN),
                    u1, c1, u1 <= c1 ? 1.0 : 0.0};
      }
    } catch (const std::exception& e) {
      r.code = exit_code_for(e);
      r.status = std::string(tag_for(r.code)) + ": " + e.what();
      r.values.assign(pm ? 6 : 9, NAN);
      if (pm) r.values[0] = p.gas_gamma, r.values[1] = p.u_inf, r.values[2] = p.rho_inf;
      else r.values[0] = p.gas_gamma, r.values[1] = p.rho0, r.values[2] = p.rho1;
    }
  });
  const std::vector<std::string> cols =
      pm ? std::vector<std::string>{"gamma", "u_inf", "rho_inf", "mach_inf", "theta_detach", "theta_sonic", "status"}
         : std::vector<std::string>{"gamma", "rho0", "rho1", "theta_detach", "theta_sonic", "theta_critical",
                                    "u1", "c1", "u1_le_c1", "status"};
  int worst = exit_ok;
  for (const auto& r : rows) worst = std::max(worst, r.code);

  if (c.format == "csv") {
    Sink s(c, "angles.csv", out);
    CsvWriter w(*s, c.to_json(), cols);
    for (const auto& r : rows) {
      std::vector<std::string> cells;
      for (std::size_t k = 0; k < r.values.size(); ++k)
        cells.push_back(!pm && k == 8 && !std::isnan(r.values[k]) ? (r.values[k] > 0 ? "1" : "0") : fmt(r.values[k]));
      cells.push_back(r.status);
      w.row(cells);
    }
  } else if (c.format == "json") {
    json j = envelope(c);
    j["columns"] = cols;
    j["rows"] = json::array();
    for (const auto& r : rows) {
      json row;
      for (std::size_t k = 0; k < r.values.size(); ++k) row[cols[k]] = r.values[k];
      row["status"] = r.status;
      j["rows"].push_back(row);
    }
    Sink s(c, "angles.json", out);
    write_json(*s, j);
  } else {
    const std::string xvar = c.sweep ? c.sweep->var : "point";
    SvgPlot plot("Transition angles", xvar, "angle [deg]");
    std::vector<Vec2> d, so, cr;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double x = c.sweep ? sweep_value(pts[i], xvar) : static_cast<double>(i);
      const auto& v = rows[i].values;
      d.push_back({x, v[pm ? 4 : 3] / deg});
      so.push_back({x, v[pm ? 5 : 4] / deg});
      if (!pm) cr.push_back({x, v[5] / deg});
    }
    plot.polyline(d, "#1f77b4", "detachment");
    plot.polyline(so, "#d62728", "sonic");
    if (!pm) plot.polyline(cr, "#2ca02c", "diffraction critical", true);
    Sink s(c, "angles.svg", out);
    plot.write(*s, c.to_json());
  }
  return worst;
}

// ---------------------------------------------------------------- polar

int cmd_polar(RunConfig c, std::ostream& out) {
  c.problem = "pm";
  check_physics(c, false);
  const auto gas = gas_of(c);
  const auto curve = local::steady_shock_polar(gas, c.u_inf, c.rho_inf, c.samples);
  const auto ang = local::pm_angles(gas, c.u_inf, c.rho_inf,
                                    c.sonic_ref == "upstream" ? local::SonicReference::upstream
                                                              : local::SonicReference::local);
  struct Overlay {
    double theta;
    std::optional<local::PmStates> st;
  };
  std::vector<Overlay> ov;
  for (double t : c.overlay_deg) {
    Overlay o{t * deg, std::nullopt};
    if (o.theta > 0 && o.theta <= ang.detachment) o.st = local::pm_states(gas, c.u_inf, c.rho_inf, o.theta);
    ov.push_back(o);
  }
  const auto dpt = local::polar_point(gas, c.u_inf, c.rho_inf, ang.beta_detachment);
  if (c.format == "csv") {
    Sink s(c, "polar.csv", out);
    CsvWriter w(*s, c.to_json(), {"beta", "u", "v", "rho", "residual"});
    for (const auto& p : curve.samples)
      w.row({fmt(p.beta), fmt(p.u), fmt(p.v), fmt(p.rho), fmt(local::polar_residuals(gas, c.u_inf, c.rho_inf, p).max_abs())});
  } else if (c.format == "json") {
    json j = envelope(c);
    j["mach_angle"] = curve.mach_angle;
    j["angles"] = {{"theta_sonic", ang.sonic}, {"theta_detach", ang.detachment}, {"beta_sonic", ang.beta_sonic},
                   {"beta_detach", ang.beta_detachment}};
    j["samples"] = json::array();
    for (const auto& p : curve.samples) j["samples"].push_back({p.beta, p.u, p.v, p.rho});
    j["overlays"] = json::array();
    for (const auto& o : ov) {
      json e{{"theta_w", o.theta}};
      if (o.st) {
        e["weak"] = {o.st->weak_polar.u, o.st->weak_polar.v};
        e["strong"] = {o.st->strong_polar.u, o.st->strong_polar.v};
      } else {
        e["status"] = "detached";
      }
      j["overlays"].push_back(e);
    }
    Sink s(c, "polar.json", out);
    write_json(*s, j);
  } else {
    SvgPlot plot("Steady shock polar", "u", "v");
    plot.equal_aspect();
    std::vector<Vec2> upper, lower;
    for (const auto& p : curve.samples) upper.push_back({p.u, p.v}), lower.push_back({p.u, -p.v});
    std::reverse(lower.begin(), lower.end());
    upper.insert(upper.begin(), lower.begin(), lower.end());
    plot.polyline(upper, "black", "polar");
    const double r = 1.05 * c.u_inf;
    plot.polyline({{0, 0}, {r * std::cos(ang.detachment), r * std::sin(ang.detachment)}}, "#d62728", "tangent (detachment)", true);
    plot.marker({dpt.u, dpt.v}, "#d62728", "");
    for (const auto& o : ov) {
      plot.polyline({{0, 0}, {r * std::cos(o.theta), r * std::sin(o.theta)}}, "#1f77b4", "", true);
      if (o.st) {
        plot.marker({o.st->weak_polar.u, o.st->weak_polar.v}, "#1f77b4", "");
        plot.marker({o.st->strong_polar.u, o.st->strong_polar.v}, "#ff7f0e", "");
      }
    }
    if (!ov.empty()) plot.marker({NAN, NAN}, "#1f77b4", "weak state");
    Sink s(c, "polar.svg", out);
    plot.write(*s, c.to_json());
  }
  return exit_ok;
}

// ---------------------------------------------------------------- reflect / pm

json residual_json(const local::State2Residuals& r) {
  return {{"slip", r.slip}, {"phi_jump", r.phi_jump}, {"flux_jump", r.flux_jump}, {"bernoulli", r.bernoulli}};
}

json reflect_point(const RunConfig& p) {
  check_physics(p, true);
  const auto gas = gas_of(p);
  json j{{"input", {{"gamma", p.gas_gamma}, {"rho0", p.rho0}, {"rho1", p.rho1}, {"theta_w", *p.theta_w}}}};
  const auto inc = jump::incident_shock(gas, p.rho0, p.rho1);
  j["incident"] = {{"u1", inc.u1}, {"xi0", inc.xi0}, {"rho_c", inc.rho_c ? json(*inc.rho_c) : json(nullptr)}};
  if (*p.theta_w == pi / 2) {
    const auto nr = local::solve_normal_reflection(gas, p.rho0, p.rho1);
    j["classification"] = "normal";
    j["normal"] = {{"rho2", nr.rho2}, {"xi_bar", nr.xi_bar}, {"state2", state_json(nr.state2)}};
    return j;
  }
  const auto loc = local::state2_regular_reflection(gas, p.rho0, p.rho1, *p.theta_w);
  j["p0"] = {loc.p0.x, loc.p0.y};
  j["classification"] = local::to_string(loc.classification);
  j["weak_ratio"] = loc.weak_ratio;
  j["tangent"] = loc.tangent;
  for (const auto& [name, st] : {std::pair{"weak", loc.weak}, std::pair{"strong", loc.strong}}) {
    if (!st) continue;
    auto e = state_json(*st);
    e["residuals"] = residual_json(local::state2_residuals(gas, loc.incident, *p.theta_w, *st));
    e["ratio"] = norm(st->grad(loc.p0)) / gas.sound_speed(st->rho);
    j[name] = e;
  }
  return j;
}

json pm_point(const RunConfig& p) {
  check_physics(p, true);
  const auto gas = gas_of(p);
  json j{{"input", {{"gamma", p.gas_gamma}, {"u_inf", p.u_inf}, {"rho_inf", p.rho_inf}, {"theta_w", *p.theta_w}}}};
  const auto ang = local::pm_angles(gas, p.u_inf, p.rho_inf);
  j["angles"] = {{"theta_sonic", ang.sonic}, {"theta_detach", ang.detachment}};
  if (*p.theta_w > ang.detachment) {
    j["classification"] = "detached";
    return j;
  }
  const auto st = local::pm_states(gas, p.u_inf, p.rho_inf, *p.theta_w);
  const double ratio = norm(st.weak.velocity()) / gas.sound_speed(st.weak.rho);
  j["classification"] = ratio > 1 ? "supersonic" : (ratio < 1 ? "subsonic" : "sonic");
  j["weak_ratio"] = ratio;
  j["tangent"] = st.tangent;
  auto polar = [&](const local::PolarSample& s) {
    const auto r = local::polar_residuals(gas, p.u_inf, p.rho_inf, s);
    return json{{"beta", s.beta}, {"u", s.u}, {"v", s.v}, {"rho", s.rho},
                {"residuals", {{"tangential", r.tangential}, {"mass", r.mass}, {"bernoulli", r.bernoulli}}}};
  };
  j["weak"] = polar(st.weak_polar);
  j["strong"] = polar(st.strong_polar);
  j["state0"] = state_json(st.weak);
  j["state1"] = state_json(st.state1);
  j["s1_offset"] = st.s1_offset;
  return j;
}

int cmd_local(const RunConfig& c, std::ostream& out, bool pm) {
  const auto pts = expand(c);
  std::vector<json> res(pts.size());
  std::vector<int> codes(pts.size(), exit_ok);
  parallel_for(static_cast<int>(pts.size()), c.jobs, [&](int i) {
    try {
      res[i] = pm ? pm_point(pts[i]) : reflect_point(pts[i]);
      res[i]["status"] = "ok";
    } catch (const std::exception& e) {
      codes[i] = exit_code_for(e);
      res[i] = {{"status", std::string(tag_for(codes[i])) + ": " + e.what()}};
    }
  });
  int worst = exit_ok;
  for (int k : codes) worst = std::max(worst, k);
  const std::string name = pm ? "pm" : "reflect";
  if (c.format == "csv") {
    Sink s(c, name + ".csv", out);
    CsvWriter w(*s, c.to_json(), {"theta_w", "classification", "rho_weak", "rho_strong", "weak_ratio", "status"});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& r = res[i];
      auto num = [&](const char* k) {
        if (r.contains(k) && r[k].contains("rho")) return fmt(r[k]["rho"].get<double>());
        return std::string("nan");
      };
      w.row({fmt(pts[i].theta_w.value_or(NAN)), r.value("classification", ""), num("weak"), num("strong"),
             r.contains("weak_ratio") ? fmt(r["weak_ratio"].get<double>()) : "nan", r["status"].get<std::string>()});
    }
  } else {
    json j = envelope(c);
    j["results"] = res;
    Sink s(c, name + ".json", out);
    write_json(*s, j);
  }
  return worst;
}

// ---------------------------------------------------------------- solve

fb::FreeBoundaryProblem make_problem(const RunConfig& p) {
  const auto gas = gas_of(p);
  return problem_of(p) == "pm" ? fb::prandtl_meyer_problem(gas, p.u_inf, p.rho_inf, *p.theta_w)
                               : fb::regular_reflection_problem(gas, p.rho0, p.rho1, *p.theta_w);
}

fb::SolverConfig solver_config(const RunConfig& p) {
  fb::SolverConfig s;
  s.nx = p.nx;
  s.ny = p.ny;
  s.tol_pde = s.tol_shock = p.tol;
  s.relax = p.relax;
  s.delta_cutoff = p.delta_cutoff;
  s.max_outer = p.max_outer;
  s.validate();
  return s;
}

json diagnostics_json(const fb::Diagnostics& d) {
  return {{"pde_residual_inf", d.pde_residual_inf},
          {"rh_phi_residual_inf", d.rh_phi_residual_inf},
          {"rh_flux_residual_inf", d.rh_flux_residual_inf},
          {"ellipticity_min_margin", d.ellipticity_min_margin},
          {"bounds_violation", d.bounds_violation},
          {"monotonicity_violation", d.monotonicity_violation},
          {"sonic_gradient_mismatch", d.sonic_gradient_mismatch},
          {"cutoff_active_nodes", d.cutoff_active_nodes},
          {"cutoff_confined", d.cutoff_confined},
          {"outer_iterations", d.outer_iterations},
          {"shock_displacement", d.shock_displacement}};
}

void write_solution(const RunConfig& p, const fb::Solution& s, bool converged, const std::string& message,
                    const fs::path& dir) {
  const json cj = p.to_json();
  {
    auto f = open_in(dir, "field.csv");
    write_field_csv(f, s.field, cj);
  }
  {
    auto f = open_in(dir, "shock.csv");
    write_shock_csv(f, s.shock, cj);
  }
  {
    auto f = open_in(dir, "field.vts");
    std::vector<double> cut(s.field.cutoff_active.begin(), s.field.cutoff_active.end());
    write_field_vts(f, s.field.grid, {{"phi", s.field.phi}, {"rho", s.field.rho}, {"mach_ratio", s.field.ratio},
                                      {"cutoff_active", cut}}, cj);
  }
  json d = envelope(p);
  d["converged"] = converged;
  d["message"] = message;
  d["diagnostics"] = diagnostics_json(s.diagnostics);
  d["displacement_history"] = s.displacement_history;
  {
    auto f = open_in(dir, "diagnostics.json");
    write_json(f, d);
  }
  // machine-readable artifact for check-euler
  json a = envelope(p);
  a["converged"] = converged;
  a["grid"] = {s.field.grid.nx, s.field.grid.ny};
  a["shock"] = {{"center", {s.shock.center.x, s.shock.center.y}}, {"angles", s.shock.angles}, {"radii", s.shock.radii}};
  a["phi"] = s.field.phi;
  a["diagnostics"] = diagnostics_json(s.diagnostics);
  {
    auto f = open_in(dir, "solution.json");
    write_json(f, a, 0);
  }
  if (p.format == "svg") {
    SvgPlot plot("Free-boundary solution", "xi", "eta");
    plot.equal_aspect();
    const auto& g = s.field.grid;
    std::vector<Vec2> wall, side0, side1;
    for (int j = 0; j <= g.ny; ++j) wall.push_back(g.at(g.nx, j));
    for (int i = 0; i <= g.nx; ++i) side0.push_back(g.at(i, 0)), side1.push_back(g.at(i, g.ny));
    plot.polyline(s.shock.vertices(), "#d62728", "curved shock");
    plot.polyline(side1, "#1f77b4", "sonic arc");
    plot.polyline(side0, s.problem.side0 == fb::SideKind::dirichlet ? "#1f77b4" : "#7f7f7f",
                  s.problem.side0 == fb::SideKind::dirichlet ? "" : "symmetry");
    plot.polyline(wall, "black", "wall");
    if (s.problem.straight_shock_points.size() >= 2)
      plot.polyline(s.problem.straight_shock_points, "#d62728", "straight shock", true);
    auto f = open_in(dir, "domain.svg");
    plot.write(f, cj);
  }
}

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto pts = expand(c);
  const fs::path root = c.out.empty() ? fs::path(".") : fs::path(c.out);
  std::vector<int> codes(pts.size(), exit_ok);
  std::vector<json> summaries(pts.size());
  std::vector<std::string> errors(pts.size());
  parallel_for(static_cast<int>(pts.size()), c.jobs, [&](int i) {
    const auto& p = pts[i];
    const fs::path dir = pts.size() > 1 ? root / ("point_" + std::to_string(i)) : root;
    json summary{{"point", i}};
    try {
      check_physics(p, true);
      const auto prob = make_problem(p);
      std::vector<fb::Solution> levels;
      for (int l = 0; l < p.refine_levels; ++l) {
        RunConfig pl = p;
        pl.nx = p.nx << l;
        pl.ny = p.ny << l;
        const fs::path ldir = p.refine_levels > 1 ? dir / ("grid_" + std::to_string(pl.nx) + "x" + std::to_string(pl.ny)) : dir;
        try {
          levels.push_back(fb::solve(prob, solver_config(pl)));
          write_solution(pl, levels.back(), true, "converged", ldir);
        } catch (const fb::SolveFailure& e) {
          if (e.partial()) write_solution(pl, *e.partial(), false, e.what(), ldir);
          throw;
        }
      }
      summary["status"] = "ok";
      if (levels.size() > 1) {
        json conv = envelope(p);
        std::vector<double> diffs;
        for (std::size_t l = 0; l + 1 < levels.size(); ++l) diffs.push_back(fb::cauchy_difference(levels[l], levels[l + 1]));
        std::vector<double> orders;
        for (std::size_t l = 0; l + 1 < diffs.size(); ++l) orders.push_back(std::log2(diffs[l] / diffs[l + 1]));
        conv["cauchy_differences"] = diffs;
        conv["observed_orders"] = orders;
        conv["sonic_gradient_mismatch"] = json::array();
        for (const auto& s : levels) conv["sonic_gradient_mismatch"].push_back(s.diagnostics.sonic_gradient_mismatch);
        auto f = open_in(dir, "convergence.json");
        write_json(f, conv);
        summary["observed_orders"] = orders;
      }
    } catch (const std::exception& e) {
      codes[i] = exit_code_for(e);
      errors[i] = e.what();
      summary["status"] = std::string(tag_for(codes[i])) + ": " + e.what();
    }
    summaries[i] = summary;
  });
  int worst = exit_ok;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    worst = std::max(worst, codes[i]);
    if (codes[i] != exit_ok) err << "solve point " << i << ": " << errors[i] << '\n';
  }
  json j = envelope(c);
  j["points"] = summaries;
  write_json(out, j);
  return worst;
}

// ---------------------------------------------------------------- check-euler

fb::Solution load_artifact(const RunConfig& c, RunConfig& used) {
  fs::path path(c.artifact);
  if (fs::is_directory(path)) path /= "solution.json";
  std::ifstream f(path);
  if (!f) throw ConfigError("artifact not found: " + path.string());
  json a;
  try {
    f >> a;
    used = c;
    apply_config_json(used, a.at("config"));
    used.command = c.command;
    if (!a.at("converged").get<bool>()) throw PreconditionError("artifact holds a non-converged solution");
    const auto prob = make_problem(used);
    auto cfg = solver_config(used);
    fb::ShockPolyline sh = fb::initial_shock(prob, cfg.ny);
    sh.angles = a.at("shock").at("angles").get<std::vector<double>>();
    sh.radii = a.at("shock").at("radii").get<std::vector<double>>();
    const auto phi = a.at("phi").get<std::vector<double>>();
    fb::Solution s;
    s.problem = prob;
    s.config = cfg;
    s.shock = sh;
    s.field = fb::elliptic_solve(prob, sh, phi, cfg);
    s.diagnostics = fb::diagnostics_report(prob, s.field, sh, cfg);
    s.diagnostics.shock_displacement = a.at("diagnostics").at("shock_displacement").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed artifact: ") + e.what());
  }
}

int cmd_check_euler(const RunConfig& c, std::ostream& out) {
  RunConfig used = c;
  fb::Solution s;
  if (!c.artifact.empty()) {
    s = load_artifact(c, used);
  } else {
    check_physics(c, true);
    s = fb::solve(make_problem(c), solver_config(c));
  }
  const auto rep = euler::potential_consistency(s);
  json j = envelope(used);
  j["consistency"] = {{"max_vorticity", rep.max_vorticity},
                      {"max_vorticity_traced", rep.max_vorticity_traced},
                      {"max_vorticity_away_from_corner", rep.max_vorticity_regular},
                      {"max_entropy_variation", rep.max_entropy_variation},
                      {"trajectory_coverage", rep.coverage},
                      {"trajectories", rep.trajectories}};
  const auto gas = gas_of(used);
  const double rho0 = problem_of(used) == "pm" ? used.rho_inf : used.rho0;
  if (gas.isothermal()) {
    j["order_study"] = {{"status", "skipped: the energy jump needs gamma > 1"}};
  } else {
    const auto st = euler::shock_strength_order_study(gas, rho0, used.epsilons);
    j["order_study"] = {{"epsilons", st.epsilons}, {"residuals", st.residuals}, {"mass_residuals", st.mass_residuals},
                        {"slope", st.slope}, {"degenerate", st.degenerate}};
  }
  if (!c.out.empty()) {
    const json cj = used.to_json();
    auto f = open_in(c.out, "euler_field.csv");
    CsvWriter w(f, cj, {"i", "j", "xi", "eta", "vorticity", "entropy_variation"});
    const auto& g = s.field.grid;
    for (int i = 0; i <= g.nx; ++i)
      for (int jj = 0; jj <= g.ny; ++jj) {
        const auto k = g.index(i, jj);
        w.row({std::to_string(i), std::to_string(jj), fmt(g.nodes[k].x), fmt(g.nodes[k].y), fmt(rep.vorticity[k]),
               fmt(rep.entropy_variation[k])});
      }
    auto v = open_in(c.out, "euler_field.vts");
    write_field_vts(v, g, {{"vorticity", rep.vorticity}, {"entropy_variation", rep.entropy_variation}}, cj);
  }
  Sink sink(used, "euler.json", out);
  write_json(*sink, j);
  return exit_ok;
}

}  // namespace

// ---------------------------------------------------------------- config

json RunConfig::to_json() const {
  json j{{"command", command},
         {"problem", problem.empty() ? json(nullptr) : json(problem)},
         {"gas_gamma", gas_gamma},
         {"rho0", rho0},
         {"rho1", rho1},
         {"u_inf", u_inf},
         {"rho_inf", rho_inf},
         {"theta_w", theta_w ? json(*theta_w) : json(nullptr)},
         {"grid", std::to_string(nx) + "x" + std::to_string(ny)},
         {"tol", tol},
         {"relax", relax},
         {"delta_cutoff", delta_cutoff},
         {"max_outer", max_outer},
         {"format", format},
         {"jobs", jobs},
         {"sonic_ref", sonic_ref},
         {"samples", samples},
         {"overlay_deg", overlay_deg},
         {"refine_levels", refine_levels},
         {"epsilons", epsilons}};
  if (sweep)
    j["sweep"] = sweep->var + ":" + fmt(sweep->lo) + ":" + fmt(sweep->hi) + ":" + std::to_string(sweep->n);
  if (!artifact.empty()) j["artifact"] = artifact;
  return j;
}

Sweep parse_sweep(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 4) throw ConfigError("--sweep expects var:lo:hi:n, got '" + s + "'");
  try {
    std::size_t used = 0;
    Sweep w{parts[0], std::stod(parts[1]), std::stod(parts[2]), std::stoi(parts[3], &used)};
    if (used != parts[3].size()) throw std::invalid_argument("n");
    return w;
  } catch (const std::logic_error&) {
    throw ConfigError("--sweep expects numeric lo:hi:n, got '" + s + "'");
  }
}

namespace {

void parse_grid(const std::string& s, int& nx, int& ny) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("grid");
    std::size_t a = 0, b = 0;
    nx = std::stoi(s.substr(0, x), &a);
    ny = std::stoi(s.substr(x + 1), &b);
    if (a != x || b != s.size() - x - 1) throw std::invalid_argument("grid");
  } catch (const std::logic_error&) {
    throw ConfigError("--grid expects NXxNY, e.g. 64x64, got '" + s + "'");
  }
}

}  // namespace

void apply_config_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    try {
      if (v.is_null()) continue;
      if (k == "command") continue;  // informational when re-reading our own output
      else if (k == "problem") c.problem = v.get<std::string>();
      else if (k == "gas_gamma") c.gas_gamma = v.get<double>();
      else if (k == "rho0") c.rho0 = v.get<double>();
      else if (k == "rho1") c.rho1 = v.get<double>();
      else if (k == "u_inf") c.u_inf = v.get<double>();
      else if (k == "rho_inf") c.rho_inf = v.get<double>();
      else if (k == "theta_w") c.theta_w = v.get<double>();
      else if (k == "theta_w_deg") c.theta_w = v.get<double>() * deg;
      else if (k == "sweep") c.sweep = parse_sweep(v.get<std::string>());
      else if (k == "grid") parse_grid(v.get<std::string>(), c.nx, c.ny);
      else if (k == "tol") c.tol = v.get<double>();
      else if (k == "relax") c.relax = v.get<double>();
      else if (k == "delta_cutoff") c.delta_cutoff = v.get<double>();
      else if (k == "max_outer") c.max_outer = v.get<int>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "format") c.format = v.get<std::string>();
      else if (k == "jobs") c.jobs = v.get<int>();
      else if (k == "sonic_ref") c.sonic_ref = v.get<std::string>();
      else if (k == "samples") c.samples = v.get<int>();
      else if (k == "overlay_deg") c.overlay_deg = v.get<std::vector<double>>();
      else if (k == "refine_levels") c.refine_levels = v.get<int>();
      else if (k == "epsilons") c.epsilons = v.get<std::vector<double>>();
      else if (k == "artifact") c.artifact = v.get<std::string>();
      else throw ConfigError("unknown config key '" + k + "'");
    } catch (const json::exception&) {
      throw ConfigError("config key '" + k + "' has the wrong type");
    }
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-similar potential-flow shock reflection toolkit"};
  app.set_version_flag("--version", std::string("ssflow ") + version);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, problem, sweep, grid, out_dir, format, sonic_ref, artifact;
  double gamma = 0, rho0 = 0, rho1 = 0, u_inf = 0, rho_inf = 0, theta = 0, theta_deg = 0, tol = 0, relax = 0,
         delta_cutoff = 0;
  int jobs = 0, samples = 0, refine = 0, max_outer = 0;
  std::vector<double> overlay, epsilons;

  auto* o_config = app.add_option("--config", config_path, "JSON config file (flags override it)");
  auto* o_problem = app.add_option("--problem", problem, "rr (wedge reflection) or pm (ramp)");
  auto* o_gamma = app.add_option("--gas-gamma", gamma, "adiabatic exponent (1 = isothermal)");
  auto* o_rho0 = app.add_option("--rho0", rho0, "density ahead of the incident shock");
  auto* o_rho1 = app.add_option("--rho1", rho1, "density behind the incident shock");
  auto* o_uinf = app.add_option("--u-inf", u_inf, "ramp inflow speed");
  auto* o_rhoinf = app.add_option("--rho-inf", rho_inf, "ramp inflow density");
  auto* o_theta = app.add_option("--theta-w", theta, "wedge/ramp angle [rad]");
  auto* o_theta_deg = app.add_option("--theta-w-deg", theta_deg, "wedge/ramp angle [deg]")->excludes(o_theta);
  auto* o_sweep = app.add_option("--sweep", sweep, "var:lo:hi:n, var in gamma|rho0|rho1|u_inf|rho_inf|theta_w|theta_w_deg");
  auto* o_grid = app.add_option("--grid", grid, "solver grid NXxNY");
  auto* o_tol = app.add_option("--tol", tol, "PDE and shock tolerance");
  auto* o_relax = app.add_option("--relax", relax, "shock update relaxation in (0, 1]");
  auto* o_cut = app.add_option("--delta-cutoff", delta_cutoff, "ellipticity cutoff strength");
  auto* o_maxouter = app.add_option("--max-outer", max_outer, "outer iteration cap");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_format = app.add_option("--format", format, "csv | json | svg");
  auto* o_jobs = app.add_option("--jobs", jobs, "concurrent sweep points");
  auto* o_sonic = app.add_option("--sonic-ref", sonic_ref, "ramp sonic criterion: local | upstream");
  auto* o_samples = app.add_option("--samples", samples, "polar samples");
  auto* o_overlay = app.add_option("--overlay-deg", overlay, "ramp angles to overlay on the polar [deg]");
  auto* o_refine = app.add_option("--refine-levels", refine, "solve on 1..4 successively doubled grids");
  auto* o_eps = app.add_option("--epsilons", epsilons, "shock strengths for the order study");
  auto* o_artifact = app.add_option("--artifact", artifact, "solution.json (or its directory) from a solve run");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"angles", "detachment/sonic/critical angles, optionally over a sweep"},
      {"polar", "steady shock polar with overlays"},
      {"reflect", "state (2) at the reflection point"},
      {"pm", "Prandtl-Meyer weak/strong states"},
      {"solve", "free-boundary solve with field, shock and diagnostics export"},
      {"check-euler", "full Euler consistency residuals and shock-strength order study"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_config;
  }

  RunConfig c;
  try {
    c.command = app.get_subcommands().front()->get_name();
    if (o_config->count()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config file " + config_path);
      json j;
      try {
        f >> j;
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
      }
      apply_config_json(c, j);
    }
    if (o_problem->count()) c.problem = problem;
    if (o_gamma->count()) c.gas_gamma = gamma;
    if (o_rho0->count()) c.rho0 = rho0;
    if (o_rho1->count()) c.rho1 = rho1;
    if (o_uinf->count()) c.u_inf = u_inf;
    if (o_rhoinf->count()) c.rho_inf = rho_inf;
    if (o_theta->count()) c.theta_w = theta;
    if (o_theta_deg->count()) c.theta_w = theta_deg * deg;
    if (o_sweep->count()) c.sweep = parse_sweep(sweep);
    if (o_grid->count()) parse_grid(grid, c.nx, c.ny);
    if (o_tol->count()) c.tol = tol;
    if (o_relax->count()) c.relax = relax;
    if (o_cut->count()) c.delta_cutoff = delta_cutoff;
    if (o_maxouter->count()) c.max_outer = max_outer;
    if (o_out->count()) c.out = out_dir;
    if (o_format->count()) c.format = format;
    if (o_jobs->count()) c.jobs = jobs;
    if (o_sonic->count()) c.sonic_ref = sonic_ref;
    if (o_samples->count()) c.samples = samples;
    if (o_overlay->count()) c.overlay_deg = overlay;
    if (o_refine->count()) c.refine_levels = refine;
    if (o_eps->count()) c.epsilons = epsilons;
    if (o_artifact->count()) c.artifact = artifact;
    if (c.problem.empty() && (o_uinf->count() || o_rhoinf->count() || c.command == "pm" || c.command == "polar"))
      c.problem = "pm";
    if (c.command == "reflect") c.problem = "rr";
    check_schema(c);

    if (c.command == "angles") return cmd_angles(c, out);
    if (c.command == "polar") return cmd_polar(c, out);
    if (c.command == "reflect") return cmd_local(c, out, false);
    if (c.command == "pm") return cmd_local(c, out, true);
    if (c.command == "solve") return cmd_solve(c, out, err);
    return cmd_check_euler(c, out);
  } catch (const std::exception& e) {
    err << "ssflow " << c.command << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace ssflow::cli
