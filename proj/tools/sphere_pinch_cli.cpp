// Command-line front end: spectrum, curvature, volume, distance, gh, phi,
// sweep and validate reports as CSV or JSON.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sphere_pinch/sphere_pinch.hpp>

namespace sp = sphere_pinch;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3, kValidationFailure = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string sweep_command = "spectrum";
  std::string family = "round";
  int n = 3;
  std::vector<long long> k;
  int N = 2000;
  int resolution = 64;
  double lmax = 20.0;
  std::string output = "-";
  std::string format = "csv";
  std::uint64_t seed = 12345;
  std::string profile;
  std::string export_profile;
  int grid_points = 4000;
  double bound = -1.0;  // negative: use n - 1
  int quad_points = 4000;
  std::vector<int> sample{6, 6, 6};
  std::vector<double> x, y;
  bool matrix = false;
  bool richardson = true;
};

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  if (c.command == "sweep") j["sweep_command"] = c.sweep_command;
  j["family"] = c.family;
  j["n"] = c.n;
  j["k"] = c.k;
  j["N"] = c.N;
  j["resolution"] = c.resolution;
  j["lmax"] = c.lmax;
  j["format"] = c.format;
  j["seed"] = c.seed;
  j["profile"] = c.profile;
  j["grid_points"] = c.grid_points;
  j["bound"] = c.bound;
  j["quad_points"] = c.quad_points;
  j["sample"] = c.sample;
  j["x"] = c.x;
  j["y"] = c.y;
  j["matrix"] = c.matrix;
  j["richardson"] = c.richardson;
  return j;
}

// --- reports ---------------------------------------------------------------

using Cell = std::variant<double, long long, std::string>;

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json summary = json::object();
  bool validation_failed = false;
};

std::string fmt17(double v) {
  if (v == 0.0) v = 0.0;  // print -0 as 0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt17(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_report(std::ostream& os, const RunConfig& cfg, const Report& rep) {
  if (cfg.format == "json") {
    json j;
    j["schema"] = 1;
    j["version"] = sp::kVersion;
    j["timestamp"] = timestamp();
    j["config"] = config_json(cfg);
    j["summary"] = rep.summary;
    json rows = json::array();
    for (const auto& r : rep.rows) {
      json row;
      for (std::size_t i = 0; i < rep.columns.size(); ++i) row[rep.columns[i]] = cell_json(r[i]);
      rows.push_back(row);
    }
    j["rows"] = rows;
    os << j.dump(2) << "\n";
    return;
  }
  os << "# sphere-pinch " << sp::kVersion << "\n";
  os << "# config " << config_json(cfg).dump() << "\n";
  os << "# timestamp " << timestamp() << "\n";
  for (std::size_t i = 0; i < rep.columns.size(); ++i) os << (i ? "," : "") << rep.columns[i];
  os << "\n";
  for (const auto& r : rep.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
    os << "\n";
  }
}

// --- commands --------------------------------------------------------------

long long single_k(const RunConfig& c) {
  if (c.family != "pinch") return 0;
  if (c.k.size() != 1) throw ConfigError("family=pinch needs exactly one k (use sweep for a list)");
  return c.k.front();
}

sp::WarpedSphereMetric make_metric(const RunConfig& c) {
  if (c.family == "round") return sp::make_round_sphere(c.n);
  if (c.family == "pinch") return sp::make_pinch_family(c.n, single_k(c));
  if (c.family == "profile") {
    if (c.profile.empty()) throw ConfigError("family=profile needs --profile <path>");
    std::ifstream in(c.profile);
    if (!in) throw ConfigError("cannot open profile '" + c.profile + "'");
    return sp::read_profile(in);
  }
  throw ConfigError("unknown family '" + c.family + "' (round|pinch|profile)");
}

Report run_spectrum(const RunConfig& c, const sp::WarpedSphereMetric& m) {
  const auto res = sp::merged_spectrum(m, sp::SpectrumOptions{c.lmax, c.N, c.richardson});
  Report rep;
  rep.columns = {"lambda", "lambda_raw", "multiplicity", "m", "l", "radial_index"};
  for (const auto& e : res.entries)
    rep.rows.push_back({e.best(), e.lambda, static_cast<long long>(e.multiplicity),
                        static_cast<long long>(e.mode.m), static_cast<long long>(e.mode.l),
                        static_cast<long long>(e.index)});
  const auto all = res.expanded();
  for (std::size_t i = 1; i < all.size() && i <= 4; ++i)
    rep.summary["lambda_" + std::to_string(i)] = all[i];
  return rep;
}

Report run_curvature(const RunConfig& c, const sp::WarpedSphereMetric& m) {
  const double bound = c.bound < 0 ? m.n - 1.0 : c.bound;
  const auto check = sp::check_lower_bound(m, bound, c.grid_points);
  Report rep;
  rep.columns = {"r", "ric_r", "ric_u", "ric_v"};
  for (double r : sp::ricci_scan_grid(m, c.grid_points)) {
    const auto f = sp::ricci_frame(m, r);
    rep.rows.push_back({r, f.ric_r, f.ric_u, f.ric_v});
  }
  rep.summary["ric_min"] = check.worst.value;
  rep.summary["ric_min_r"] = check.worst.r;
  rep.summary["ric_min_direction"] = std::string(1, sp::direction_code(check.worst.direction));
  rep.summary["bound"] = bound;
  rep.summary["bound_passed"] = check.passed;
  return rep;
}

Report run_volume(const RunConfig& c, const sp::WarpedSphereMetric& m) {
  const double v = sp::volume(m, c.quad_points);
  const double v2 = sp::volume(m, 2 * c.quad_points);
  const double round = sp::sphere_volume(m.n);
  Report rep;
  rep.columns = {"volume", "volume_2x", "ratio_to_round"};
  rep.rows.push_back({v, v2, v / round});
  rep.summary["volume"] = v;
  rep.summary["ratio_to_round"] = v / round;
  return rep;
}

sp::ReducedPoint reduced(const std::vector<double>& v, const char* name) {
  if (v.size() != 3) throw ConfigError(std::string("--") + name + " needs r,dtheta,psi");
  return sp::ReducedPoint{v[0], v[1], v[2]};
}

Report run_distance(const RunConfig& c, const sp::WarpedSphereMetric& m) {
  Report rep;
  if (c.matrix) {
    if (c.sample.size() != 3) throw ConfigError("--sample needs radial,circle,sphere");
    const auto space = sp::sample_space(m, sp::SampleCounts{c.sample[0], c.sample[1], c.sample[2]},
                                        c.resolution);
    rep.columns = {"i", "j", "r_i", "theta_i", "r_j", "theta_j", "psi", "distance"};
    for (std::size_t i = 0; i < space.size(); ++i)
      for (std::size_t j = 0; j < space.size(); ++j) {
        const auto& p = space.points[i];
        const auto& q = space.points[j];
        rep.rows.push_back({static_cast<long long>(i), static_cast<long long>(j), p.r, p.theta, q.r,
                            q.theta, sp::sphere_angle(p.v, q.v), space(i, j)});
      }
    const auto dr = sp::diameter_radius(space);
    rep.summary["diameter"] = dr.diameter;
    rep.summary["radius"] = dr.radius;
    return rep;
  }
  const auto d = sp::distance(m, reduced(c.x, "x"), reduced(c.y, "y"), c.resolution);
  rep.columns = {"distance", "coarse_distance", "metrication_estimate"};
  rep.rows.push_back({d.distance, d.coarse_distance, d.metrication_estimate()});
  rep.summary["distance"] = d.distance;
  return rep;
}

Report run_gh(const RunConfig& c, const sp::WarpedSphereMetric& m) {
  sp::GhOptions opt;
  opt.resolution = c.resolution;
  if (c.sample.size() != 3) throw ConfigError("--sample needs radial,circle,sphere");
  opt.counts = sp::SampleCounts{c.sample[0], c.sample[1], c.sample[2]};
  const auto g = sp::gh_distortion(m, opt);
  const auto dr = sp::diameter_radius(sp::sample_space(m, opt.counts, c.resolution));
  Report rep;
  rep.columns = {"k", "resolution", "max_distortion", "covering_defect", "circle_fiber_max", "radius"};
  rep.rows.push_back({g.k, static_cast<long long>(g.resolution), g.max_distortion,
                      g.covering_defect, g.circle_fiber_max, dr.radius});
  rep.summary["k"] = g.k;
  rep.summary["resolution"] = g.resolution;
  rep.summary["max_distortion"] = g.max_distortion;
  rep.summary["covering_defect"] = g.covering_defect;
  rep.summary["circle_fiber_max"] = g.circle_fiber_max;
  rep.summary["radius"] = dr.radius;
  return rep;
}

Report run_phi(const RunConfig& c, const sp::WarpedSphereMetric& m) {
  if (c.sample.size() != 3) throw ConfigError("--sample needs radial,circle,sphere");
  const auto comps = sp::lowest_map_components(m, c.N, c.richardson);
  const auto pts = sp::structured_sample(m, sp::SampleCounts{c.sample[0], c.sample[1], c.sample[2]},
                                         c.resolution, false);
  const auto sample = sp::build_phi(m, comps, pts);
  const auto space = sp::pairwise_distances(m, pts, c.resolution);
  Report rep;
  rep.summary["h_deviation"] = sp::h_deviation(sample);
  rep.summary["max_distortion"] = sp::map_distortion(sample, space);
  rep.summary["lipschitz"] = sp::empirical_lipschitz(sample, space);
  try {
    const auto deg = sp::degree_estimate(sp::degree_grid(m, comps), c.seed);
    rep.summary["degree"] = deg.degree;
    rep.summary["degree_agreeing"] = deg.agreeing;
    rep.summary["degree_discarded"] = deg.discarded;
  } catch (const std::exception& e) {
    rep.summary["degree"] = nullptr;
    rep.summary["degree_note"] = e.what();
  }
  rep.summary["n"] = m.n;
  rep.summary["family"] = c.family;
  rep.summary["k"] = m.pinch ? m.pinch->k : 0;
  rep.columns = {"r", "theta", "psi", "h"};
  for (std::size_t p = 0; p < sample.size(); ++p) {
    const auto& x = sample.points[p];
    rep.rows.push_back({x.r, x.theta, std::atan2(x.v[1], x.v[0]), sample.h[p]});
  }
  return rep;
}

Report run_validate(const RunConfig&, const sp::WarpedSphereMetric& m) {
  Report rep;
  rep.columns = {"check", "expected", "actual", "residual", "passed"};
  bool ok = true;
  const auto closure = sp::validate_closure(m);
  for (const auto& cond : closure.conditions) {
    rep.rows.push_back({cond.name, cond.expected, cond.actual, cond.residual,
                        std::string(cond.passed ? "yes" : "no")});
    ok = ok && cond.passed;
  }
  const bool c1 = closure.max_c1_jump < 1e-10;
  rep.rows.push_back({std::string("C1 matching"), 0.0, closure.max_c1_jump, closure.max_c1_jump,
                      std::string(c1 ? "yes" : "no")});
  ok = ok && c1;
  if (m.pinch) {
    const auto id = sp::constant_identities(m.pinch->k);
    const bool b = id.blend_residual < 1e-12, e = id.eta_residual < 1e-12;
    rep.rows.push_back({std::string("eps+theta identity"), 0.0, id.blend_residual, id.blend_residual,
                        std::string(b ? "yes" : "no")});
    rep.rows.push_back({std::string("eta^2 identity"), 0.0, id.eta_residual, id.eta_residual,
                        std::string(e ? "yes" : "no")});
    ok = ok && b && e;
  }
  rep.summary["passed"] = ok;
  rep.validation_failed = !ok;
  return rep;
}

Report run_single(const RunConfig& c, const std::string& command) {
  const auto m = make_metric(c);
  if (command == "spectrum") return run_spectrum(c, m);
  if (command == "curvature") return run_curvature(c, m);
  if (command == "volume") return run_volume(c, m);
  if (command == "distance") return run_distance(c, m);
  if (command == "gh") return run_gh(c, m);
  if (command == "phi") return run_phi(c, m);
  if (command == "validate") return run_validate(c, m);
  throw ConfigError("unknown command '" + command + "'");
}

Report run_sweep(const RunConfig& c) {
  if (c.k.empty()) throw ConfigError("sweep needs --k with a comma-separated list");
  if (c.sweep_command == "sweep") throw ConfigError("sweep cannot run sweep");
  std::vector<std::optional<Report>> results(c.k.size());
  std::vector<std::string> errors(c.k.size());
  sp::parallel_for(c.k.size(), [&](std::size_t i) {
    RunConfig one = c;
    one.family = "pinch";
    one.k = {c.k[i]};
    try {
      results[i] = run_single(one, c.sweep_command);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<std::string> keys;
  for (const auto& r : results)
    if (r)
      for (const auto& [key, val] : r->summary.items())
        if (val.is_number() && std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  Report rep;
  rep.columns = {"k", "status"};
  for (const auto& key : keys) rep.columns.push_back(key);
  rep.columns.push_back("error");
  json rows = json::array();
  for (std::size_t i = 0; i < c.k.size(); ++i) {
    std::vector<Cell> row{c.k[i], std::string(results[i] ? "ok" : "failed")};
    for (const auto& key : keys) {
      if (results[i] && results[i]->summary.contains(key) && results[i]->summary[key].is_number())
        row.emplace_back(results[i]->summary[key].get<double>());
      else
        row.emplace_back(std::string(""));
    }
    row.emplace_back(errors[i]);
    rep.rows.push_back(std::move(row));
    if (results[i] && results[i]->validation_failed) rep.validation_failed = true;
  }
  rep.summary["rows"] = c.k.size();
  return rep;
}

void check_config(const RunConfig& c) {
  static const std::vector<std::string> commands{"spectrum", "curvature", "volume", "distance",
                                                 "gh",       "phi",       "sweep",  "validate"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw ConfigError("unknown command '" + c.command + "'");
  if (c.command == "sweep" &&
      std::find(commands.begin(), commands.end(), c.sweep_command) == commands.end())
    throw ConfigError("unknown sweep command '" + c.sweep_command + "'");
  if (c.n < 3 || c.n > 12) throw ConfigError("n must be in [3, 12]");
  if (c.N < 64 || c.N > 200000) throw ConfigError("N must be in [64, 200000]");
  if (c.resolution < 32 || c.resolution > 512 || c.resolution % 2)
    throw ConfigError("resolution must be even and in [32, 512]");
  if (!(c.lmax > 0) || c.lmax > 1e4) throw ConfigError("lmax must be in (0, 1e4]");
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  for (long long k : c.k)
    if (k < 2) throw ConfigError("k must be >= 2");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and metric experiments on doubly warped spheres"};
  app.set_config("--config", "", "Read key=value settings from a file (flags override)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  RunConfig cfg;
  std::string positional;
  app.add_option("cmd", positional,
                 "spectrum|curvature|volume|distance|gh|phi|sweep|validate")
      ->configurable(false);
  app.add_option("--command", cfg.sweep_command, "Command to run (inner command for sweep)");
  app.add_option("--family", cfg.family, "round|pinch|profile");
  app.add_option("--n", cfg.n, "Dimension (>= 3)");
  app.add_option("--k", cfg.k, "Pinch parameter or comma-separated list")->delimiter(',');
  app.add_option("--N", cfg.N, "Radial grid cells");
  app.add_option("--resolution", cfg.resolution, "Geodesic grid resolution");
  app.add_option("--lmax", cfg.lmax, "Spectral cutoff");
  app.add_option("--output", cfg.output, "Output path or - for stdout");
  app.add_option("--format", cfg.format, "csv|json");
  app.add_option("--seed", cfg.seed, "Seed of the degree target sampler");
  app.add_option("--profile", cfg.profile, "Profile file for family=profile");
  app.add_option("--export-profile", cfg.export_profile, "Write the metric profile to this path");
  app.add_option("--grid-points", cfg.grid_points, "Ricci scan points");
  app.add_option("--bound", cfg.bound, "Ricci lower bound (default n-1)");
  app.add_option("--quad-points", cfg.quad_points, "Volume quadrature points");
  app.add_option("--sample", cfg.sample, "Sample counts radial,circle,sphere")->delimiter(',');
  app.add_option("--x", cfg.x, "Reduced point r,dtheta,psi")->delimiter(',');
  app.add_option("--y", cfg.y, "Reduced point r,dtheta,psi")->delimiter(',');
  app.add_flag("--matrix", cfg.matrix, "distance: emit the sampled distance matrix");
  app.add_option("--richardson", cfg.richardson, "Richardson extrapolation on/off");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  if (positional.empty()) {
    cfg.command = cfg.sweep_command;
    cfg.sweep_command = "spectrum";
  } else {
    cfg.command = positional;
    if (cfg.command != "sweep") cfg.sweep_command = "spectrum";
    else cfg.family = "pinch";
  }

  try {
    check_config(cfg);
    Report rep = cfg.command == "sweep" ? run_sweep(cfg) : run_single(cfg, cfg.command);
    if (!cfg.export_profile.empty()) {
      std::ofstream out(cfg.export_profile);
      if (!out) throw ConfigError("cannot write profile '" + cfg.export_profile + "'");
      sp::write_profile(out, make_metric(cfg));
    }
    if (cfg.output == "-") {
      write_report(std::cout, cfg, rep);
    } else {
      std::ofstream out(cfg.output);
      if (!out) throw ConfigError("cannot write '" + cfg.output + "'");
      write_report(out, cfg, rep);
    }
    return rep.validation_failed ? kValidationFailure : kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sp::FormatError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sp::UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sp::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  }
}
