#include "pmaps/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pmaps/aconvex.hpp"
#include "pmaps/cylinders.hpp"
#include "pmaps/map_model.hpp"
#include "pmaps/report.hpp"
#include "pmaps/thermo.hpp"
#include "pmaps/transfer.hpp"

namespace pmaps::cli {

using nlohmann::json;

void RunConfig::check() const {
  if (cells < 16 || cells > 65536 || (cells & (cells - 1)) != 0)
    throw std::invalid_argument("--cells must be a power of two in [16, 65536]");
  if (!(s > 0.0)) throw std::invalid_argument("--s must be positive");
  if (!(tol > 0.0 && tol <= 1e-2)) throw std::invalid_argument("--tol must lie in (0, 1e-2]");
  if (max_iter < 1) throw std::invalid_argument("--max-iter must be positive");
  if (depth < 1) throw std::invalid_argument("--depth must be at least 1");
  if (n_max < 0) throw std::invalid_argument("--n-max must be non-negative");
  if (command == "pressure" || command == "report") {
    if (!(s_min > 0.0) || !(s_max >= s_min)) throw std::invalid_argument("need 0 < --s-min <= --s-max");
    if (s_steps < 1) throw std::invalid_argument("--s-steps must be at least 1");
    if (s_steps == 1 && s_max != s_min) throw std::invalid_argument("--s-steps 1 needs --s-min == --s-max");
  }
  if (format != "json" && format != "csv") throw std::invalid_argument("--format must be json or csv");
  if (emit != "density" && emit != "weights") throw std::invalid_argument("--emit must be density or weights");
}

json RunConfig::to_json() const {
  json j = {{"command", command}, {"map", map_source}, {"s", s},           {"cells", cells},
            {"tol", tol},         {"max_iter", max_iter}, {"depth", depth}, {"n_max", n_max},
            {"grid", grid},       {"format", format},     {"seed", seed}};
  if (command == "pressure" || command == "report") {
    j["s_min"] = s_min;
    j["s_max"] = s_max;
    j["s_steps"] = s_steps;
  }
  if (!out.empty()) j["out"] = out;
  return j;
}

std::vector<double> RunConfig::s_grid() const {
  std::vector<double> g;
  if (s_steps == 1) return {s_min};
  for (int i = 0; i < s_steps; ++i) g.push_back(s_min + (s_max - s_min) * i / (s_steps - 1));
  return g;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  RunConfig cfg;
  PiecewiseMap T;
  std::ostream& out;
  std::ostream& err;

  json header() const {
    return {{"schema", 1}, {"config", cfg.to_json()}, {"map_hash", T.content_hash()}};
  }

  void emit(const std::string& text, const std::string& path) const {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw IoError("write to " + path + " failed");
  }
  void emit(const std::string& text) const { emit(text, cfg.out); }
  void emit(const json& doc) const { emit(doc.dump(2) + "\n"); }

  SpectralOptions spectral() const { return {cfg.cells, cfg.tol, cfg.max_iter}; }

  int n_max(const ValidationReport& v) const {
    if (cfg.n_max > 0) return cfg.n_max;
    return v.beta_type.type == BetaType::indifferent ? 2000 : 200;
  }
};

ValidationReport validate_at(const Context& c) { return validate(c.T, {c.cfg.s}, c.cfg.grid); }

void explain_failure(const Context& c, const ValidationReport& v) {
  if (!v.cond1.pass) c.err << "condition (1) fails: T'(0) = " << v.cond1.t_prime_0 << "\n";
  for (const auto& r : v.condC)
    if (!r.pass) {
      c.err << "condition (C) fails at s = " << r.s;
      if (r.first_violation) c.err << " (branch " << r.first_violation->k << ", x = " << r.first_violation->x << ")";
      c.err << "\n";
    }
  if (!v.identity_32.pass) c.err << "forward-invariance identity fails, slack " << v.identity_32.min_slack << "\n";
}

int cmd_validate(const Context& c) {
  if (c.cfg.format != "json") throw std::invalid_argument("validate emits JSON only");
  ValidationReport v = validate_at(c);
  json doc = c.header();
  doc["report"] = to_json(v);
  doc["beta_search"] = {{"iterations", v.beta.iterations}, {"converged", v.beta.converged}};
  c.emit(doc);
  if (!v.hypotheses_hold(c.cfg.s)) {
    explain_failure(c, v);
    return hypotheses_failed;
  }
  return ok;
}

int refuse(const Context& c, const ValidationReport& v) {
  explain_failure(c, v);
  json doc = c.header();
  doc["validation"] = to_json(v);
  doc["error"] = "hypotheses fail at s = " + num(c.cfg.s);
  c.emit(doc);
  return hypotheses_failed;
}

std::string two_column_csv(const std::vector<double>& x, const std::vector<double>& y) {
  std::string s = "x,value\n";
  for (std::size_t i = 0; i < x.size(); ++i) s += num(x[i]) + "," + num(y[i]) + "\n";
  return s;
}

std::vector<double> nodes(int n) {
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) x[static_cast<std::size_t>(j)] = static_cast<double>(j) / n;
  return x;
}

std::vector<double> centers(int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = (j + 0.5) / n;
  return x;
}

int cmd_spectrum(const Context& c) {
  ValidationReport v = validate_at(c);
  if (!v.hypotheses_hold(c.cfg.s)) return refuse(c, v);
  SpectralResult spec = spectrum_at(c.T, c.cfg.s, c.spectral(), v.beta.beta);
  if (c.cfg.format == "csv") {
    if (c.cfg.emit == "weights") c.emit(two_column_csv(centers(c.cfg.cells), spec.ms_weights));
    else c.emit(two_column_csv(nodes(c.cfg.cells), spec.density.values()));
  } else {
    json doc = c.header();
    doc["spectrum"] = to_json(spec);
    c.emit(doc);
  }
  if (!spec.converged) {
    c.err << "power iteration did not converge (residuals " << spec.residual_left << ", " << spec.residual_right
          << ")\n";
    return not_converged;
  }
  return ok;
}

int cmd_density(const Context& c) {
  ValidationReport v = validate_at(c);
  if (!v.hypotheses_hold(c.cfg.s)) return refuse(c, v);
  SpectralResult spec = spectrum_at(c.T, c.cfg.s, c.spectral(), v.beta.beta);
  CollocationOperator F(c.T, c.cfg.s, c.cfg.cells);
  DensityResult d = invariant_density(F, spec.ms_weights, c.cfg.tol, c.cfg.max_iter);
  if (c.cfg.format == "csv") {
    c.emit(two_column_csv(nodes(c.cfg.cells), d.density.values()));
  } else {
    json doc = c.header();
    doc["density"] = {{"values", d.density.values()},
                      {"iterations", d.iterations},
                      {"converged", d.converged},
                      {"cesaro_engaged", d.cesaro_engaged},
                      {"in_cone", d.in_cone}};
    doc["spectrum"] = to_json(spec);
    c.emit(doc);
  }
  if (!d.converged || !spec.converged) {
    c.err << "density iteration did not converge\n";
    return not_converged;
  }
  return ok;
}

struct CylinderSection {
  json doc;
  std::string csv;
  bool converged = true;
};

CylinderSection cylinder_section(const Context& c, const ValidationReport& v) {
  const double beta = v.beta.beta;
  CollocationOperator F(c.T, c.cfg.s, c.cfg.cells);
  const double gamma = collocation_gamma(F);
  ConditionBResult b = condition_B_probe(F, c.T, gamma, beta, c.cfg.depth, c.n_max(v));
  SpectralResult spec = spectrum_at(c.T, c.cfg.s, c.spectral(), beta);
  std::vector<double> mass = max_cylinder_mass(c.T, beta, spec.ms_weights, c.cfg.depth);
  for (const auto& w : b.warnings) c.err << "warning: " << w << "\n";

  CylinderSection out;
  out.converged = spec.converged;
  out.doc = to_json(b);
  out.doc["collocation_gamma"] = gamma;
  out.doc["max_cyl_mass"] = mass;
  out.csv = "r,count,M_hat,max_cyl_mass\n";
  for (std::size_t i = 0; i < b.m_hat.size(); ++i)
    out.csv += std::to_string(i + 1) + "," + std::to_string(b.cylinder_counts[i]) + "," + num(b.m_hat[i]) + "," +
               num(mass[i]) + "\n";
  if (v.beta_type.type == BetaType::indifferent) {
    ParabolicScaling p = parabolic_scaling(c.T, v.beta.n_star, 30);
    out.doc["parabolic"] = to_json(p);
    out.csv += "\n# theta_hat=" + num(p.theta_hat) + " polynomial=" + (p.polynomial ? "true" : "false") + "\n";
    out.csv += "r,w_r,D_r\n";
    for (std::size_t r = 1; r < p.w.size(); ++r) {
      out.csv += std::to_string(r) + "," + num(p.w[r]) + ",";
      out.csv += (r <= p.D.size() ? num(p.D[r - 1]) : std::string()) + "\n";
    }
  }
  return out;
}

int cmd_cylinders(const Context& c) {
  ValidationReport v = validate_at(c);
  if (!v.hypotheses_hold(c.cfg.s)) return refuse(c, v);
  CylinderSection sec = cylinder_section(c, v);
  if (c.cfg.format == "csv") {
    c.emit(sec.csv);
  } else {
    json doc = c.header();
    doc["cylinders"] = sec.doc;
    c.emit(doc);
  }
  return sec.converged ? ok : not_converged;
}

struct PressureSection {
  PressureCurve curve;
  bool converged = true;
};

PressureSection pressure_section(const Context& c, const ValidationReport& v) {
  PressureSection p;
  p.curve = pressure_curve(c.T, c.cfg.s_grid(), c.spectral(), v.beta_type.type == BetaType::indifferent,
                           v.beta.beta);
  for (const auto& pt : p.curve.points)
    if (!pt.converged) {
      c.err << "power iteration did not converge at s = " << pt.s << "\n";
      p.converged = false;
    }
  return p;
}

int cmd_pressure(const Context& c) {
  // The curve deliberately crosses exponents where (C) fails; only condition (1) gates it.
  ValidationReport v = validate(c.T, {}, c.cfg.grid);
  if (!v.cond1.pass) return refuse(c, v);
  PressureSection p = pressure_section(c, v);
  json verdict = verdict_json(p.curve);
  if (c.cfg.format == "csv") {
    std::string csv = "s,P,lambda,h,converged\n";
    for (const auto& pt : p.curve.points)
      csv += num(pt.s) + "," + num(pt.P) + "," + num(pt.lambda) + "," + num(pt.h) + "," +
             (pt.converged ? "true" : "false") + "\n";
    c.emit(csv);
    json vdoc = c.header();
    vdoc["verdict"] = verdict;
    if (c.cfg.out.empty()) c.err << "verdict: " << verdict.dump() << "\n";
    else c.emit(vdoc.dump(2) + "\n", c.cfg.out + ".verdict.json");
  } else {
    json doc = c.header();
    doc["pressure"] = to_json(p.curve);
    c.emit(doc);
  }
  return p.converged ? ok : not_converged;
}

int cmd_report(const Context& c) {
  if (c.cfg.format != "json") throw std::invalid_argument("report emits JSON only");
  ValidationReport v = validate_at(c);
  json doc = c.header();
  doc["validate"] = to_json(v);
  if (!v.hypotheses_hold(c.cfg.s)) {
    explain_failure(c, v);
    doc["error"] = "hypotheses fail at s = " + num(c.cfg.s) + "; later sections skipped";
    c.emit(doc);
    return hypotheses_failed;
  }
  bool converged = true;
  const double beta = v.beta.beta;
  SpectralResult spec = spectrum_at(c.T, c.cfg.s, c.spectral(), beta);
  converged = converged && spec.converged;
  doc["spectrum"] = to_json(spec);
  doc["spectrum"]["lyapunov"] = lyapunov(c.T, spec.density, spec.ms_weights);

  CollocationOperator F(c.T, c.cfg.s, c.cfg.cells);
  const double gamma_col = collocation_gamma(F);
  json diag;
  diag["collocation_gamma"] = gamma_col;
  diag["lasota_yorke"] = to_json(lasota_yorke_probe(F, gamma_col, v.cond1.t_prime_0, spec.ms_weights, 16, c.cfg.seed));
  auto tests = random_cone_functions(c.cfg.cells, 8, c.cfg.seed);
  diag["duality_gap"] = equilibrium_duality_check(F, spec, tests, beta);
  diag["lemma54_gap"] = lemma54_check(c.T, c.cfg.s, spec, beta);
  doc["diagnostics"] = diag;

  CylinderSection cyl = cylinder_section(c, v);
  converged = converged && cyl.converged;
  doc["cylinders"] = cyl.doc;

  PressureSection p = pressure_section(c, v);
  converged = converged && p.converged;
  doc["pressure"] = to_json(p.curve);
  c.emit(doc);
  return converged ? ok : not_converged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thermodynamic formalism for piecewise monotone interval maps", "pmaps"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--map", cfg.map_source, "built-in map name or JSON file")->required();
    sub->add_option("--s", cfg.s, "exponent of the geometric potential");
    sub->add_option("--cells", cfg.cells, "grid cells (power of two)");
    sub->add_option("--tol", cfg.tol, "convergence tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "iteration cap");
    sub->add_option("--grid", cfg.grid, "sample grid for hypothesis checks");
    sub->add_option("--format", cfg.format, "json or csv");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    sub->add_option("--seed", cfg.seed, "seed for random probe functions");
  };
  auto add_cylinder = [&](CLI::App* sub) {
    sub->add_option("--depth", cfg.depth, "maximum cylinder depth");
    sub->add_option("--n-max", cfg.n_max, "iterations for the condition (B) probe");
  };
  auto add_sgrid = [&](CLI::App* sub) {
    sub->add_option("--s-min", cfg.s_min);
    sub->add_option("--s-max", cfg.s_max);
    sub->add_option("--s-steps", cfg.s_steps);
  };

  auto* v = app.add_subcommand("validate", "check the structural hypotheses");
  auto* sp = app.add_subcommand("spectrum", "leading eigenvalue, conformal weights and density");
  auto* de = app.add_subcommand("density", "invariant density by iterating the normalized operator");
  auto* cy = app.add_subcommand("cylinders", "condition (B) probe and indifferent-point scaling");
  auto* pr = app.add_subcommand("pressure", "pressure, Lyapunov exponent and entropy over an s grid");
  auto* re = app.add_subcommand("report", "validate, spectrum, cylinders and pressure in one document");
  for (auto* sub : {v, sp, de, cy, pr, re}) add_common(sub);
  sp->add_option("--emit", cfg.emit, "CSV column: density or weights");
  add_cylinder(cy);
  add_cylinder(re);
  add_sgrid(pr);
  add_sgrid(re);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return io_or_schema;
  }

  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  if (cfg.format.empty())
    cfg.format = (cfg.command == "density" || cfg.command == "cylinders" || cfg.command == "pressure") ? "csv" : "json";

  try {
    cfg.check();
    Context c{cfg, resolve_map(cfg.map_source), out, err};
    if (cfg.command == "validate") return cmd_validate(c);
    if (cfg.command == "spectrum") return cmd_spectrum(c);
    if (cfg.command == "density") return cmd_density(c);
    if (cfg.command == "cylinders") return cmd_cylinders(c);
    if (cfg.command == "pressure") return cmd_pressure(c);
    return cmd_report(c);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return io_or_schema;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace pmaps::cli
