#include "cli_support.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "lemni/error.hpp"
#include "lemni/extremal.hpp"
#include "lemni/geometry.hpp"
#include "lemni/measure.hpp"
#include "lemni/poly.hpp"
#include "lemni/version.hpp"

namespace lemni::cli {

namespace {

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

double parse_real(const std::string& s) {
  if (s.empty() || s == "+") return 1.0;
  if (s == "-") return -1.0;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number: " + s);
  return v;
}

}  // namespace

Cplx parse_complex(std::string token) {
  token = strip_spaces(token);
  if (token.empty()) throw std::invalid_argument("empty complex literal");
  if (token.back() == 'i' || token.back() == 'I') {
    std::string body = token.substr(0, token.size() - 1);
    // split at the last +/- that is not an exponent sign and not leading
    for (std::size_t k = body.size(); k-- > 1;) {
      const char c = body[k];
      if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
        return {parse_real(body.substr(0, k)),
                parse_real(body.substr(k))};
      }
    }
    return {0.0, parse_real(body)};  // pure imaginary
  }
  return {parse_real(token), 0.0};
}

std::vector<Cplx> parse_complex_list(const std::string& text) {
  std::vector<Cplx> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) out.push_back(parse_complex(token));
  if (out.empty()) throw std::invalid_argument("empty complex list");
  return out;
}

std::string JsonWriter::format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  // normalize negative zero for reproducibility across code paths
  if (std::string(buf) == "-0") return "0";
  return buf;
}

void JsonWriter::separator() {
  if (expecting_value_) {
    expecting_value_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_.push_back(',');
    first_.back() = false;
  }
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_.push_back('{');
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_.push_back('}');
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_.push_back('[');
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_.push_back(']');
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
  separator();
  out_.push_back('"');
  out_ += k;
  out_ += "\":";
  expecting_value_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  out_ += format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) { return value(static_cast<long>(v)); }

JsonWriter& JsonWriter::value(long v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::size_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::value(const std::string& v) {
  separator();
  out_.push_back('"');
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      default: out_.push_back(c);
    }
  }
  out_.push_back('"');
  return *this;
}

JsonWriter& JsonWriter::value(const Cplx& z) {
  begin_array();
  value(z.real());
  value(z.imag());
  return end_array();
}

std::string JsonWriter::take() {
  out_.push_back('\n');
  return std::move(out_);
}

ResolvedOptions ResolvedOptions::defaults() {
  ResolvedOptions o;
  o.values = {
      {"chart_switch", 1.8},
      {"critical_phase_tol", 1e-6},
      {"search_diameter_barrier", 8.0},
      {"search_objective_tol", 1e-4},
      {"crofton_n_theta", 256},
      {"crofton_n_x", 256},
      {"phase_step_max", M_PI / 64.0},
      {"quad_tol", 1e-9},
      {"residual_tol", 1e-9},
      {"spatial_step_max", 0.0},
      {"sphere_critical_tol", 1e-6},
      {"sphere_glue_tol", 1e-6},
      {"sphere_param_step_max", M_PI / 64.0},
      {"spherical_step_max", 0.005},
      {"touch_merge_tol", 1e-6},
  };
  return o;
}

void ResolvedOptions::apply(const std::string& key, double value) {
  auto it = values.find(key);
  if (it == values.end())
    throw std::invalid_argument("unknown option: " + key);
  it->second = value;
}

double ResolvedOptions::get(const std::string& key) const {
  return values.at(key);
}

TraceOptions ResolvedOptions::trace_options() const {
  TraceOptions t;
  t.phase_step_max = get("phase_step_max");
  t.spatial_step_max = get("spatial_step_max");
  t.residual_tol = get("residual_tol");
  t.critical_phase_tol = get("critical_phase_tol");
  t.touch_merge_tol = get("touch_merge_tol");
  return t;
}

SphereTraceOptions ResolvedOptions::sphere_options() const {
  SphereTraceOptions s;
  s.param_step_max = get("sphere_param_step_max");
  s.spherical_step_max = get("spherical_step_max");
  s.critical_tol = get("sphere_critical_tol");
  s.glue_tol = get("sphere_glue_tol");
  s.chart_switch = get("chart_switch");
  return s;
}

void JobSpec::validate() const {
  static const std::vector<std::string> kCommands{
      "trace", "length", "bounds", "search", "sphere", "report"};
  if (std::find(kCommands.begin(), kCommands.end(), command) ==
      kCommands.end())
    throw std::invalid_argument("unknown command: " + command);

  const bool needs_poly =
      command == "trace" || command == "length" || command == "bounds";
  if (needs_poly) {
    if (roots.has_value() == coefficients.has_value())
      throw std::invalid_argument(
          "give exactly one polynomial source (--roots or --coeffs)");
  }
  if (command == "sphere") {
    if (!numerator || !denominator)
      throw std::invalid_argument("sphere needs --num and --den");
    if (!circle) throw std::invalid_argument("sphere needs --circle or --line");
  }
  if (format != "json" && format != "csv" && format != "svg")
    throw std::invalid_argument("format must be json, csv or svg");
  if (format == "svg" && command != "trace" && command != "sphere")
    throw std::invalid_argument("svg output is only for trace and sphere");
  if (format == "csv" && command != "report")
    throw std::invalid_argument("csv output is only for report");
  if (command == "report" && format == "json")
    throw std::invalid_argument("report emits csv (use --format csv)");
}

namespace {

MonicPolynomial polynomial_from_spec(const JobSpec& spec) {
  if (spec.roots) return MonicPolynomial::from_roots(*spec.roots);
  return MonicPolynomial::from_coefficients(*spec.coefficients);
}

void write_header(JsonWriter& w, const JobSpec& spec) {
  w.key("tool").value("lemni");
  w.key("version").value(kVersion);
  w.key("command").value(spec.command);
  w.key("seed").value(static_cast<long>(spec.seed));
  w.key("options").begin_object();
  for (const auto& [k, v] : spec.options.values) w.key(k).value(v);
  w.end_object();
}

void write_polynomial(JsonWriter& w, const MonicPolynomial& p) {
  w.key("polynomial").begin_object();
  w.key("degree").value(p.degree());
  w.key("roots").begin_array();
  for (const Cplx& r : p.roots()) w.value(r);
  w.end_array();
  w.key("coefficients").begin_array();
  for (const Cplx& c : p.coefficients()) w.value(c);
  w.end_array();
  w.end_object();
}

void write_length_report(JsonWriter& w, const LengthReport& rep) {
  w.key("report").begin_object();
  w.key("exact_integral").value(rep.exact_integral);
  w.key("polyline").value(rep.polyline);
  w.key("crofton").value(rep.crofton);
  w.key("crofton_stderr").value(rep.crofton_stderr);
  w.key("degree").value(rep.degree);
  w.key("bound_alpha0").value(rep.bound_alpha0);
  w.key("bound_alpha0_times_degree").value(rep.bound_alpha0 * rep.degree);
  w.key("satisfies_alpha0_bound").value(rep.satisfies_alpha0_bound);
  w.key("satisfies_weak_bound").value(rep.satisfies_weak_bound);
  w.key("connected").value(rep.connected);
  w.end_object();
}

std::string svg_of_polylines(std::vector<std::vector<Cplx>> polys,
                             const std::vector<Cplx>& dots) {
  polys.erase(std::remove_if(polys.begin(), polys.end(),
                             [](const auto& p) { return p.size() < 2; }),
              polys.end());
  if (polys.empty())
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\"/>\n";
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& poly : polys)
    for (const Cplx& z : poly) {
      x0 = std::min(x0, z.real());
      x1 = std::max(x1, z.real());
      y0 = std::min(y0, -z.imag());  // flip y for screen coordinates
      y1 = std::max(y1, -z.imag());
    }
  const double pad = 0.1 * std::max(x1 - x0, y1 - y0);
  x0 -= pad;
  y0 -= pad;
  x1 += pad;
  y1 += pad;
  const double width = x1 - x0, height = y1 - y0;
  const double stroke = 0.005 * std::max(width, height);
  auto f = JsonWriter::format_double;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + f(x0) +
         " " + f(y0) + " " + f(width) + " " + f(height) + "\">\n";
  for (const auto& poly : polys) {
    out += "  <path fill=\"none\" stroke=\"black\" stroke-width=\"" +
           f(stroke) + "\" d=\"";
    for (std::size_t i = 0; i < poly.size(); ++i) {
      out += (i == 0 ? "M " : "L ");
      out += f(poly[i].real()) + " " + f(-poly[i].imag()) + " ";
    }
    out += "Z\"/>\n";
  }
  for (const Cplx& d : dots)
    out += "  <circle cx=\"" + f(d.real()) + "\" cy=\"" + f(-d.imag()) +
           "\" r=\"" + f(2.0 * stroke) + "\" fill=\"red\"/>\n";
  out += "</svg>\n";
  return out;
}

std::string run_trace(const JobSpec& spec) {
  const MonicPolynomial p = polynomial_from_spec(spec);
  const LevelCurve curve = trace(p, spec.options.trace_options());

  if (spec.format == "svg") {
    std::vector<std::vector<Cplx>> polys;
    for (const CurveComponent& c : curve.components) polys.push_back(c.pts);
    return svg_of_polylines(polys, curve.touch_points);
  }

  JsonWriter w;
  w.begin_object();
  write_header(w, spec);
  write_polynomial(w, p);
  w.key("curve").begin_object();
  w.key("component_count").value(curve.components.size());
  w.key("connected").value(curve.components.size() == 1);
  w.key("monodromy").begin_array();
  for (int s : curve.monodromy.sigma) w.value(s);
  w.end_array();
  w.key("monodromy_perturbed").value(curve.monodromy.perturbed);
  w.key("critical_phases").begin_array();
  for (double t : curve.critical_phases) w.value(t);
  w.end_array();
  w.key("touch_points").begin_array();
  for (const Cplx& t : curve.touch_points) w.value(t);
  w.end_array();
  w.key("total_vertices").value(curve.total_vertices());
  w.key("components").begin_array();
  for (const CurveComponent& c : curve.components) {
    w.begin_object();
    w.key("vertex_count").value(c.pts.size());
    w.key("vertices").begin_array();
    for (const Cplx& z : c.pts) w.value(z);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.end_object();
  return w.take();
}

std::string run_length(const JobSpec& spec) {
  const MonicPolynomial p = polynomial_from_spec(spec);
  const LengthReport rep = verify_length_bound(
      p, spec.options.get("quad_tol"), spec.options.trace_options(),
      static_cast<int>(spec.options.get("crofton_n_theta")),
      static_cast<int>(spec.options.get("crofton_n_x")));
  JsonWriter w;
  w.begin_object();
  write_header(w, spec);
  write_polynomial(w, p);
  write_length_report(w, rep);
  w.end_object();
  return w.take();
}

std::string run_bounds(const JobSpec& spec) {
  const MonicPolynomial p = polynomial_from_spec(spec);
  const int d = p.degree();
  const TraceOptions topts = spec.options.trace_options();
  const LevelCurve curve = trace(p, topts);

  LengthReport rep;
  rep.degree = d;
  rep.exact_integral = length_integral(p, spec.options.get("quad_tol"));
  rep.polyline = length_polyline(curve);
  const CroftonEstimate ce =
      crofton_length(curve, static_cast<int>(spec.options.get("crofton_n_theta")),
                     static_cast<int>(spec.options.get("crofton_n_x")));
  rep.crofton = ce.length;
  rep.crofton_stderr = ce.stderr_;
  rep.connected = curve.components.size() == 1;
  rep.satisfies_alpha0_bound =
      rep.exact_integral <= kLengthBoundAlpha0 * d + 1e-6;
  rep.satisfies_weak_bound = rep.exact_integral <= kLengthBoundWeak * d + 1e-6;

  // random-line crossing counts
  double R = 0.0;
  for (const CurveComponent& c : curve.components)
    for (const Cplx& z : c.pts) R = std::max(R, std::abs(z));
  R += 1.0;
  std::mt19937_64 rng(spec.seed ^ 0x11beefULL);
  std::uniform_real_distribution<double> utheta(0.0, M_PI);
  std::uniform_real_distribution<double> ux(-R, R);
  int max_crossings = 0;
  for (int k = 0; k < spec.n_lines; ++k) {
    const Line line{utheta(rng), ux(rng)};
    max_crossings =
        std::max(max_crossings, line_intersection_count(p, line, curve));
  }

  const bool projection_ok = verify_projection_bound(curve, d);
  const HullBoundCheck hull = verify_hull_perimeter_bound(curve);

  JsonWriter w;
  w.begin_object();
  write_header(w, spec);
  write_polynomial(w, p);
  write_length_report(w, rep);
  w.key("line_crossings").begin_object();
  w.key("lines_tested").value(spec.n_lines);
  w.key("max_crossings").value(max_crossings);
  w.key("bound").value(2 * d);
  w.key("within_bound").value(max_crossings <= 2 * d);
  w.end_object();
  w.key("projection_bound").begin_object();
  w.key("ok").value(projection_ok);
  w.end_object();
  w.key("hull_bound").begin_object();
  w.key("applicable").value(hull.applicable);
  w.key("ok").value(hull.ok);
  w.key("perimeter").value(hull.perimeter);
  w.key("bound").value(kHullPerimeterBound);
  w.end_object();
  w.key("disc_covers").begin_array();
  for (double level : {0.25, 1.0, 4.0}) {
    const DiscCover cover = disc_cover(p, level);
    // rejection-sample the sublevel set and check coverage
    const double pad = std::pow(level, 1.0 / d) + 0.1;
    double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
    for (const Cplx& r : p.roots()) {
      bx0 = std::min(bx0, r.real() - pad);
      bx1 = std::max(bx1, r.real() + pad);
      by0 = std::min(by0, r.imag() - pad);
      by1 = std::max(by1, r.imag() + pad);
    }
    std::mt19937_64 srng(spec.seed ^ 0xca47a9ULL ^
                         static_cast<std::uint64_t>(level * 16));
    std::uniform_real_distribution<double> sx(bx0, bx1), sy(by0, by1);
    int accepted = 0;
    long attempts = 0;
    bool all_covered = true;
    while (accepted < spec.n_samples && attempts < 100L * spec.n_samples) {
      ++attempts;
      const Cplx z{sx(srng), sy(srng)};
      if (std::abs(p.evaluate(z)) >= level) continue;
      ++accepted;
      if (!cover.covers(z)) all_covered = false;
    }
    w.begin_object();
    w.key("level").value(level);
    w.key("disc_count").value(cover.discs.size());
    w.key("total_radius").value(cover.total_radius);
    w.key("radius_budget").value(cover.radius_budget);
    w.key("within_budget").value(cover.total_radius <=
                                 cover.radius_budget + 1e-9);
    w.key("samples_tested").value(accepted);
    w.key("all_covered").value(all_covered);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

std::string run_search(const JobSpec& spec) {
  SearchOptions sopts;
  sopts.objective_tol = spec.options.get("search_objective_tol");
  sopts.diameter_barrier = spec.options.get("search_diameter_barrier");
  const SearchResult result =
      search(spec.degree, spec.budget, spec.seed, sopts);
  JsonWriter w;
  w.begin_object();
  write_header(w, spec);
  w.key("degree").value(spec.degree);
  w.key("budget").value(spec.budget);
  w.key("result").begin_object();
  w.key("best_roots").begin_array();
  for (const Cplx& r : result.best.roots()) w.value(r);
  w.end_array();
  w.key("best_coefficients").begin_array();
  for (const Cplx& c : result.best.coefficients()) w.value(c);
  w.end_array();
  w.key("best_length").value(result.best_length);
  w.key("evaluations").value(result.evaluations);
  w.key("history").begin_array();
  for (const auto& [it, len] : result.history) {
    w.begin_array();
    w.value(it);
    w.value(len);
    w.end_array();
  }
  w.end_array();
  w.key("critical_value_distances").begin_array();
  for (double v : result.critical_value_distances) w.value(v);
  w.end_array();
  w.key("connected").value(result.connected);
  w.end_object();
  w.end_object();
  return w.take();
}

std::string run_sphere(const JobSpec& spec) {
  const RationalFunction f =
      RationalFunction::from_coefficients(*spec.numerator, *spec.denominator);
  const CircleOnSphere C = *spec.circle;
  const SphereTraceOptions sopts = spec.options.sphere_options();
  const SphericalCurve curve = preimage_trace(f, C, sopts);

  if (spec.format == "svg") {
    // draw the plane-chart projection; far vertices are clipped
    std::vector<std::vector<Cplx>> polys;
    for (const SphericalComponent& c : curve.components) {
      std::vector<Cplx> poly;
      for (std::size_t i = 0; i < c.pts.size(); ++i) {
        Cplx z = c.pts[i];
        if (c.charts[i] == Chart::inverted) {
          if (std::abs(z) < 0.1) continue;  // too close to infinity
          z = 1.0 / z;
        }
        poly.push_back(z);
      }
      polys.push_back(std::move(poly));
    }
    return svg_of_polylines(polys, {});
  }

  const PoincareEstimate poincare =
      poincare_length(curve, spec.n_samples, spec.seed);

  JsonWriter w;
  w.begin_object();
  write_header(w, spec);
  w.key("function").begin_object();
  w.key("degree").value(f.degree());
  w.key("numerator").begin_array();
  for (const Cplx& c : f.numerator()) w.value(c);
  w.end_array();
  w.key("denominator").begin_array();
  for (const Cplx& c : f.denominator()) w.value(c);
  w.end_array();
  w.end_object();
  w.key("circle").begin_object();
  if (C.kind == CircleOnSphere::Kind::circle) {
    w.key("kind").value("circle");
    w.key("center").value(C.center);
    w.key("radius").value(C.radius);
  } else {
    w.key("kind").value("line");
    w.key("theta").value(C.theta);
    w.key("x").value(C.x);
  }
  w.end_object();
  w.key("curve").begin_object();
  w.key("component_count").value(curve.components.size());
  w.key("spherical_length").value(curve.spherical_length);
  w.key("bound").value(2.0 * M_PI * f.degree());
  w.key("within_bound").value(curve.spherical_length <=
                              2.0 * M_PI * f.degree() + 1e-3);
  w.key("touch_points").begin_array();
  for (const SpherePoint& t : curve.touch_points) {
    w.begin_array();
    w.value(t.x);
    w.value(t.y);
    w.value(t.z);
    w.end_array();
  }
  w.end_array();
  w.key("total_vertices").begin_array();
  for (const SphericalComponent& c : curve.components) w.value(c.pts.size());
  w.end_array();
  w.end_object();
  w.key("poincare").begin_object();
  w.key("length").value(poincare.length);
  w.key("stderr").value(poincare.stderr_);
  w.key("samples").value(poincare.samples);
  w.end_object();
  w.end_object();
  return w.take();
}

std::string run_report(const JobSpec& spec) {
  if (spec.family != "zd+1" && spec.family != "zd")
    throw std::invalid_argument("family must be zd+1 or zd");
  if (spec.dmax < 1 || spec.dmax > 16)
    throw std::invalid_argument("dmax must be in [1, 16]");
  std::string out = "d,length,length_over_d,bound_alpha0_d,connected,max_crit_dist\n";
  for (int d = 1; d <= spec.dmax; ++d) {
    std::vector<Cplx> roots;
    if (spec.family == "zd+1") {
      roots = power_candidate_roots(d);
    } else {
      roots.assign(d, Cplx(0.0));
    }
    const MonicPolynomial p = MonicPolynomial::from_roots(roots);
    const double len = length_integral(p, spec.options.get("quad_tol"));
    const bool connected = is_connected(p, spec.options.trace_options());
    double max_crit = 0.0;
    if (d >= 2) {
      const auto dists = critical_value_report(p);
      if (!dists.empty()) max_crit = dists.front();
    }
    auto f = JsonWriter::format_double;
    out += std::to_string(d) + "," + f(len) + "," + f(len / d) + "," +
           f(kLengthBoundAlpha0 * d) + "," + (connected ? "true" : "false") +
           "," + f(max_crit) + "\n";
  }
  return out;
}

}  // namespace

std::string run_job(const JobSpec& spec) {
  spec.validate();
  if (spec.command == "trace") return run_trace(spec);
  if (spec.command == "length") return run_length(spec);
  if (spec.command == "bounds") return run_bounds(spec);
  if (spec.command == "search") return run_search(spec);
  if (spec.command == "sphere") return run_sphere(spec);
  return run_report(spec);
}

JobSpec job_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open job file: " + path);
  nlohmann::json j;
  in >> j;

  JobSpec spec;
  spec.command = j.value("command", "");
  if (j.contains("polynomial")) {
    const auto& poly = j.at("polynomial");
    if (poly.contains("roots"))
      spec.roots = parse_complex_list(poly.at("roots").get<std::string>());
    if (poly.contains("coefficients"))
      spec.coefficients =
          parse_complex_list(poly.at("coefficients").get<std::string>());
  }
  if (j.contains("numerator"))
    spec.numerator = parse_complex_list(j.at("numerator").get<std::string>());
  if (j.contains("denominator"))
    spec.denominator =
        parse_complex_list(j.at("denominator").get<std::string>());
  if (j.contains("circle")) {
    const auto& c = j.at("circle");
    spec.circle = CircleOnSphere::circle(
        parse_complex(c.at("center").get<std::string>()),
        c.at("radius").get<double>());
  }
  if (j.contains("line")) {
    const auto& l = j.at("line");
    spec.circle = CircleOnSphere::line(l.at("theta").get<double>(),
                                       l.at("x").get<double>());
  }
  spec.degree = j.value("degree", 2);
  spec.budget = j.value("budget", 2000L);
  spec.family = j.value("family", "zd+1");
  spec.dmax = j.value("dmax", 6);
  spec.seed = j.value("seed", 0ULL);
  spec.format = j.value("format", spec.command == "report" ? "csv" : "json");
  spec.output_path = j.value("output_path", "");
  spec.n_lines = j.value("lines", 1000);
  spec.n_samples = j.value("samples", 10000);
  if (j.contains("options"))
    for (const auto& [k, v] : j.at("options").items())
      spec.options.apply(k, v.get<double>());
  return spec;
}

namespace {

void emit(const JobSpec& spec, const std::string& artifact) {
  if (spec.output_path.empty()) {
    std::cout << artifact;
    return;
  }
  std::ofstream out(spec.output_path, std::ios::binary);
  if (!out)
    throw std::invalid_argument("cannot write: " + spec.output_path);
  out << artifact;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LEMNI_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw std::invalid_argument("LEMNI_SEED must be an integer");
    }
  }
  return 0;
}

void add_common(CLI::App* cmd, JobSpec& spec,
                std::vector<std::string>& opt_kv) {
  cmd->add_option("--seed", spec.seed, "RNG seed (default: $LEMNI_SEED or 0)");
  cmd->add_option("--output,-o", spec.output_path, "output path (default: stdout)");
  cmd->add_option("--opt", opt_kv, "override a module default, key=value")
      ->take_all();
}

void add_poly_inputs(CLI::App* cmd, std::string& roots, std::string& coeffs) {
  cmd->add_option("--roots", roots, "comma-separated complex roots, a+bi");
  cmd->add_option(
      "--coeffs", coeffs,
      "ascending coefficients, constant term first, last must be 1");
}

}  // namespace

int run_cli(int argc, char** argv) {
  JobSpec spec;
  std::string roots_text, coeffs_text, num_text, den_text;
  std::string circle_text, line_text, job_path;
  std::vector<std::string> opt_kv;

  CLI::App app{"polynomial lemniscate lengths, bounds and extremal search"};
  app.require_subcommand(0, 1);
  app.add_option("--job", job_path, "run a JSON job file");

  auto* c_trace = app.add_subcommand("trace", "trace E(p) = {|p(z)| = 1}");
  add_poly_inputs(c_trace, roots_text, coeffs_text);
  c_trace->add_option("--format", spec.format, "json or svg");
  add_common(c_trace, spec, opt_kv);

  auto* c_length = app.add_subcommand("length", "the three length estimates");
  add_poly_inputs(c_length, roots_text, coeffs_text);
  add_common(c_length, spec, opt_kv);

  auto* c_bounds =
      app.add_subcommand("bounds", "crossing/projection/hull/cover checks");
  add_poly_inputs(c_bounds, roots_text, coeffs_text);
  c_bounds->add_option("--lines", spec.n_lines, "random lines to test");
  c_bounds->add_option("--samples", spec.n_samples, "cover samples per level");
  add_common(c_bounds, spec, opt_kv);

  auto* c_search =
      app.add_subcommand("search", "search for length-extremal roots");
  c_search->add_option("--degree,-d", spec.degree, "degree, 2..6");
  c_search->add_option("--budget", spec.budget, "objective evaluations");
  add_common(c_search, spec, opt_kv);

  auto* c_sphere =
      app.add_subcommand("sphere", "rational preimages of circles");
  c_sphere->add_option("--num", num_text, "numerator coefficients, ascending");
  c_sphere->add_option("--den", den_text, "denominator coefficients, ascending");
  c_sphere->add_option("--circle", circle_text, "center_re,center_im,radius");
  c_sphere->add_option("--line", line_text, "theta,x for Re(z e^{-i theta}) = x");
  c_sphere->add_option("--samples", spec.n_samples, "Poincare sample count");
  c_sphere->add_option("--format", spec.format, "json or svg");
  add_common(c_sphere, spec, opt_kv);

  auto* c_report = app.add_subcommand("report", "CSV sweep over a family");
  c_report->add_option("--family", spec.family, "zd+1 or zd");
  c_report->add_option("--dmax", spec.dmax, "largest degree");
  c_report->add_option("--format", spec.format, "csv");
  add_common(c_report, spec, opt_kv);

  spec.seed = default_seed();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    JsonWriter w;
    w.begin_object();
    w.key("error").value(e.what());
    w.key("stage").value("argument parsing");
    w.end_object();
    std::cerr << w.take();
    return 2;
  }

  try {
    if (!job_path.empty()) {
      spec = job_from_file(job_path);
    } else {
      if (app.get_subcommands().empty())
        throw std::invalid_argument("no command given (try --help)");
      spec.command = app.get_subcommands().front()->get_name();
      if (!roots_text.empty()) spec.roots = parse_complex_list(roots_text);
      if (!coeffs_text.empty())
        spec.coefficients = parse_complex_list(coeffs_text);
      if (!num_text.empty()) spec.numerator = parse_complex_list(num_text);
      if (!den_text.empty()) spec.denominator = parse_complex_list(den_text);
      if (!circle_text.empty()) {
        const auto parts = parse_complex_list(circle_text);
        if (parts.size() != 3)
          throw std::invalid_argument("--circle wants center_re,center_im,radius");
        spec.circle = CircleOnSphere::circle(
            Cplx(parts[0].real(), parts[1].real()), parts[2].real());
      }
      if (!line_text.empty()) {
        const auto parts = parse_complex_list(line_text);
        if (parts.size() != 2)
          throw std::invalid_argument("--line wants theta,x");
        spec.circle = CircleOnSphere::line(parts[0].real(), parts[1].real());
      }
      if (spec.command == "report" && spec.format == "json")
        spec.format = "csv";
      for (const std::string& kv : opt_kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("--opt wants key=value");
        spec.options.apply(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
      }
      if (spec.coefficients && !spec.coefficients->empty() &&
          spec.command != "sphere") {
        // the grammar demands a monic tail
        if (std::abs(spec.coefficients->back() - Cplx(1.0)) > 1e-12)
          throw std::invalid_argument("last coefficient must be 1 (monic)");
      }
    }
    emit(spec, run_job(spec));
    return 0;
  } catch (const std::invalid_argument& e) {
    JsonWriter w;
    w.begin_object();
    w.key("error").value(e.what());
    w.key("stage").value("validation");
    w.end_object();
    std::cerr << w.take();
    return 2;
  } catch (const NumericalError& e) {
    JsonWriter w;
    w.begin_object();
    w.key("error").value(e.what());
    w.key("stage").value("numerical");
    w.end_object();
    std::cerr << w.take();
    return 3;
  }
}

}  // namespace lemni::cli
