#include "carnot/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "carnot/io.hpp"
#include "carnot/picard.hpp"

namespace carnot {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOpts {
  double step = 1e-3;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int depth = 4;
  std::string out_dir = ".";

  SteerOptions steer() const {
    SteerOptions o;
    o.step = step;
    o.tol = tol;
    o.max_depth = depth;
    return o;
  }
  fs::path artifact(const std::string& name) const {
    fs::path dir(out_dir);
    if (!dir.empty() && !fs::exists(dir)) fs::create_directories(dir);
    return dir / name;
  }
  void write_summary(const json& j) const {
    std::ofstream out(artifact("summary.json"));
    if (!out) throw InputError("cannot write summary.json in " + out_dir);
    out << j.dump(2) << "\n";
  }
};

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::string vec_text(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i)
    s += (i ? ", " : "") + format_double(v[i]);
  return s + ")";
}

void cmd_check(const GlobalOpts& g, const std::string& geom_file,
               const std::string& point, double rank_tol, std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  Eigen::VectorXd p = parse_point(point, geom.dim());
  GrowthVector gv = growth_vector(geom, p, g.depth, rank_tol);

  out << "geometry: dim " << geom.dim() << ", " << geom.num_fields()
      << " generator(s)\n";
  out << "growth vector at " << vec_text(p) << ": (";
  for (std::size_t i = 0; i < gv.ranks.size(); ++i)
    out << (i ? "," : "") << gv.ranks[i];
  out << ")\n";
  out << "basis:";
  for (std::size_t i = 0; i < gv.basis.size(); ++i)
    out << " " << gv.basis[i].str() << " (w " << gv.weights[i] << ")";
  out << "\n";
  out << "bracket-generating: " << (gv.bracket_generating ? "yes" : "no")
      << "\n";

  json s;
  s["command"] = "check";
  s["status"] = "ok";
  s["point"] = vec_json(p);
  s["ranks"] = gv.ranks;
  s["weights"] = gv.weights;
  json basis = json::array();
  for (const auto& b : gv.basis) basis.push_back(b.str());
  s["basis"] = basis;
  s["bracket_generating"] = gv.bracket_generating;
  g.write_summary(s);
}

void cmd_bracket(const GlobalOpts& g, const std::string& geom_file,
                 const std::string& word, const std::string& point,
                 std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  FormalBracket b = FormalBracket::parse(word);
  Eigen::VectorXd p = parse_point(point, geom.dim());
  VectorField f = materialize_bracket(geom, b);
  Eigen::VectorXd v = f(p);

  out << "bracket " << b.str() << " (weight " << b.weight() << ")\n";
  out << "components:";
  for (const auto& c : f.comps) out << " [" << c.str(geom.coords()) << "]";
  out << "\n";
  out << "value at " << vec_text(p) << ": " << vec_text(v) << "\n";

  json s;
  s["command"] = "bracket";
  s["status"] = "ok";
  s["word"] = b.str();
  s["weight"] = b.weight();
  json comps = json::array();
  for (const auto& c : f.comps) comps.push_back(c.str(geom.coords()));
  s["components"] = comps;
  s["point"] = vec_json(p);
  s["value"] = vec_json(v);
  g.write_summary(s);
}

void cmd_verify_michor(const GlobalOpts& g, const std::string& geom_file,
                       const std::string& word, const std::string& point,
                       double h, std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  FormalBracket b = FormalBracket::parse(word);
  Eigen::VectorXd p = parse_point(point, geom.dim());
  MichorReport rep = michor_check(geom, b, p, h, g.step);

  out << "bracket " << b.str() << " at " << vec_text(p) << ", h = "
      << format_double(h) << "\n";
  out << "low-order derivative max: " << format_double(rep.low_order_max)
      << "\n";
  out << "order-" << b.weight() << " estimate / " << b.weight()
      << "!: " << vec_text(rep.kth_estimate) << "\n";
  out << "symbolic bracket value:    " << vec_text(rep.reference) << "\n";
  out << "relative error: " << format_double(rep.rel_err) << "\n";
  if (rep.cancellation)
    out << "warning: stencil resolution limit reached (cancellation)\n";

  json s;
  s["command"] = "verify-michor";
  s["status"] = "ok";
  s["word"] = b.str();
  s["h"] = h;
  s["low_order_max"] = rep.low_order_max;
  s["kth_estimate"] = vec_json(rep.kth_estimate);
  s["reference"] = vec_json(rep.reference);
  s["rel_err"] = rep.rel_err;
  s["cancellation"] = rep.cancellation;
  g.write_summary(s);
}

void cmd_flow(const GlobalOpts& g, const std::string& geom_file, int field,
              double time, const std::string& point, std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  if (field < 1 || field > geom.num_fields())
    throw InputError("--field must be between 1 and " +
                     std::to_string(geom.num_fields()));
  Eigen::VectorXd p = parse_point(point, geom.dim());
  Eigen::VectorXd q = flow(geom, geom.field(field - 1), time, p, g.step);
  out << "flow of X_" << field << " for t = " << format_double(time) << ": "
      << vec_text(q) << "\n";

  json s;
  s["command"] = "flow";
  s["status"] = "ok";
  s["field"] = field;
  s["time"] = time;
  s["start"] = vec_json(p);
  s["end"] = vec_json(q);
  g.write_summary(s);
}

void cmd_integrate(const GlobalOpts& g, const std::string& geom_file,
                   const std::string& control_file, const std::string& from,
                   std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  Control u = load_control(control_file);
  Eigen::VectorXd p = parse_point(from, geom.dim());
  HorizontalPath path = integrate_control(geom, u, p, g.step);
  fs::path csv = g.artifact("integrate_path.csv");
  write_path_csv(path, csv);

  out << "endpoint: " << vec_text(path.endpoint()) << "\n";
  out << "length: " << format_double(path.length) << "\n";
  out << "path: " << csv.string() << "\n";

  json s;
  s["command"] = "integrate";
  s["status"] = "ok";
  s["endpoint"] = vec_json(path.endpoint());
  s["length"] = path.length;
  s["samples"] = path.times.size();
  s["artifacts"]["path"] = csv.string();
  g.write_summary(s);
}

void cmd_steer(const GlobalOpts& g, const std::string& geom_file,
               const std::string& from, const std::string& to, bool trace,
               std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  Eigen::VectorXd a = parse_point(from, geom.dim());
  Eigen::VectorXd b = parse_point(to, geom.dim());
  Control u = steer(geom, a, b, g.steer());
  HorizontalPath path = integrate_control(geom, u, a, g.step);

  fs::path cjson = g.artifact("steer_control.json");
  fs::path csv = g.artifact("steer_path.csv");
  save_control(u, cjson);
  write_path_csv(path, csv);

  double err = (path.endpoint() - b).norm();
  out << "steered " << vec_text(a) << " -> " << vec_text(b) << "\n";
  out << "length: " << format_double(path.length) << ", endpoint error: "
      << format_double(err) << "\n";
  if (trace) {
    for (int j = 0; j < u.segments(); ++j) {
      out << "  segment " << j << ": [" << format_double(u.breakpoints()[j])
          << ", " << format_double(u.breakpoints()[j + 1]) << ") u = (";
      for (int c = 0; c < u.channels(); ++c)
        out << (c ? ", " : "") << format_double(u.values()(j, c));
      out << ")\n";
    }
  }
  out << "control: " << cjson.string() << "\n";
  out << "path: " << csv.string() << "\n";

  json s;
  s["command"] = "steer";
  s["status"] = "ok";
  s["from"] = vec_json(a);
  s["to"] = vec_json(b);
  s["length"] = path.length;
  s["endpoint_error"] = err;
  s["segments"] = u.segments();
  s["artifacts"]["control"] = cjson.string();
  s["artifacts"]["path"] = csv.string();
  g.write_summary(s);
}

void cmd_distance(const GlobalOpts& g, const std::string& geom_file,
                  const std::string& from, const std::string& to, bool refine,
                  std::ostream& out, std::ostream& err_stream) {
  Geometry geom = load_geometry(geom_file);
  Eigen::VectorXd a = parse_point(from, geom.dim());
  Eigen::VectorXd b = parse_point(to, geom.dim());
  DistanceOptions opts;
  opts.steer = g.steer();
  DistanceResult d = distance_upper(geom, a, b, refine, opts);
  if (!d.warning.empty()) err_stream << "warning: " << d.warning << "\n";

  fs::path cjson = g.artifact("distance_control.json");
  save_control(d.control, cjson);

  out << "distance upper bound: " << format_double(d.upper_bound) << "\n";
  out << "endpoint error: " << format_double(d.endpoint_error) << "\n";
  out << "control: " << cjson.string() << "\n";

  json s;
  s["command"] = "distance";
  s["status"] = "ok";
  s["from"] = vec_json(a);
  s["to"] = vec_json(b);
  s["refined"] = refine;
  s["upper_bound"] = d.upper_bound;
  s["endpoint_error"] = d.endpoint_error;
  if (!d.warning.empty()) s["warning"] = d.warning;
  s["artifacts"]["control"] = cjson.string();
  g.write_summary(s);
}

void cmd_ball(const GlobalOpts& g, const std::string& geom_file,
              const std::string& center, double eps, int samples,
              int segments, std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  Eigen::VectorXd c = parse_point(center, geom.dim());
  BallCloud cloud = ball_sample(geom, c, eps, samples, segments, g.seed, g.step);

  fs::path csv = g.artifact("ball_cloud.csv");
  write_cloud_csv(cloud, csv);

  out << "sampled " << cloud.endpoints.size() << " endpoints (eps "
      << format_double(eps) << ", " << segments << " segments, seed "
      << g.seed << ")\n";
  out << "discarded (left domain): " << cloud.discarded << "\n";
  out << "cloud: " << csv.string() << "\n";

  json s;
  s["command"] = "ball";
  s["status"] = "ok";
  s["center"] = vec_json(c);
  s["eps"] = eps;
  s["samples"] = cloud.endpoints.size();
  s["segments"] = segments;
  s["seed"] = g.seed;
  s["discarded"] = cloud.discarded;
  s["artifacts"]["cloud"] = csv.string();
  g.write_summary(s);
}

void cmd_exponent(const GlobalOpts& g, const std::string& geom_file,
                  const std::string& point, int direction,
                  const std::string& radii_text, bool refine,
                  std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  Eigen::VectorXd p = parse_point(point, geom.dim());
  std::vector<double> radii = parse_number_list(radii_text);
  if (direction < 1 || direction > geom.dim())
    throw InputError("--direction must be between 1 and " +
                     std::to_string(geom.dim()));
  DistanceOptions opts;
  opts.steer = g.steer();
  ExponentFit fit =
      boxfit_exponent(geom, p, direction - 1, radii, refine, opts);

  fs::path csv = g.artifact("exponent.csv");
  write_exponent_csv(fit, csv);

  out << "fitted slope along coordinate " << direction << ": "
      << format_double(fit.slope) << "\n";
  for (double h : fit.dropped)
    out << "dropped radius " << format_double(h) << " (steering failed)\n";
  out << "table: " << csv.string() << "\n";

  json s;
  s["command"] = "exponent";
  s["status"] = "ok";
  s["direction"] = direction;
  s["slope"] = fit.slope;
  s["radii"] = fit.radii;
  s["dropped"] = fit.dropped;
  s["artifacts"]["table"] = csv.string();
  g.write_summary(s);
}

void cmd_reconstruct(const GlobalOpts& g, const std::string& geom_file,
                     const std::string& derivs_file, const std::string& from,
                     double f0, const std::string& to, std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  HorizontalDerivatives d = load_derivatives(derivs_file, geom);
  Eigen::VectorXd a = parse_point(from, geom.dim());
  Eigen::VectorXd b = parse_point(to, geom.dim());
  ReconstructOptions opts;
  opts.steer = g.steer();
  double value = reconstruct(d, a, f0, b, opts);

  fs::path csv = g.artifact("reconstruct.csv");
  {
    std::ofstream f(csv);
    if (!f) throw InputError("cannot write " + csv.string());
    for (int i = 1; i <= geom.dim(); ++i) f << (i > 1 ? "," : "") << "x" << i;
    f << ",f\n";
    for (int i = 0; i < geom.dim(); ++i)
      f << (i ? "," : "") << format_double(b[i]);
    f << "," << format_double(value) << "\n";
  }

  out << "f(" << vec_text(b) << ") = " << format_double(value) << "\n";
  out << "table: " << csv.string() << "\n";

  json s;
  s["command"] = "reconstruct";
  s["status"] = "ok";
  s["from"] = vec_json(a);
  s["f0"] = f0;
  s["to"] = vec_json(b);
  s["value"] = value;
  s["artifacts"]["table"] = csv.string();
  g.write_summary(s);
}

void cmd_loopcheck(const GlobalOpts& g, const std::string& geom_file,
                   const std::string& derivs_file, const std::string& from,
                   double f0, const std::string& to, int trials,
                   std::ostream& out) {
  Geometry geom = load_geometry(geom_file);
  HorizontalDerivatives d = load_derivatives(derivs_file, geom);
  Eigen::VectorXd a = parse_point(from, geom.dim());
  Eigen::VectorXd b = parse_point(to, geom.dim());
  ReconstructOptions opts;
  opts.steer = g.steer();
  PathIndependenceReport rep =
      path_independence_check(d, a, f0, b, trials, g.seed, opts);

  out << "route values:";
  for (double v : rep.values) out << " " << format_double(v);
  out << "\n";
  out << "max discrepancy: " << format_double(rep.max_discrepancy) << "\n";
  if (rep.failed_routes)
    out << "failed routes: " << rep.failed_routes << "\n";

  json s;
  s["command"] = "loopcheck";
  s["status"] = "ok";
  s["values"] = rep.values;
  s["max_discrepancy"] = rep.max_discrepancy;
  s["failed_routes"] = rep.failed_routes;
  s["trials"] = trials;
  s["seed"] = g.seed;
  g.write_summary(s);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"numerical toolkit for bracket-generating control geometries"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--step", g.step, "RK4 integrator step per unit time");
  app.add_option("--tol", g.tol, "endpoint tolerance");
  app.add_option("--seed", g.seed, "RNG seed for sampling commands");
  app.add_option("--depth", g.depth, "maximum bracket depth");
  app.add_option("--out", g.out_dir, "artifact output directory");

  std::string geom_file, point, word, from, to, control_file, derivs_file,
      radii_text, center;
  double h_step = 1e-2, time = 0.0, eps = 0.1, f0 = 0.0;
  double rank_tol = 1e-9;
  int field = 1, samples = 100, segments = 8, direction = 1, trials = 4;
  bool trace = false, refine = true, exp_refine = false;

  auto* check = app.add_subcommand("check", "growth vector at a point");
  check->add_option("geometry", geom_file)->required();
  check->add_option("--point", point)->required();
  check->add_option("--rank-tol", rank_tol);
  check->fallthrough();

  auto* bracket = app.add_subcommand("bracket", "evaluate a bracket word");
  bracket->add_option("geometry", geom_file)->required();
  bracket->add_option("--word,--expr", word)->required();
  bracket->add_option("--point", point)->required();
  bracket->fallthrough();

  auto* michor = app.add_subcommand(
      "verify-michor", "check bracket flow derivatives at a point");
  // long-only help here so the finite-difference step can be spelled --h
  michor->set_help_flag("--help", "print help and exit");
  michor->add_option("geometry", geom_file)->required();
  michor->add_option("--word,--expr", word)->required();
  michor->add_option("--point", point)->required();
  michor->add_option("--h", h_step, "finite difference step");
  michor->fallthrough();

  auto* flow_cmd = app.add_subcommand("flow", "flow along one generator");
  flow_cmd->add_option("geometry", geom_file)->required();
  flow_cmd->add_option("--field", field)->required();
  flow_cmd->add_option("--time", time)->required();
  flow_cmd->add_option("--point", point)->required();
  flow_cmd->fallthrough();

  auto* integrate_cmd =
      app.add_subcommand("integrate", "integrate a control file");
  integrate_cmd->add_option("geometry", geom_file)->required();
  integrate_cmd->add_option("--control", control_file)->required();
  integrate_cmd->add_option("--from", from)->required();
  integrate_cmd->fallthrough();

  auto* steer_cmd = app.add_subcommand("steer", "steer between two points");
  steer_cmd->add_option("geometry", geom_file)->required();
  steer_cmd->add_option("--from", from)->required();
  steer_cmd->add_option("--to", to)->required();
  steer_cmd->add_flag("--trace", trace, "print the emitted segments");
  steer_cmd->fallthrough();

  auto* distance_cmd =
      app.add_subcommand("distance", "upper bound for the path metric");
  distance_cmd->add_option("geometry", geom_file)->required();
  distance_cmd->add_option("--from", from)->required();
  distance_cmd->add_option("--to", to)->required();
  distance_cmd->add_flag("--refine,!--no-refine", refine,
                         "shorten the steering control (default on)");
  distance_cmd->fallthrough();

  auto* ball_cmd = app.add_subcommand("ball", "sample a metric ball");
  ball_cmd->add_option("geometry", geom_file)->required();
  ball_cmd->add_option("--center", center)->required();
  ball_cmd->add_option("--eps", eps)->required();
  ball_cmd->add_option("--samples", samples);
  ball_cmd->add_option("--segments", segments);
  ball_cmd->fallthrough();

  auto* exponent_cmd =
      app.add_subcommand("exponent", "log-log distance growth along an axis");
  exponent_cmd->add_option("geometry", geom_file)->required();
  exponent_cmd->add_option("--point", point)->required();
  exponent_cmd->add_option("--direction", direction, "1-based axis")
      ->required();
  exponent_cmd->add_option("--radii", radii_text, "comma-separated offsets")
      ->required();
  exponent_cmd->add_flag("--refine", exp_refine,
                         "refine each distance (default off)");
  exponent_cmd->fallthrough();

  auto* reconstruct_cmd = app.add_subcommand(
      "reconstruct", "rebuild function values from horizontal derivatives");
  reconstruct_cmd->add_option("geometry", geom_file)->required();
  reconstruct_cmd->add_option("--derivs", derivs_file)->required();
  reconstruct_cmd->add_option("--from", from)->required();
  reconstruct_cmd->add_option("--f0", f0)->required();
  reconstruct_cmd->add_option("--to", to)->required();
  reconstruct_cmd->fallthrough();

  auto* loopcheck_cmd = app.add_subcommand(
      "loopcheck", "route dependence of the reconstruction");
  loopcheck_cmd->add_option("geometry", geom_file)->required();
  loopcheck_cmd->add_option("--derivs", derivs_file)->required();
  loopcheck_cmd->add_option("--from", from)->required();
  loopcheck_cmd->add_option("--f0", f0)->required();
  loopcheck_cmd->add_option("--to", to)->required();
  loopcheck_cmd->add_option("--trials", trials);
  loopcheck_cmd->fallthrough();

  std::vector<const char*> argv;
  argv.push_back("carnot");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()),
              const_cast<char**>(argv.data()));

    if (*check) cmd_check(g, geom_file, point, rank_tol, out);
    else if (*bracket) cmd_bracket(g, geom_file, word, point, out);
    else if (*michor) cmd_verify_michor(g, geom_file, word, point, h_step, out);
    else if (*flow_cmd) cmd_flow(g, geom_file, field, time, point, out);
    else if (*integrate_cmd)
      cmd_integrate(g, geom_file, control_file, from, out);
    else if (*steer_cmd) cmd_steer(g, geom_file, from, to, trace, out);
    else if (*distance_cmd)
      cmd_distance(g, geom_file, from, to, refine, out, err);
    else if (*ball_cmd)
      cmd_ball(g, geom_file, center, eps, samples, segments, out);
    else if (*exponent_cmd)
      cmd_exponent(g, geom_file, point, direction, radii_text, exp_refine, out);
    else if (*reconstruct_cmd)
      cmd_reconstruct(g, geom_file, derivs_file, from, f0, to, out);
    else if (*loopcheck_cmd)
      cmd_loopcheck(g, geom_file, derivs_file, from, f0, to, trials, out);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    // File and expression text problems are wrapped into InputError by the
    // loaders; a bare domain error here means a numerical evaluation hit a
    // singular locus at run time.
    err << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace carnot
