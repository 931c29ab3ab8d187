#include "carnot/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace carnot {

namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError(file.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return std::string(buf);
}

Geometry parse_geometry_json(const std::string& text, const std::string& name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(name + ": " + e.what());
  }
  if (!j.is_object()) throw InputError(name + ": expected a JSON object");
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    throw InputError(name + ": missing integer \"dim\"");
  int n = j["dim"].get<int>();
  if (!j.contains("coords") || !j["coords"].is_array())
    throw InputError(name + ": missing \"coords\" array");
  std::vector<std::string> coords;
  for (const auto& c : j["coords"]) {
    if (!c.is_string()) throw InputError(name + ": coords must be strings");
    coords.push_back(c.get<std::string>());
  }
  if (static_cast<int>(coords.size()) != n)
    throw InputError(name + ": \"dim\" disagrees with \"coords\" length");
  if (!j.contains("fields") || !j["fields"].is_array() || j["fields"].empty())
    throw InputError(name + ": missing nonempty \"fields\" array");

  std::vector<VectorField> fields;
  for (std::size_t fi = 0; fi < j["fields"].size(); ++fi) {
    const auto& row = j["fields"][fi];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw InputError(name + ": field " + std::to_string(fi + 1) + " needs " +
                       std::to_string(n) + " components");
    std::vector<Expr> comps;
    for (std::size_t ci = 0; ci < row.size(); ++ci) {
      if (!row[ci].is_string())
        throw InputError(name + ": field components must be strings");
      try {
        comps.push_back(parse_expr(row[ci].get<std::string>(), coords));
      } catch (const Error& e) {
        throw InputError(name + ": field " + std::to_string(fi + 1) +
                         " component " + std::to_string(ci + 1) + ": " +
                         e.what());
      }
    }
    fields.emplace_back(std::move(comps));
  }

  std::optional<Eigen::MatrixX2d> domain;
  if (j.contains("domain")) {
    const auto& d = j["domain"];
    if (!d.is_array() || static_cast<int>(d.size()) != n)
      throw InputError(name + ": \"domain\" needs one [lo,hi] per coordinate");
    Eigen::MatrixX2d box(n, 2);
    for (int i = 0; i < n; ++i) {
      if (!d[i].is_array() || d[i].size() != 2)
        throw InputError(name + ": domain rows are [lo,hi]");
      box(i, 0) = d[i][0].get<double>();
      box(i, 1) = d[i][1].get<double>();
    }
    domain = box;
  }

  try {
    return Geometry(std::move(coords), std::move(fields), domain);
  } catch (const Error& e) {
    throw InputError(name + ": " + e.what());
  }
}

Geometry load_geometry(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_geometry_json(ss.str(), file.string());
}

Control load_control(const std::filesystem::path& file) {
  json j = read_json_file(file);
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
    throw InputError(file.string() +
                     ": control needs \"breakpoints\" and \"values\"");
  std::vector<double> bp;
  for (const auto& t : j["breakpoints"]) bp.push_back(t.get<double>());
  const auto& rows = j["values"];
  if (!rows.is_array() || rows.empty())
    throw InputError(file.string() + ": \"values\" must be a nonempty array");
  std::size_t k = rows[0].size();
  Eigen::MatrixXd vals(rows.size(), k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != k)
      throw InputError(file.string() + ": ragged \"values\" rows");
    for (std::size_t c = 0; c < k; ++c) vals(r, c) = rows[r][c].get<double>();
  }
  try {
    return Control(std::move(bp), std::move(vals));
  } catch (const Error& e) {
    throw InputError(file.string() + ": " + e.what());
  }
}

void save_control(const Control& u, const std::filesystem::path& file) {
  json j;
  j["breakpoints"] = json::array();
  for (double t : u.breakpoints()) j["breakpoints"].push_back(t);
  j["values"] = json::array();
  for (int r = 0; r < u.segments(); ++r) {
    json row = json::array();
    for (int c = 0; c < u.channels(); ++c) row.push_back(u.values()(r, c));
    j["values"].push_back(row);
  }
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  out << j.dump(2) << "\n";
}

HorizontalDerivatives load_derivatives(const std::filesystem::path& file,
                                       const Geometry& g) {
  json j = read_json_file(file);
  if (!j.is_object() || !j.contains("fields") || !j["fields"].is_array())
    throw InputError(file.string() + ": needs a \"fields\" array");
  std::vector<Expr> h;
  for (std::size_t i = 0; i < j["fields"].size(); ++i) {
    if (!j["fields"][i].is_string())
      throw InputError(file.string() + ": derivative entries must be strings");
    try {
      h.push_back(parse_expr(j["fields"][i].get<std::string>(), g.coords()));
    } catch (const Error& e) {
      throw InputError(file.string() + ": entry " + std::to_string(i + 1) +
                       ": " + e.what());
    }
  }
  try {
    return HorizontalDerivatives(g, std::move(h));
  } catch (const Error& e) {
    throw InputError(file.string() + ": " + e.what());
  }
}

void write_path_csv(const HorizontalPath& path,
                    const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  int n = path.points.empty() ? 0 : static_cast<int>(path.points[0].size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t r = 0; r < path.times.size(); ++r) {
    out << format_double(path.times[r]);
    for (int i = 0; i < n; ++i) out << "," << format_double(path.points[r][i]);
    out << "\n";
  }
}

void write_cloud_csv(const BallCloud& cloud,
                     const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  int n = static_cast<int>(cloud.center.size());
  for (int i = 1; i <= n; ++i) out << (i > 1 ? "," : "") << "x" << i;
  out << ",length\n";
  for (std::size_t r = 0; r < cloud.endpoints.size(); ++r) {
    for (int i = 0; i < n; ++i)
      out << (i ? "," : "") << format_double(cloud.endpoints[r][i]);
    out << "," << format_double(cloud.lengths[r]) << "\n";
  }
}

void write_exponent_csv(const ExponentFit& fit,
                        const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  out << "log_h,log_d\n";
  for (std::size_t i = 0; i < fit.log_h.size(); ++i)
    out << format_double(fit.log_h[i]) << "," << format_double(fit.log_d[i])
        << "\n";
  out << "slope," << format_double(fit.slope) << "\n";
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) {
    if (token.empty()) throw InputError("empty entry in number list");
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    while (end && *end == ' ') ++end;
    if (!end || *end != '\0')
      throw InputError("bad number \"" + token + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

Eigen::VectorXd parse_point(const std::string& text, int expected_dim) {
  std::vector<double> v = parse_number_list(text);
  if (expected_dim >= 0 && static_cast<int>(v.size()) != expected_dim)
    throw InputError("point \"" + text + "\" has " + std::to_string(v.size()) +
                     " coordinates, expected " + std::to_string(expected_dim));
  return Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace carnot
