#ifndef CARNOT_IO_HPP
#define CARNOT_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "carnot/metrics.hpp"
#include "carnot/reconstruct.hpp"

namespace carnot {

/*
 * File formats.
 *
 * Geometry JSON:
 *   {"dim": 3, "coords": ["x","y","z"],
 *    "fields": [["1","0","-y/2"], ["0","1","x/2"]],
 *    "domain": [[-10,10],[-10,10],[-10,10]]}        // optional
 *
 * Control JSON:
 *   {"breakpoints": [0, 0.5, 1], "values": [[1,0],[0,1]]}
 *
 * Horizontal derivative JSON:
 *   {"fields": ["expr for X_1 f", ..., "expr for X_k f"]}
 *
 * CSV columns: paths "t,x1,...,xn"; clouds "x1,...,xn,length";
 * exponent tables "log_h,log_d" with a final "slope,<value>" row.
 * Numbers are printed with round-trip precision, so identical inputs give
 * byte-identical files.
 */

Geometry load_geometry(const std::filesystem::path& file);
Geometry parse_geometry_json(const std::string& text, const std::string& name);

Control load_control(const std::filesystem::path& file);
void save_control(const Control& u, const std::filesystem::path& file);

HorizontalDerivatives load_derivatives(const std::filesystem::path& file,
                                       const Geometry& g);

void write_path_csv(const HorizontalPath& path, const std::filesystem::path& file);
void write_cloud_csv(const BallCloud& cloud, const std::filesystem::path& file);
void write_exponent_csv(const ExponentFit& fit, const std::filesystem::path& file);

/* Round-trip decimal form of a double (shortest that parses back equal). */
std::string format_double(double v);

/* Parse "a,b,c" into a vector of doubles. */
Eigen::VectorXd parse_point(const std::string& text, int expected_dim);
std::vector<double> parse_number_list(const std::string& text);

}  // namespace carnot

#endif
