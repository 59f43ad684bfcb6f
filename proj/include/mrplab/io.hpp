#pragma once

// Scenario configs (JSON), scan reports (CSV, JSON) and static SVG plots.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mrplab/fields.hpp"

namespace mrplab {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json load_json(const std::string& path);

// {"branching": [2, 2]} or {"shape": [[3], [2, 2, 4]]}.
FilteredTree parse_tree(const Json& config);

// Missing or "uniform" gives the uniform measure; otherwise one weight per
// leaf (normalized).
LeafMeasure parse_measure(const Json& config, const char* key, const FilteredTree& tree);

// A leaf-indexed array: numbers (d = 1) or equal-length arrays.
Matrix parse_leaf_matrix(const Json& value, const FilteredTree& tree, const char* what);

// "field": {"kind": "polynomial", "zeta": [c_0, c_1, ...], "xi": [c_0, ...],
//           "domain": [lo, hi], "base_point": x0}
// with each coefficient a leaf-indexed array.
AnalyticField parse_polynomial_field(const Json& config, const FilteredTree& tree,
                                     const LeafMeasure& p);

std::string format_double(double x);

Decision decision_from_string(const std::string& s);

// RFC-4180 with header x,verdict,failing_node_count,min_singular_value and,
// when requested, density_deviation.
void write_scan_csv(std::ostream& out, const ExceptionReport& report, bool with_deviation = false);
std::vector<GridRow> read_scan_csv(std::istream& in);

Json report_summary(const ExceptionReport& report);

struct PlotOptions {
  std::string title;
  bool log_x = false;
  bool deviation_curve = false;  // draw ||dQ/dP - 1|| on a second axis
};

// Verdict strip over x plus optional deviation curve.
void write_scan_svg(std::ostream& out, const ExceptionReport& report, const PlotOptions& options);

}  // namespace mrplab
