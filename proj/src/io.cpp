#include "mrplab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mrplab {

namespace {

const Json& require(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return obj.at(key);
}

double number(const Json& v, const char* what) {
  if (!v.is_number()) throw ConfigError(std::string(what) + ": expected a number");
  return v.get<double>();
}

// Splits one RFC-4180 record; quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

FilteredTree parse_tree(const Json& config) {
  try {
    if (config.contains("shape")) return FilteredTree::from_shape(config.at("shape").get<std::vector<std::vector<int>>>());
    const auto branching = require(config, "branching").get<std::vector<int>>();
    return build_tree(branching);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("tree: ") + e.what());
  } catch (const MalformedFiltration& e) {
    throw ConfigError(std::string("tree: ") + e.what());
  }
}

LeafMeasure parse_measure(const Json& config, const char* key, const FilteredTree& tree) {
  if (!config.contains(key) || (config.at(key).is_string() && config.at(key) == "uniform"))
    return LeafMeasure::uniform(tree);
  const Json& w = config.at(key);
  if (!w.is_array() || w.size() != tree.num_leaves())
    throw ConfigError(std::string(key) + ": expected one weight per leaf");
  std::vector<double> weights;
  for (const auto& x : w) weights.push_back(number(x, key));
  try {
    return LeafMeasure::from_weights(tree, weights, {.normalize = true});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

Matrix parse_leaf_matrix(const Json& value, const FilteredTree& tree, const char* what) {
  if (!value.is_array() || value.size() != tree.num_leaves())
    throw ConfigError(std::string(what) + ": expected one entry per leaf");
  const bool vector_valued = value[0].is_array();
  const std::size_t d = vector_valued ? value[0].size() : 1;
  if (d == 0) throw ConfigError(std::string(what) + ": empty leaf value");
  Matrix out(static_cast<Eigen::Index>(value.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < value.size(); ++i) {
    const Json& row = value[i];
    if (vector_valued != row.is_array() || (vector_valued && row.size() != d))
      throw ConfigError(std::string(what) + ": inconsistent leaf dimensions");
    for (std::size_t j = 0; j < d; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          number(vector_valued ? row[j] : row, what);
  }
  return out;
}

AnalyticField parse_polynomial_field(const Json& config, const FilteredTree& tree,
                                     const LeafMeasure& p) {
  const Json& f = require(config, "field");
  const std::string kind = require(f, "kind").is_string() ? f.at("kind").get<std::string>() : "";
  if (kind != "polynomial") throw ConfigError("field.kind: expected \"polynomial\"");
  const Json& zeta = require(f, "zeta");
  const Json& xi = require(f, "xi");
  if (!zeta.is_array() || zeta.empty() || !xi.is_array() || xi.empty())
    throw ConfigError("field: zeta and xi must be non-empty coefficient lists");
  Matrix zc(static_cast<Eigen::Index>(tree.num_leaves()), static_cast<Eigen::Index>(zeta.size()));
  for (std::size_t j = 0; j < zeta.size(); ++j) {
    const Matrix c = parse_leaf_matrix(zeta[j], tree, "field.zeta");
    if (c.cols() != 1) throw ConfigError("field.zeta: coefficients must be scalar per leaf");
    zc.col(static_cast<Eigen::Index>(j)) = c.col(0);
  }
  std::vector<Matrix> xc;
  for (const auto& c : xi) {
    xc.push_back(parse_leaf_matrix(c, tree, "field.xi"));
    if (xc.back().cols() != xc.front().cols())
      throw ConfigError("field.xi: coefficients must share one dimension");
  }
  const Json& domain = require(f, "domain");
  if (!domain.is_array() || domain.size() != 2) throw ConfigError("field.domain: expected [lo, hi]");
  const double lo = number(domain[0], "field.domain");
  const double hi = number(domain[1], "field.domain");
  if (!(lo < hi)) throw ConfigError("field.domain: lo must be below hi");
  const double x0 = f.contains("base_point") ? number(f.at("base_point"), "field.base_point") : lo;
  return polynomial_field(tree, p, std::move(zc), std::move(xc), lo, hi, x0);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Decision decision_from_string(const std::string& s) {
  for (Decision d : {Decision::Pass, Decision::Fail, Decision::Marginal, Decision::Disagree})
    if (s == to_string(d)) return d;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

void write_scan_csv(std::ostream& out, const ExceptionReport& report, bool with_deviation) {
  out << "x,verdict,failing_node_count,min_singular_value";
  if (with_deviation) out << ",density_deviation";
  out << "\r\n";
  for (const GridRow& r : report.rows) {
    out << format_double(r.x) << ',' << to_string(r.verdict) << ',' << r.failing_node_count << ','
        << format_double(r.min_singular_value);
    if (with_deviation) out << ',' << format_double(r.density_deviation);
    out << "\r\n";
  }
}

std::vector<GridRow> read_scan_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  const auto header = split_record(line);
  if (header.size() < 4 || header[0] != "x" || header[1] != "verdict")
    throw std::invalid_argument("unexpected CSV header");
  std::vector<GridRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_record(line);
    if (f.size() != header.size()) throw std::invalid_argument("ragged CSV record");
    GridRow r;
    r.x = std::stod(f[0]);
    r.verdict = decision_from_string(f[1]);
    r.failing_node_count = std::stoul(f[2]);
    r.min_singular_value = std::stod(f[3]);
    if (f.size() > 4) r.density_deviation = std::stod(f[4]);
    rows.push_back(r);
  }
  return rows;
}

Json report_summary(const ExceptionReport& report) {
  Json j;
  j["points"] = report.rows.size();
  j["pass"] = report.pass;
  j["fail"] = report.fail;
  j["marginal"] = report.marginal;
  j["disagree"] = report.disagree;
  j["everywhere"] = report.everywhere;
  Json failures = Json::array();
  for (const GridRow& r : report.rows)
    if (r.verdict != Decision::Pass) failures.push_back(r.x);
  j["non_pass_points"] = failures;
  if (report.exact) {
    Json ex;
    ex["total_failure"] = report.exact->total_failure;
    ex["total_failure_nodes"] = report.exact->total_failure_nodes;
    Json roots = Json::array();
    for (const ExceptionRoot& r : report.exact->roots)
      roots.push_back({{"x", r.x}, {"multiplicity", r.multiplicity}, {"nodes", r.nodes}});
    ex["roots"] = roots;
    j["exact"] = ex;
  }
  return j;
}

void write_scan_svg(std::ostream& out, const ExceptionReport& report, const PlotOptions& options) {
  const double width = 800, height = 260, left = 60, right = 20, top = 40, strip = 40;
  const double plot_w = width - left - right;
  const double curve_top = top + strip + 30, curve_h = height - curve_top - 30;
  double lo = 0, hi = 1;
  if (!report.rows.empty()) {
    lo = report.rows.front().x;
    hi = report.rows.back().x;
  }
  const bool log_x = options.log_x && lo > 0;
  auto sx = [&](double x) {
    if (hi <= lo) return left + plot_w / 2;
    const double t = log_x ? (std::log(x) - std::log(lo)) / (std::log(hi) - std::log(lo))
                           : (x - lo) / (hi - lo);
    return left + t * plot_w;
  };
  auto colour = [](Decision d) {
    switch (d) {
      case Decision::Pass: return "#2a9d4b";
      case Decision::Fail: return "#d62828";
      case Decision::Marginal: return "#f4a261";
      case Decision::Disagree: return "#6a4c93";
    }
    return "#000000";
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"20\">" << options.title << "</text>\n";
  // Pass points first so failures stay visible on dense grids.
  for (int pass_layer = 1; pass_layer >= 0; --pass_layer) {
    for (const GridRow& r : report.rows) {
      if ((r.verdict == Decision::Pass) != (pass_layer == 1)) continue;
      const double x = sx(r.x);
      out << "<line x1=\"" << format_double(x) << "\" y1=\"" << top << "\" x2=\"" << format_double(x)
          << "\" y2=\"" << top + strip << "\" stroke=\"" << colour(r.verdict) << "\"/>\n";
    }
  }
  if (report.exact)
    for (const ExceptionRoot& r : report.exact->roots)
      out << "<circle cx=\"" << format_double(sx(r.x)) << "\" cy=\"" << top + strip + 8
          << "\" r=\"3\" fill=\"black\"/>\n";
  if (options.deviation_curve && !report.rows.empty()) {
    double dmax = 0;
    for (const GridRow& r : report.rows) dmax = std::max(dmax, r.density_deviation);
    if (dmax <= 0) dmax = 1;
    out << "<polyline fill=\"none\" stroke=\"#264653\" points=\"";
    for (const GridRow& r : report.rows)
      out << format_double(sx(r.x)) << ','
          << format_double(curve_top + curve_h * (1 - r.density_deviation / dmax)) << ' ';
    out << "\"/>\n";
    out << "<text x=\"5\" y=\"" << curve_top + 10 << "\">" << format_double(dmax) << "</text>\n";
  }
  out << "<text x=\"" << left << "\" y=\"" << height - 8 << "\">" << format_double(lo) << "</text>\n";
  out << "<text x=\"" << width - right << "\" y=\"" << height - 8 << "\" text-anchor=\"end\">"
      << format_double(hi) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace mrplab
