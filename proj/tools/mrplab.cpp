#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrplab/io.hpp"
#include "mrplab/random.hpp"

using namespace mrplab;

namespace {

enum Exit { kOk = 0, kInput = 1, kFails = 2, kMarginal = 3, kReference = 4 };

struct Common {
  std::string config;
  std::string out;
  std::size_t grid = 0;
  std::uint64_t seed = 1;
  double tol = kRankTolerance;
  std::string format = "csv";
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json verdict_json(const MrpVerdict& v) {
  Json j;
  j["has_mrp"] = v.has_mrp;
  j["marginal"] = v.marginal;
  j["min_singular_value"] = v.min_singular_value;
  Json nodes = Json::array();
  for (const FailingNode& f : v.failing_nodes)
    nodes.push_back({{"node", f.node}, {"rank", f.rank_found}, {"required", f.rank_required}});
  j["failing_nodes"] = nodes;
  if (v.method == MrpMethod::Jacod) j["null_space_dim"] = v.null_space_dim;
  return j;
}

int decision_exit(Decision d) {
  switch (d) {
    case Decision::Pass: return kOk;
    case Decision::Fail: return kFails;
    default: return kMarginal;
  }
}

int scan_exit(const ExceptionReport& r) { return r.disagree > 0 ? kMarginal : kOk; }

std::filesystem::path out_dir(const Common& c) {
  std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

// Writes CSV, JSON and SVG into --out, or the selected format to stdout.
void emit_scan(const Common& c, const std::string& name, const ExceptionReport& report,
               const Json& summary, const PlotOptions& plot, bool with_deviation) {
  std::ostringstream csv;
  write_scan_csv(csv, report, with_deviation);
  if (!c.out.empty()) {
    const auto dir = out_dir(c);
    write_file(dir / (name + ".csv"), csv.str());
    write_file(dir / (name + ".json"), summary.dump(2) + "\n");
    std::ostringstream svg;
    write_scan_svg(svg, report, plot);
    write_file(dir / (name + ".svg"), svg.str());
    std::cout << summary.dump(2) << "\n";
    return;
  }
  if (c.format == "json")
    std::cout << summary.dump(2) << "\n";
  else
    std::cout << csv.str();
}

void emit_json(const Common& c, const std::string& name, const Json& j) {
  if (!c.out.empty()) write_file(out_dir(c) / (name + ".json"), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
}

Json require_config(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  return load_json(c.config);
}

int cmd_mrp(const Common& c) {
  const Json cfg = require_config(c);
  const FilteredTree tree = parse_tree(cfg);
  const LeafMeasure q = parse_measure(cfg, "measure", tree);
  if (!cfg.contains("psi")) throw ConfigError("missing key 'psi'");
  const Matrix psi = parse_leaf_matrix(cfg.at("psi"), tree, "psi");
  const AdaptedProcess s = martingale_from_terminal(tree, q, psi);
  const TripleVerdict t = check_mrp_all(tree, q, s, {.rank_tol = c.tol});
  Json j;
  j["decision"] = to_string(t.decision);
  j["has_mrp"] = t.decision == Decision::Pass;
  j["tolerance"] = c.tol;
  j["direct"] = verdict_json(t.direct);
  j["rank"] = verdict_json(t.rank);
  j["jacod"] = verdict_json(t.jacod);
  emit_json(c, "mrp", j);
  return decision_exit(t.decision);
}

int cmd_example1(const Common& c, int depth, std::vector<double> x_points, double lo, double hi) {
  if (depth < 1) throw ConfigError("--depth must be at least 1");
  if (depth > 16) throw ResourceError("--depth above 16 exceeds the leaf budget (65536 leaves)");
  if (x_points.empty())
    for (int n = 1; n <= depth; ++n) x_points.push_back(n);
  if (x_points.size() < static_cast<std::size_t>(depth))
    throw ConfigError("--x-points needs one value per step");
  x_points.resize(static_cast<std::size_t>(depth));
  const AnalyticField field = example1_instance(x_points, depth);
  ScanOptions opt;
  opt.points = c.grid ? c.grid : 2048;
  opt.lo = lo;
  opt.hi = hi > lo ? hi : *std::max_element(x_points.begin(), x_points.end()) + 2.0;
  opt.mrp.rank_tol = c.tol;
  const ExceptionReport report = scan_exception_set(field, opt);

  Json summary = report_summary(report);
  Json table = Json::array();
  for (std::size_t n = 0; n < x_points.size(); ++n) {
    Json row{{"step", n + 1}, {"x_n", x_points[n]}};
    double nearest = std::numeric_limits<double>::infinity();
    for (const ExceptionRoot& r : report.exact->roots)
      if (std::abs(r.x - x_points[n]) < std::abs(nearest - x_points[n])) nearest = r.x;
    row["exact_root"] = std::isfinite(nearest) ? Json(nearest) : Json(nullptr);
    row["abs_error"] = std::isfinite(nearest) ? Json(std::abs(nearest - x_points[n])) : Json(nullptr);
    table.push_back(row);
  }
  summary["comparison"] = table;
  emit_scan(c, "example1", report, summary, {.title = "Example 1 exception scan"}, false);
  return scan_exit(report);
}

int cmd_density_scan(const Common& c) {
  const Json cfg = require_config(c);
  const FilteredTree tree = parse_tree(cfg);
  const LeafMeasure p = parse_measure(cfg, "measure", tree);
  if (!cfg.contains("reference_measure")) throw ConfigError("missing key 'reference_measure'");
  const LeafMeasure r = parse_measure(cfg, "reference_measure", tree);
  if (!cfg.contains("psi")) throw ConfigError("missing key 'psi'");
  const Matrix psi = parse_leaf_matrix(cfg.at("psi"), tree, "psi");
  std::vector<double> eps{0.1, 0.01};
  if (cfg.contains("epsilons")) eps = cfg.at("epsilons").get<std::vector<double>>();
  const double x_min = cfg.value("x_min", 1e-2);
  const double x_max = cfg.value("x_max", 1e3);
  if (!(x_min > 0.0 && x_max > x_min)) throw ConfigError("need 0 < x_min < x_max");

  const AnalyticField field = theorem1_family(tree, p, r, psi, {.rank_tol = c.tol});
  ScanOptions opt;
  opt.points = c.grid ? c.grid : 512;
  opt.lo = x_min;
  opt.hi = x_max;
  opt.log_spaced = true;
  opt.mrp.rank_tol = c.tol;
  const ExceptionReport report = scan_exception_set(field, opt);

  Json summary = report_summary(report);
  Json targets = Json::array();
  for (double e : eps) {
    Json t{{"epsilon", e}};
    Json first = nullptr;
    for (const GridRow& row : report.rows)
      if (row.verdict == Decision::Pass && row.density_deviation <= e) {
        first = row.x;
        break;
      }
    // Smallest grid x from which every later point passes within epsilon.
    Json tail = nullptr;
    for (std::size_t i = report.rows.size(); i-- > 0;) {
      const GridRow& row = report.rows[i];
      if (row.verdict != Decision::Pass || row.density_deviation > e) break;
      tail = row.x;
    }
    t["first_x"] = first;
    t["tail_x"] = tail;
    targets.push_back(t);
  }
  summary["targets"] = targets;
  emit_scan(c, "density_scan", report, summary,
            {.title = "Density scan", .log_x = true, .deviation_curve = true}, true);
  return scan_exit(report);
}

int cmd_girsanov(const Common& c, int count) {
  if (count < 1) throw ConfigError("--count must be positive");
  Rng rng(c.seed);
  int passes = 0;
  Json failures = Json::array();
  for (int i = 0; i < count; ++i) {
    const FilteredTree tree = random_tree(rng);
    const LeafMeasure p = random_measure(tree, rng);
    const LeafMeasure q = i == 0 ? p : random_measure(tree, rng);
    std::uniform_int_distribution<int> dim(1, 3);
    const Matrix psi = random_terminal(tree, rng, dim(rng), 0.3);
    const AdaptedProcess x = martingale_from_terminal(tree, p, psi);
    const InvarianceReport rep =
        mrp_invariance_report(tree, p, x, q, {}, {.rank_tol = c.tol});
    if (rep.ok())
      ++passes;
    else
      failures.push_back({{"instance", i}, {"under_p", rep.verdict_under_p}, {"under_q", rep.verdict_under_q}});
  }
  Json j{{"seed", c.seed}, {"instances", count}, {"passes", passes}, {"failures", failures}};
  emit_json(c, "girsanov", j);
  return passes == count ? kOk : kFails;
}

int cmd_scan(const Common& c) {
  const Json cfg = require_config(c);
  const FilteredTree tree = parse_tree(cfg);
  const LeafMeasure p = parse_measure(cfg, "measure", tree);
  const AnalyticField field = parse_polynomial_field(cfg, tree, p);
  ScanOptions opt;
  opt.points = c.grid ? c.grid : 512;
  opt.mrp.rank_tol = c.tol;
  const ExceptionReport report = scan_exception_set(field, opt);
  Json summary = report_summary(report);
  const GridRow base = evaluate_point(field, field.base_point, opt);
  summary["base_point"] = {{"x", field.base_point}, {"verdict", to_string(base.verdict)}};
  emit_scan(c, "scan", report, summary, {.title = "Exception scan"}, false);
  return scan_exit(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Martingale representation lab on finite filtrations"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config, "Scenario JSON");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--grid", c.grid, "Grid points");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--tol", c.tol, "Relative rank tolerance");
    sub->add_option("--format", c.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* mrp = app.add_subcommand("mrp", "Check the MRP of E^Q[psi | F_t] with all three routes");
  add_common(mrp);
  int depth = 8;
  std::vector<double> x_points;
  double lo = 0.0, hi = 0.0;
  auto* ex1 = app.add_subcommand("example1", "Binary-tree affine field with exceptions at x_n");
  add_common(ex1);
  ex1->add_option("--depth", depth, "Tree depth N");
  ex1->add_option("--x-points", x_points, "Exception points x_1..x_N")->delimiter(',');
  ex1->add_option("--lo", lo, "Scan interval start");
  ex1->add_option("--hi", hi, "Scan interval end");
  auto* dens = app.add_subcommand("density-scan", "Scan the perturbation family towards P");
  add_common(dens);
  int count = 100;
  auto* gir = app.add_subcommand("girsanov", "MRP invariance under change of measure");
  add_common(gir);
  gir->add_option("--count", count, "Number of random instances");
  auto* scan = app.add_subcommand("scan", "Exception scan of a polynomial field");
  add_common(scan);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (mrp->parsed()) return cmd_mrp(c);
    if (ex1->parsed()) return cmd_example1(c, depth, x_points, lo, hi);
    if (dens->parsed()) return cmd_density_scan(c);
    if (gir->parsed()) return cmd_girsanov(c, count);
    if (scan->parsed()) return cmd_scan(c);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kReference;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kInput;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kInput;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInput;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
