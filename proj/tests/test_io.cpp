#include "helpers.hpp"

#include <sstream>

#include "mrplab/io.hpp"

using namespace testing;

TEST_CASE("scan CSV round-trips and re-checks") {
  const AnalyticField f = example1_instance({1.0, 2.0, 3.0}, 3);
  ScanOptions opt;
  opt.points = 41;
  opt.lo = 0;
  opt.hi = 4;
  const ExceptionReport rep = scan_exception_set(f, opt);
  std::stringstream csv;
  write_scan_csv(csv, rep);
  const std::string text = csv.str();
  CHECK(text.rfind("x,verdict,failing_node_count,min_singular_value\r\n", 0) == 0);
  const auto rows = read_scan_csv(csv);
  REQUIRE(rows.size() == rep.rows.size());
  Rng rng(41);
  std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
  for (int i = 0; i < 10; ++i) {
    const GridRow& r = rows[pick(rng)];
    const GridRow again = evaluate_point(f, r.x, opt);
    CHECK(again.verdict == r.verdict);
    CHECK(again.failing_node_count == r.failing_node_count);
    CHECK(again.min_singular_value == r.min_singular_value);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].x == rep.rows[i].x);
}

TEST_CASE("CSV reader handles quoting and rejects junk") {
  std::stringstream in("x,verdict,failing_node_count,min_singular_value\r\n\"1.5\",\"pass\",0,2\r\n");
  const auto rows = read_scan_csv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].x == 1.5);
  std::stringstream bad("x,verdict,failing_node_count,min_singular_value\n1,maybe,0,1\n");
  CHECK_THROWS(read_scan_csv(bad));
  std::stringstream ragged("x,verdict,failing_node_count,min_singular_value\n1,pass\n");
  CHECK_THROWS(read_scan_csv(ragged));
}

TEST_CASE("config parsing") {
  const Json cfg = Json::parse(R"({
    "shape": [[2], [2, 3]],
    "measure": [1, 1, 1, 1, 1],
    "psi": [[1, 0], [0, 1], [1, 1], [2, 0], [0, 2]],
    "field": {"kind": "polynomial", "zeta": [[1, 1, 1, 1, 1]],
              "xi": [[1, 2, 3, 4, 5], [0, 1, 0, 1, 0]], "domain": [-1, 1], "base_point": 0.5}
  })");
  const FilteredTree t = parse_tree(cfg);
  CHECK(t.num_leaves() == 5);
  CHECK(parse_measure(cfg, "measure", t)[0] == doctest::Approx(0.2));
  CHECK(parse_measure(cfg, "missing", t)[4] == doctest::Approx(0.2));
  const Matrix psi = parse_leaf_matrix(cfg.at("psi"), t, "psi");
  CHECK(psi.cols() == 2);
  const AnalyticField f = parse_polynomial_field(cfg, t, parse_measure(cfg, "measure", t));
  CHECK(f.degree() == 1);
  CHECK(f.base_point == 0.5);

  CHECK_THROWS_AS(parse_tree(Json::parse(R"({"branching": "two"})")), ConfigError);
  CHECK_THROWS_AS(parse_tree(Json::parse(R"({})")), ConfigError);
  CHECK_THROWS_AS(parse_measure(Json::parse(R"({"m": [1, 2]})"), "m", t), ConfigError);
  CHECK_THROWS_AS(parse_measure(Json::parse(R"({"m": [1, 0, 1, 1, 1]})"), "m", t), ConfigError);
  CHECK_THROWS_AS(parse_leaf_matrix(Json::parse(R"([[1], [1, 2], [1], [1], [1]])"), t, "psi"), ConfigError);
  CHECK_THROWS_AS(parse_polynomial_field(Json::parse(R"({"field": {"kind": "analytic"}})"), t,
                                         LeafMeasure::uniform(t)),
                  ConfigError);
}

TEST_CASE("summary and plot") {
  const AnalyticField f = example1_instance({1.0}, 1);
  ScanOptions opt;
  opt.points = 5;
  const ExceptionReport rep = scan_exception_set(f, opt);
  const Json j = report_summary(rep);
  CHECK(j["fail"] == 1);
  CHECK(j["exact"]["roots"][0]["x"] == 1.0);
  std::ostringstream svg;
  write_scan_svg(svg, rep, {.title = "t"});
  CHECK(svg.str().find("<svg") == 0);
  CHECK(svg.str().find("#d62828") != std::string::npos);
  CHECK(format_double(0.1) == "0.10000000000000001");
}
