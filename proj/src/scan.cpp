#include <algorithm>
#include <cmath>
#include <exception>

#include "mrplab/fields.hpp"

namespace mrplab {

namespace {

std::optional<ExactLocus> exact_if_available(const AnalyticField& field) {
  if (field.kind != FieldKind::Polynomial) return std::nullopt;
  return exact_exception_locus(field);
}

ExceptionReport summarize(std::vector<GridRow> rows, std::optional<ExactLocus> exact) {
  ExceptionReport report;
  for (const GridRow& r : rows) {
    switch (r.verdict) {
      case Decision::Pass: ++report.pass; break;
      case Decision::Fail: ++report.fail; break;
      case Decision::Marginal: ++report.marginal; break;
      case Decision::Disagree: ++report.disagree; break;
    }
  }
  if (exact)
    report.everywhere = exact->total_failure;
  else
    report.everywhere = !rows.empty() && report.fail == rows.size();
  report.rows = std::move(rows);
  report.exact = std::move(exact);
  return report;
}

}  // namespace

GridRow evaluate_point(const AnalyticField& field, double x, const ScanOptions& options) {
  const FieldPoint fp = field_evaluate(field, x);
  GridRow row;
  row.x = x;
  row.density_deviation = density_deviation(field, x);
  if (options.oracles == Oracles::Direct) {
    const MrpVerdict v = check_mrp_direct(field.tree, fp.q, fp.s, options.mrp);
    row.verdict = v.marginal ? Decision::Marginal : (v.has_mrp ? Decision::Pass : Decision::Fail);
    row.failing_node_count = v.failing_nodes.size();
    row.min_singular_value = v.min_singular_value;
    return row;
  }
  const TripleVerdict t = check_mrp_all(field.tree, fp.q, fp.s, options.mrp);
  row.verdict = t.decision;
  row.failing_node_count = t.direct.failing_nodes.size();
  row.min_singular_value = t.direct.min_singular_value;
  return row;
}

std::vector<double> make_grid(const AnalyticField& field, const ScanOptions& options,
                              const std::optional<ExactLocus>& exact) {
  std::vector<double> grid = options.grid;
  if (grid.empty()) {
    double lo = options.lo;
    double hi = options.hi;
    bool log_spaced = options.log_spaced;
    if (!(hi > lo)) {
      if (field.kind == FieldKind::Exponential) {
        lo = 1e-2;
        hi = 1e3;
        log_spaced = true;
      } else {
        lo = field.domain_lo;
        hi = field.domain_hi;
      }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("scan grid needs a finite interval");
    if (log_spaced && !(lo > 0.0)) throw std::invalid_argument("log-spaced grid needs lo > 0");
    const std::size_t n = std::max<std::size_t>(options.points, 2);
    grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n - 1);
      grid[i] = log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                           : lo + t * (hi - lo);
    }
    grid.front() = lo;
    grid.back() = hi;
    if (options.include_exact && exact)
      for (const ExceptionRoot& r : exact->roots)
        if (r.x >= lo && r.x <= hi) grid.push_back(r.x);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

ExceptionReport scan_exception_set(const AnalyticField& field, const ScanOptions& options) {
  auto exact = exact_if_available(field);
  const std::vector<double> grid = make_grid(field, options, exact);
  std::vector<GridRow> rows(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  const auto n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      rows[static_cast<std::size_t>(i)] = evaluate_point(field, grid[static_cast<std::size_t>(i)], options);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return summarize(std::move(rows), std::move(exact));
}

ExceptionReport scan_exception_set_serial(const AnalyticField& field, const ScanOptions& options) {
  auto exact = exact_if_available(field);
  std::vector<GridRow> rows;
  for (double x : make_grid(field, options, exact)) rows.push_back(evaluate_point(field, x, options));
  return summarize(std::move(rows), std::move(exact));
}

}  // namespace mrplab
