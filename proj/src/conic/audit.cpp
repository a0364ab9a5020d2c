#include "rsma/conic/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsma::conic {

namespace {

double magnitude(const std::vector<LinearTerm>& terms, std::span<const double> x) {
  double total = 0.0;
  for (const auto& t : terms) total += std::abs(t.coeff * x[static_cast<std::size_t>(t.var)]);
  return total;
}

double dot(const std::vector<LinearTerm>& terms, std::span<const double> x) {
  double total = 0.0;
  for (const auto& t : terms) total += t.coeff * x[static_cast<std::size_t>(t.var)];
  return total;
}

}  // namespace

double AuditReport::worst() const { return std::max({linear_eq, linear_ineq, soc, exp}); }

AuditReport audit(const ConicProgram& program, std::span<const double> x) {
  AuditReport report;
  for (const auto& row : program.linear_eq()) {
    const double scale = 1.0 + std::abs(row.rhs) + magnitude(row.coeffs, x);
    report.linear_eq = std::max(report.linear_eq, std::abs(dot(row.coeffs, x) - row.rhs) / scale);
  }
  for (const auto& row : program.linear_ineq()) {
    const double scale = 1.0 + std::abs(row.rhs) + magnitude(row.coeffs, x);
    report.linear_ineq = std::max(report.linear_ineq, (dot(row.coeffs, x) - row.rhs) / scale);
  }
  for (const auto& block : program.soc_blocks()) {
    double sq = 0.0;
    for (const auto& e : block.entries) {
      const double v = e.evaluate(x);
      sq += v * v;
    }
    const double bound = block.bound.evaluate(x);
    const double norm = std::sqrt(sq);
    report.soc = std::max(report.soc, (norm - bound) / (1.0 + std::abs(bound) + norm));
  }
  for (const auto& block : program.exp_blocks()) {
    const double x1 = block.x1.evaluate(x);
    const double x2 = block.x2.evaluate(x);
    const double x3 = block.x3.evaluate(x);
    const double scale = 1.0 + std::abs(x1) + std::abs(x2) + std::abs(x3);
    double violation = 0.0;
    if (x2 > 0.0) {
      const double ratio = x3 / x2;
      const double lhs = ratio > 700.0 ? std::numeric_limits<double>::infinity() : x2 * std::exp(ratio);
      violation = lhs - x1;
    } else {
      // closure at x2 = 0: {x1 >= 0, x3 <= 0}
      violation = std::max({-x2, -x1, x3});
    }
    report.exp = std::max(report.exp, violation / scale);
  }
  return report;
}

}  // namespace rsma::conic
