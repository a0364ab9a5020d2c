#include "rsma/conic/program.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace rsma::conic {

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double scale) {
  for (auto& t : terms) t.coeff *= scale;
  constant *= scale;
  return *this;
}

double AffineExpr::evaluate(std::span<const double> x) const {
  double value = constant;
  for (const auto& t : terms) value += t.coeff * x[static_cast<std::size_t>(t.var)];
  return value;
}

AffineExpr operator+(AffineExpr lhs, const AffineExpr& rhs) {
  lhs += rhs;
  return lhs;
}

AffineExpr operator-(AffineExpr lhs, const AffineExpr& rhs) {
  for (const auto& t : rhs.terms) lhs.terms.push_back({t.var, -t.coeff});
  lhs.constant -= rhs.constant;
  return lhs;
}

AffineExpr operator*(double scale, AffineExpr expr) {
  expr *= scale;
  return expr;
}

ConicProgram::ConicProgram(int num_vars) {
  if (num_vars < 0) throw std::invalid_argument("ConicProgram: negative variable count");
  objective_.assign(static_cast<std::size_t>(num_vars), 0.0);
}

int ConicProgram::add_variable(double objective_coeff) {
  objective_.push_back(objective_coeff);
  return num_vars() - 1;
}

void ConicProgram::set_objective(int var, double coeff) {
  objective_.at(static_cast<std::size_t>(var)) = coeff;
}

void ConicProgram::add_equality(AffineExpr lhs, const AffineExpr& rhs) {
  AffineExpr diff = std::move(lhs) - rhs;
  linear_eq_.push_back({std::move(diff.terms), -diff.constant});
}

void ConicProgram::add_less_equal(AffineExpr lhs, const AffineExpr& rhs) {
  AffineExpr diff = std::move(lhs) - rhs;
  linear_ineq_.push_back({std::move(diff.terms), -diff.constant});
}

void ConicProgram::add_rotated_soc(const AffineExpr& a, const AffineExpr& b,
                                   std::vector<AffineExpr> u) {
  SocBlock block;
  block.bound = 0.5 * (a + b);
  u.push_back(0.5 * (a - b));
  block.entries = std::move(u);
  add_soc(std::move(block));
}

namespace {

void check_terms(const std::vector<LinearTerm>& terms, int num_vars, const char* where) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_vars) {
      throw std::invalid_argument(std::string(where) + ": variable index out of range");
    }
    if (!std::isfinite(t.coeff)) throw std::invalid_argument(std::string(where) + ": non-finite coefficient");
  }
}

void check_expr(const AffineExpr& e, int num_vars, const char* where) {
  check_terms(e.terms, num_vars, where);
  if (!std::isfinite(e.constant)) throw std::invalid_argument(std::string(where) + ": non-finite constant");
}

}  // namespace

void ConicProgram::validate() const {
  const int n = num_vars();
  for (double c : objective_) {
    if (!std::isfinite(c)) throw std::invalid_argument("objective: non-finite coefficient");
  }
  for (const auto& row : linear_eq_) {
    check_terms(row.coeffs, n, "linear_eq");
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("linear_eq: non-finite rhs");
  }
  for (const auto& row : linear_ineq_) {
    check_terms(row.coeffs, n, "linear_ineq");
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("linear_ineq: non-finite rhs");
  }
  for (const auto& block : soc_blocks_) {
    check_expr(block.bound, n, "soc");
    for (const auto& e : block.entries) check_expr(e, n, "soc");
  }
  for (const auto& block : exp_blocks_) {
    check_expr(block.x1, n, "exp");
    check_expr(block.x2, n, "exp");
    check_expr(block.x3, n, "exp");
  }
}

double ConicProgram::objective_value(std::span<const double> x) const {
  double value = 0.0;
  for (std::size_t i = 0; i < objective_.size(); ++i) value += objective_[i] * x[i];
  return value;
}

namespace {

using nlohmann::json;

json terms_to_json(const std::vector<LinearTerm>& terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back({t.var, t.coeff});
  return out;
}

std::vector<LinearTerm> terms_from_json(const json& j) {
  std::vector<LinearTerm> terms;
  for (const auto& t : j) terms.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
  return terms;
}

json expr_to_json(const AffineExpr& e) {
  return {{"terms", terms_to_json(e.terms)}, {"constant", e.constant}};
}

AffineExpr expr_from_json(const json& j) {
  return AffineExpr(terms_from_json(j.at("terms")), j.at("constant").get<double>());
}

json rows_to_json(const std::vector<LinearRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back({{"a", terms_to_json(r.coeffs)}, {"b", r.rhs}});
  return out;
}

std::vector<LinearRow> rows_from_json(const json& j) {
  std::vector<LinearRow> rows;
  for (const auto& r : j) rows.push_back({terms_from_json(r.at("a")), r.at("b").get<double>()});
  return rows;
}

}  // namespace

std::string program_to_json(const ConicProgram& program) {
  json soc = json::array();
  for (const auto& b : program.soc_blocks()) {
    json entries = json::array();
    for (const auto& e : b.entries) entries.push_back(expr_to_json(e));
    soc.push_back({{"bound", expr_to_json(b.bound)}, {"entries", entries}});
  }
  json exp = json::array();
  for (const auto& b : program.exp_blocks()) {
    exp.push_back({{"x1", expr_to_json(b.x1)}, {"x2", expr_to_json(b.x2)}, {"x3", expr_to_json(b.x3)}});
  }
  json out = {{"num_vars", program.num_vars()},
              {"objective", program.objective()},
              {"linear_eq", rows_to_json(program.linear_eq())},
              {"linear_ineq", rows_to_json(program.linear_ineq())},
              {"soc_blocks", soc},
              {"exp_blocks", exp}};
  return out.dump(1);
}

ConicProgram program_from_json(const std::string& text) {
  const json j = json::parse(text);
  ConicProgram program(j.at("num_vars").get<int>());
  program.objective() = j.at("objective").get<std::vector<double>>();
  program.linear_eq() = rows_from_json(j.at("linear_eq"));
  program.linear_ineq() = rows_from_json(j.at("linear_ineq"));
  for (const auto& b : j.at("soc_blocks")) {
    SocBlock block;
    block.bound = expr_from_json(b.at("bound"));
    for (const auto& e : b.at("entries")) block.entries.push_back(expr_from_json(e));
    program.add_soc(std::move(block));
  }
  for (const auto& b : j.at("exp_blocks")) {
    program.add_exp({expr_from_json(b.at("x1")), expr_from_json(b.at("x2")), expr_from_json(b.at("x3"))});
  }
  program.validate();
  return program;
}

}  // namespace rsma::conic
