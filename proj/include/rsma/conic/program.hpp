#pragma once

#include <span>
#include <string>
#include <vector>

namespace rsma::conic {

struct LinearTerm {
  int var = 0;
  double coeff = 0.0;

  bool operator==(const LinearTerm&) const = default;
};

/// sum_i coeff_i x_{var_i} + constant
struct AffineExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;

  AffineExpr() = default;
  AffineExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  AffineExpr(std::vector<LinearTerm> t, double c = 0.0) : terms(std::move(t)), constant(c) {}

  static AffineExpr variable(int var, double coeff = 1.0) { return AffineExpr({{var, coeff}}, 0.0); }

  AffineExpr& add(int var, double coeff) {
    terms.push_back({var, coeff});
    return *this;
  }
  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator*=(double scale);

  double evaluate(std::span<const double> x) const;

  bool operator==(const AffineExpr&) const = default;
};

AffineExpr operator+(AffineExpr lhs, const AffineExpr& rhs);
AffineExpr operator-(AffineExpr lhs, const AffineExpr& rhs);
AffineExpr operator*(double scale, AffineExpr expr);

/// a^T x (relation) b
struct LinearRow {
  std::vector<LinearTerm> coeffs;
  double rhs = 0.0;

  bool operator==(const LinearRow&) const = default;
};

/// ||entries||_2 <= bound
struct SocBlock {
  AffineExpr bound;
  std::vector<AffineExpr> entries;

  bool operator==(const SocBlock&) const = default;
};

/// (x1, x2, x3) in cl{ x2 * exp(x3 / x2) <= x1, x2 > 0 }
struct ExpBlock {
  AffineExpr x1;
  AffineExpr x2;
  AffineExpr x3;

  bool operator==(const ExpBlock&) const = default;
};

/// minimize c^T x subject to linear equalities, linear inequalities,
/// second-order cones and exponential cones, all over affine forms of x.
class ConicProgram {
 public:
  ConicProgram() = default;
  explicit ConicProgram(int num_vars);

  int add_variable(double objective_coeff = 0.0);
  int num_vars() const { return static_cast<int>(objective_.size()); }

  void set_objective(int var, double coeff);
  const std::vector<double>& objective() const { return objective_; }
  std::vector<double>& objective() { return objective_; }

  void add_equality(AffineExpr lhs, const AffineExpr& rhs = {});
  void add_less_equal(AffineExpr lhs, const AffineExpr& rhs = {});
  void add_greater_equal(const AffineExpr& lhs, AffineExpr rhs = {}) { add_less_equal(std::move(rhs), lhs); }
  void add_soc(SocBlock block) { soc_blocks_.push_back(std::move(block)); }
  void add_exp(ExpBlock block) { exp_blocks_.push_back(std::move(block)); }

  /// ||u||^2 <= a * b with a, b >= 0, encoded as ||(u, (a - b)/2)|| <= (a + b)/2.
  void add_rotated_soc(const AffineExpr& a, const AffineExpr& b, std::vector<AffineExpr> u);

  const std::vector<LinearRow>& linear_eq() const { return linear_eq_; }
  const std::vector<LinearRow>& linear_ineq() const { return linear_ineq_; }
  const std::vector<SocBlock>& soc_blocks() const { return soc_blocks_; }
  const std::vector<ExpBlock>& exp_blocks() const { return exp_blocks_; }

  std::vector<LinearRow>& linear_eq() { return linear_eq_; }
  std::vector<LinearRow>& linear_ineq() { return linear_ineq_; }
  std::vector<SocBlock>& soc_blocks() { return soc_blocks_; }
  std::vector<ExpBlock>& exp_blocks() { return exp_blocks_; }

  /// Throws std::invalid_argument when an index is out of range or a
  /// coefficient is not finite.
  void validate() const;

  double objective_value(std::span<const double> x) const;

  bool operator==(const ConicProgram&) const = default;

 private:
  std::vector<double> objective_;
  std::vector<LinearRow> linear_eq_;
  std::vector<LinearRow> linear_ineq_;
  std::vector<SocBlock> soc_blocks_;
  std::vector<ExpBlock> exp_blocks_;
};

/// Debug dump for offline inspection; program_from_json(program_to_json(p)) == p.
std::string program_to_json(const ConicProgram& program);
ConicProgram program_from_json(const std::string& text);

}  // namespace rsma::conic
