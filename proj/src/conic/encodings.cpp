#include "rsma/conic/encodings.hpp"

#include <numbers>
#include <stdexcept>

namespace rsma::conic {

namespace {

void check_block(const Eigen::VectorXcd& h, const ComplexBlock& p, const ConicProgram& program) {
  if (h.size() != p.dim) throw std::invalid_argument("channel and precoder dimensions differ");
  if (p.offset < 0 || p.offset + 2 * p.dim > program.num_vars()) {
    throw std::invalid_argument("precoder block out of range");
  }
}

}  // namespace

// h^H p = sum_n (hr - j hi)(pr + j pi) = sum_n (hr pr + hi pi) + j (hr pi - hi pr)
AffineExpr inner_real(const Eigen::VectorXcd& h, const ComplexBlock& p) {
  AffineExpr e;
  for (int n = 0; n < p.dim; ++n) {
    e.add(p.re(n), h[n].real());
    e.add(p.im(n), h[n].imag());
  }
  return e;
}

AffineExpr inner_imag(const Eigen::VectorXcd& h, const ComplexBlock& p) {
  AffineExpr e;
  for (int n = 0; n < p.dim; ++n) {
    e.add(p.im(n), h[n].real());
    e.add(p.re(n), -h[n].imag());
  }
  return e;
}

int encode_log_lower(int x_index, int t_index, ConicProgram& program) {
  const int n = program.num_vars();
  if (x_index < 0 || x_index >= n || t_index < 0 || t_index >= n) {
    throw std::invalid_argument("encode_log_lower: invalid variable index");
  }
  const int u = program.add_variable();
  program.add_exp({AffineExpr({{x_index, 1.0}}, 1.0), AffineExpr(1.0), AffineExpr::variable(u)});
  program.add_equality(AffineExpr::variable(t_index, std::numbers::ln2), AffineExpr::variable(u));
  return u;
}

void encode_interference_bound(const Eigen::VectorXcd& h, const std::vector<ComplexBlock>& precoders,
                               int sigma_index, ConicProgram& program) {
  if (sigma_index < 0 || sigma_index >= program.num_vars()) {
    throw std::invalid_argument("encode_interference_bound: invalid sigma index");
  }
  std::vector<AffineExpr> parts;
  parts.reserve(2 * precoders.size());
  for (const auto& p : precoders) {
    check_block(h, p, program);
    parts.push_back(inner_real(h, p));
    parts.push_back(inner_imag(h, p));
  }
  // sum |h^H p_i|^2 <= (sigma - 1) * 1
  program.add_rotated_soc(AffineExpr({{sigma_index, 1.0}}, -1.0), AffineExpr(1.0), std::move(parts));
}

}  // namespace rsma::conic
