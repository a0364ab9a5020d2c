#pragma once

#include "rsma/conic/program.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rsma::conic {

/// A complex N-vector stored as 2N consecutive real variables:
/// [Re p_0 .. Re p_{N-1}, Im p_0 .. Im p_{N-1}].
struct ComplexBlock {
  int offset = 0;
  int dim = 0;

  int re(int n) const { return offset + n; }
  int im(int n) const { return offset + dim + n; }
};

/// Re{h^H p} and Im{h^H p} as affine forms of the stacked real variables.
AffineExpr inner_real(const Eigen::VectorXcd& h, const ComplexBlock& p);
AffineExpr inner_imag(const Eigen::VectorXcd& h, const ComplexBlock& p);

/// Adds u with (1 + x, 1, u) in the exponential cone (u <= ln(1 + x)) and
/// the tie t = u / ln 2, so that t <= log2(1 + x). Returns the index of u.
int encode_log_lower(int x_index, int t_index, ConicProgram& program);

/// 1 + sum_i |h^H p_i|^2 <= sigma as one rotated second-order cone.
void encode_interference_bound(const Eigen::VectorXcd& h, const std::vector<ComplexBlock>& precoders,
                               int sigma_index, ConicProgram& program);

}  // namespace rsma::conic
