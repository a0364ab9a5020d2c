#pragma once

// Cone-local algebra shared by the interior-point solver: interior tests,
// step-to-boundary computations, Nesterov-Todd scalings for the symmetric
// cones and the logarithmic barrier of the exponential cone.

#include <Eigen/Dense>

namespace rsma::conic::detail {

enum class ConeKind { kNonneg, kSoc, kExp };

struct Cone {
  ConeKind kind = ConeKind::kNonneg;
  int offset = 0;
  int dim = 0;
};

/// Self-dual central point of F(s) = -log(s2 log(s1/s2) - s3) - log s1 - log s2,
/// i.e. s = -grad F(s).
inline constexpr double kExpCentral[3] = {1.2909277098578193, 0.80510200158467404, -0.82783839906662182};

/// Barrier degree contributed by a cone in the complementarity measure.
int degree(const Cone& cone);

bool exp_primal_interior(const double* s);
bool exp_dual_interior(const double* z);
Eigen::Vector3d exp_gradient(const double* s);
Eigen::Matrix3d exp_hessian(const double* s);
/// Inverse Hessian in closed form, accurate near the cone boundary.
Eigen::Matrix3d exp_hessian_inverse(const double* s);
/// Third derivative of the barrier contracted with u and v.
Eigen::Vector3d exp_third_order(const double* s, const Eigen::Vector3d& u, const Eigen::Vector3d& v);

/// Point s~ in the primal interior with -grad F(s~) = z (so grad F*(z) = -s~),
/// found by damped Newton on F(u) + z^T u from `start`. Returns false when
/// the iteration does not converge.
bool exp_conjugate_point(const double* z, const Eigen::Vector3d& start, Eigen::Vector3d& out);

/// Primal-dual scaling Hc with Hc s = z and Hc s~ = -grad F(s) for one
/// exponential cone, together with its inverse W^2. Falls back to
/// mu * Hessian F(s) near the central path or when the conjugate point is
/// unavailable.
struct ExpScaling {
  Eigen::Matrix3d hc;
  Eigen::Matrix3d w2;
  bool primal_dual = false;
};
ExpScaling exp_scaling(const double* s, const double* z, double mu);

/// Largest alpha with x + alpha d in the (closed) second-order cone; infinity when unbounded.
double soc_max_step(const double* x, const double* d, int dim);

/// Nesterov-Todd scaling for one second-order cone: W = eta * What, with
/// What = [[w0, w1^T], [w1, I + w1 w1^T / (1 + w0)]] and W z = W^{-1} s = lambda.
struct SocScaling {
  double eta = 1.0;
  Eigen::VectorXd w;  // unit vector, w^T J w = 1

  void compute(const double* s, const double* z, int dim);
  void apply(const double* v, double* out, int dim) const;          // W v
  void apply_inverse(const double* v, double* out, int dim) const;  // W^{-1} v
  /// W^{-2} = eta^{-2} (2 (J w)(J w)^T - J)
  Eigen::MatrixXd hessian() const;
  /// W^2 = eta^2 (2 w w^T - J), the inverse of hessian()
  Eigen::MatrixXd scaling_squared() const;
};

/// Jordan product x o y = (x^T y, x0 y1 + y0 x1).
void soc_product(const double* x, const double* y, double* out, int dim);
/// Solves lambda o u = v for u.
void soc_divide(const double* lambda, const double* v, double* out, int dim);

}  // namespace rsma::conic::detail
