#include "cones.hpp"

#include <cmath>
#include <limits>

namespace rsma::conic::detail {

int degree(const Cone& cone) {
  switch (cone.kind) {
    case ConeKind::kNonneg:
      return cone.dim;
    case ConeKind::kSoc:
      return 1;
    case ConeKind::kExp:
      return 3;
  }
  return 0;
}

bool exp_primal_interior(const double* s) {
  if (!(s[0] > 0.0) || !(s[1] > 0.0)) return false;
  const double psi = s[1] * std::log(s[0] / s[1]) - s[2];
  return psi > 0.0 && std::isfinite(psi);
}

bool exp_dual_interior(const double* z) {
  if (!(z[0] > 0.0) || !(z[2] < 0.0)) return false;
  // z1 > -z3 exp(z2/z3 - 1), multiplied through by r = -z3 after taking logs
  const double r = -z[2];
  const double value = r * std::log(z[0] / r) + z[1] + r;
  return value > 0.0 && std::isfinite(value);
}

Eigen::Vector3d exp_gradient(const double* s) {
  const double log_ratio = std::log(s[0] / s[1]);
  const double psi = s[1] * log_ratio - s[2];
  const Eigen::Vector3d dpsi(s[1] / s[0], log_ratio - 1.0, -1.0);
  Eigen::Vector3d g = -dpsi / psi;
  g[0] -= 1.0 / s[0];
  g[1] -= 1.0 / s[1];
  return g;
}

Eigen::Matrix3d exp_hessian(const double* s) {
  const double log_ratio = std::log(s[0] / s[1]);
  const double psi = s[1] * log_ratio - s[2];
  const Eigen::Vector3d dpsi(s[1] / s[0], log_ratio - 1.0, -1.0);
  Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
  d2psi(0, 0) = -s[1] / (s[0] * s[0]);
  d2psi(0, 1) = d2psi(1, 0) = 1.0 / s[0];
  d2psi(1, 1) = -1.0 / s[1];
  Eigen::Matrix3d hess = dpsi * dpsi.transpose() / (psi * psi) - d2psi / psi;
  hess(0, 0) += 1.0 / (s[0] * s[0]);
  hess(1, 1) += 1.0 / (s[1] * s[1]);
  return hess;
}

// H = M + g g^T / psi^2 with g = grad psi and M zero in the third row, so
// H x = b reduces to a 2x2 solve with M's leading block.
Eigen::Matrix3d exp_hessian_inverse(const double* s) {
  const double s1 = s[0];
  const double s2 = s[1];
  const double log_ratio = std::log(s1 / s2);
  const double psi = s2 * log_ratio - s[2];
  const double g1 = s2 / s1;
  const double g2 = log_ratio - 1.0;
  const double a = s2 / (s1 * s1 * psi) + 1.0 / (s1 * s1);
  const double b = -1.0 / (s1 * psi);
  const double c = 1.0 / (s2 * psi) + 1.0 / (s2 * s2);
  // a c - b^2 without cancellation
  const double det = (2.0 * s2 + psi) / (s1 * s1 * s2 * s2 * psi);
  Eigen::Matrix2d m_inv;
  m_inv << c / det, -b / det, -b / det, a / det;
  Eigen::Matrix3d inv;
  for (int col = 0; col < 3; ++col) {
    const Eigen::Vector2d rhs = col < 2 ? Eigen::Vector2d::Unit(col) : Eigen::Vector2d(g1, g2);
    const Eigen::Vector2d x12 = m_inv * rhs;
    inv(0, col) = x12[0];
    inv(1, col) = x12[1];
    inv(2, col) = g1 * x12[0] + g2 * x12[1] + (col == 2 ? psi * psi : 0.0);
  }
  return 0.5 * (inv + inv.transpose());
}

Eigen::Vector3d exp_third_order(const double* s, const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const double log_ratio = std::log(s[0] / s[1]);
  const double psi = s[1] * log_ratio - s[2];
  const Eigen::Vector3d dpsi(s[1] / s[0], log_ratio - 1.0, -1.0);
  Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
  d2psi(0, 0) = -s[1] / (s[0] * s[0]);
  d2psi(0, 1) = d2psi(1, 0) = 1.0 / s[0];
  d2psi(1, 1) = -1.0 / s[1];
  // derivative of d2psi along u
  Eigen::Matrix3d d3psi = Eigen::Matrix3d::Zero();
  d3psi(0, 0) = 2.0 * s[1] / (s[0] * s[0] * s[0]) * u[0] - u[1] / (s[0] * s[0]);
  d3psi(0, 1) = d3psi(1, 0) = -u[0] / (s[0] * s[0]);
  d3psi(1, 1) = u[1] / (s[1] * s[1]);

  const double gu = dpsi.dot(u);
  const double gv = dpsi.dot(v);
  const Eigen::Vector3d hu = d2psi * u;
  const double psi2 = psi * psi;
  Eigen::Vector3d out = (hu * gv + dpsi * hu.dot(v)) / psi2 - 2.0 * dpsi * (gu * gv) / (psi2 * psi) -
                        d3psi * v / psi + d2psi * v * (gu / psi2);
  out[0] -= 2.0 * u[0] * v[0] / (s[0] * s[0] * s[0]);
  out[1] -= 2.0 * u[1] * v[1] / (s[1] * s[1] * s[1]);
  return out;
}

bool exp_conjugate_point(const double* z, const Eigen::Vector3d& start, Eigen::Vector3d& out) {
  Eigen::Vector3d u = start;
  if (!exp_primal_interior(u.data())) u = Eigen::Vector3d(kExpCentral[0], kExpCentral[1], kExpCentral[2]);
  const Eigen::Vector3d zv(z[0], z[1], z[2]);
  double decrement = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 60 && decrement > 1e-10; ++iter) {
    const Eigen::Vector3d residual = exp_gradient(u.data()) + zv;
    const Eigen::Matrix3d hess = exp_hessian(u.data());
    const Eigen::Vector3d step = -hess.ldlt().solve(residual);
    decrement = std::sqrt(std::max(0.0, -residual.dot(step)));
    if (!std::isfinite(decrement)) return false;
    // damped step stays interior for a self-concordant barrier
    const Eigen::Vector3d next = u + (decrement > 0.25 ? 1.0 / (1.0 + decrement) : 1.0) * step;
    if (!exp_primal_interior(next.data())) break;
    u = next;
  }
  // the decrement is affine invariant; roundoff keeps it near 1e-9 on badly scaled points
  if (!(decrement < 1e-6)) return false;
  out = u;
  return true;
}

ExpScaling exp_scaling(const double* s, const double* z, double mu) {
  const Eigen::Matrix3d hess = exp_hessian(s);
  ExpScaling fallback;
  fallback.hc = mu * hess;
  fallback.w2 = exp_hessian_inverse(s) / mu;
  const Eigen::Vector3d sv(s[0], s[1], s[2]);
  const Eigen::Vector3d zv(z[0], z[1], z[2]);
  const double sz = sv.dot(zv);
  if (!(sz > 0.0)) return fallback;
  const double mu_local = sz / 3.0;
  Eigen::Vector3d s_tilde;
  if (!exp_conjugate_point(z, sv / mu_local, s_tilde)) return fallback;
  const Eigen::Vector3d z_tilde = -exp_gradient(s);
  const double mu_tilde = s_tilde.dot(z_tilde);
  // mu * mu~ >= 3 with equality exactly on the central path
  if (!(mu_local * mu_tilde - 3.0 > 1e-5)) return fallback;
  const Eigen::Vector3d ds = sv - mu_local * s_tilde;
  const Eigen::Vector3d dz = zv - mu_local * z_tilde;
  const double dsdz = ds.dot(dz);
  if (!(dsdz > 0.0)) return fallback;

  // rank-one part of Hessian F(s) that annihilates s and s~
  Eigen::Vector3d axis = sv.cross(s_tilde);
  const double axis_norm = axis.norm();
  if (!(axis_norm > 0.0)) return fallback;
  axis /= axis_norm;
  const Eigen::Vector3d h_st = hess * s_tilde;
  const Eigen::Vector3d v = h_st - z_tilde * (mu_tilde / 3.0);
  const double v_den = s_tilde.dot(h_st) - mu_tilde * mu_tilde / 3.0;
  if (!(v_den > 0.0)) return fallback;
  const Eigen::Matrix3d reduced = hess - z_tilde * z_tilde.transpose() / 3.0 - v * v.transpose() / v_den;
  const double weight = mu_local * axis.dot(reduced * axis);
  if (!(weight > 0.0)) return fallback;

  // the inverse has the same shape with s and z swapped; its rank-one
  // direction is orthogonal to z and z~
  Eigen::Vector3d dual_axis = zv.cross(z_tilde);
  const double dual_norm = dual_axis.norm();
  if (!(dual_norm > 0.0)) return fallback;
  dual_axis /= dual_norm;
  const double overlap = axis.dot(dual_axis);
  if (!(std::abs(overlap) > 1e-12)) return fallback;

  ExpScaling out;
  out.primal_dual = true;
  out.hc = zv * zv.transpose() / sz + dz * dz.transpose() / dsdz + weight * axis * axis.transpose();
  out.w2 = sv * sv.transpose() / sz + ds * ds.transpose() / dsdz +
           dual_axis * dual_axis.transpose() / (weight * overlap * overlap);
  if (!out.hc.allFinite() || !out.w2.allFinite()) return fallback;
  return out;
}

double soc_max_step(const double* x, const double* d, int dim) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double x1d1 = 0.0;
  double d1d1 = 0.0;
  double x1x1 = 0.0;
  for (int i = 1; i < dim; ++i) {
    x1d1 += x[i] * d[i];
    d1d1 += d[i] * d[i];
    x1x1 += x[i] * x[i];
  }
  const double a = d[0] * d[0] - d1d1;
  const double b = 2.0 * (x[0] * d[0] - x1d1);
  const double c = x[0] * x[0] - x1x1;
  double alpha = kInf;
  if (d[0] < 0.0) alpha = -x[0] / d[0];
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
  if (std::abs(a) <= 1e-14 * scale) {
    if (b < 0.0) alpha = std::min(alpha, -c / b);
    return alpha;
  }
  const double disc = b * b - 4.0 * a * c;
  if (a < 0.0) {
    // concave with f(0) = c > 0: exactly one positive root
    const double root = std::sqrt(std::max(disc, 0.0));
    const double q = -0.5 * (b + std::copysign(root, b));
    const double r1 = q / a;
    const double r2 = c / q;
    const double pos = std::max(r1, r2);
    return std::min(alpha, pos);
  }
  if (disc < 0.0 || b >= 0.0) return alpha;
  const double q = -0.5 * (b - std::sqrt(disc));  // b < 0, so q > 0
  const double r1 = c / q;
  const double r2 = q / a;
  return std::min(alpha, std::min(r1, r2));
}

void SocScaling::compute(const double* s, const double* z, int dim) {
  double s_res = s[0] * s[0];
  double z_res = z[0] * z[0];
  for (int i = 1; i < dim; ++i) {
    s_res -= s[i] * s[i];
    z_res -= z[i] * z[i];
  }
  const double s_norm = std::sqrt(s_res);
  const double z_norm = std::sqrt(z_res);
  eta = std::sqrt(s_norm / z_norm);
  double dot = 0.0;
  for (int i = 0; i < dim; ++i) dot += (s[i] / s_norm) * (z[i] / z_norm);
  const double gamma = std::sqrt(0.5 * (1.0 + dot));
  w.resize(dim);
  w[0] = (s[0] / s_norm + z[0] / z_norm) / (2.0 * gamma);
  for (int i = 1; i < dim; ++i) w[i] = (s[i] / s_norm - z[i] / z_norm) / (2.0 * gamma);
  // renormalize so that w^T J w = 1 exactly
  const double tail = w.tail(dim - 1).squaredNorm();
  w[0] = std::sqrt(1.0 + tail);
}

void SocScaling::apply(const double* v, double* out, int dim) const {
  double w1v1 = 0.0;
  for (int i = 1; i < dim; ++i) w1v1 += w[i] * v[i];
  const double factor = w1v1 / (1.0 + w[0]) + v[0];
  out[0] = eta * (w[0] * v[0] + w1v1);
  for (int i = 1; i < dim; ++i) out[i] = eta * (v[i] + factor * w[i]);
}

void SocScaling::apply_inverse(const double* v, double* out, int dim) const {
  double w1v1 = 0.0;
  for (int i = 1; i < dim; ++i) w1v1 += w[i] * v[i];
  const double factor = w1v1 / (1.0 + w[0]) - v[0];
  out[0] = (w[0] * v[0] - w1v1) / eta;
  for (int i = 1; i < dim; ++i) out[i] = (v[i] + factor * w[i]) / eta;
}

Eigen::MatrixXd SocScaling::hessian() const {
  const int dim = static_cast<int>(w.size());
  Eigen::VectorXd jw = -w;
  jw[0] = w[0];
  Eigen::MatrixXd hess = 2.0 * jw * jw.transpose();
  hess(0, 0) -= 1.0;
  for (int i = 1; i < dim; ++i) hess(i, i) += 1.0;
  return hess / (eta * eta);
}

Eigen::MatrixXd SocScaling::scaling_squared() const {
  const int dim = static_cast<int>(w.size());
  Eigen::MatrixXd w2 = 2.0 * w * w.transpose();
  w2(0, 0) -= 1.0;
  for (int i = 1; i < dim; ++i) w2(i, i) += 1.0;
  return w2 * (eta * eta);
}

void soc_product(const double* x, const double* y, double* out, int dim) {
  double dot = 0.0;
  for (int i = 0; i < dim; ++i) dot += x[i] * y[i];
  for (int i = 1; i < dim; ++i) out[i] = x[0] * y[i] + y[0] * x[i];
  out[0] = dot;
}

void soc_divide(const double* lambda, const double* v, double* out, int dim) {
  double l1v1 = 0.0;
  double l1l1 = 0.0;
  for (int i = 1; i < dim; ++i) {
    l1v1 += lambda[i] * v[i];
    l1l1 += lambda[i] * lambda[i];
  }
  const double u0 = (lambda[0] * v[0] - l1v1) / (lambda[0] * lambda[0] - l1l1);
  out[0] = u0;
  for (int i = 1; i < dim; ++i) out[i] = (v[i] - u0 * lambda[i]) / lambda[0];
}

}  // namespace rsma::conic::detail
