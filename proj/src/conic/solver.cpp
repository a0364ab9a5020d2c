#include "rsma/conic/solver.hpp"

#include "cones.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>

namespace rsma::conic {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kMaxIter:
      return "max_iter";
    case SolveStatus::kNumericalError:
      return "numerical_error";
  }
  return "unknown";
}

namespace {

using detail::Cone;
using detail::ConeKind;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// minimize c^T x  s.t.  A x = b,  G x + s = h,  s in K
struct StandardForm {
  int n = 0;
  int p = 0;
  int m = 0;
  VectorXd c, b, h;
  SparseMatrix A, G, abs_A, abs_G;
  std::vector<Cone> cones;
  int degree = 0;
  bool trivially_infeasible = false;
};

std::vector<LinearTerm> merged(const std::vector<LinearTerm>& terms) {
  std::map<int, double> acc;
  for (const auto& t : terms) acc[t.var] += t.coeff;
  std::vector<LinearTerm> out;
  for (const auto& [var, coeff] : acc) {
    if (coeff != 0.0) out.push_back({var, coeff});
  }
  return out;
}

double max_abs(const std::vector<LinearTerm>& terms) {
  double best = 0.0;
  for (const auto& t : terms) best = std::max(best, std::abs(t.coeff));
  return best;
}

StandardForm compile(const ConicProgram& program) {
  StandardForm form;
  form.n = program.num_vars();
  form.c = Eigen::Map<const VectorXd>(program.objective().data(), form.n);

  std::vector<Triplet> a_trip;
  std::vector<double> b_vals;
  for (const auto& row : program.linear_eq()) {
    auto terms = merged(row.coeffs);
    const double scale = max_abs(terms);
    if (scale == 0.0) {
      // empty row: 0 = b
      if (std::abs(row.rhs) > 1e-12) form.trivially_infeasible = true;
      continue;
    }
    const int r = static_cast<int>(b_vals.size());
    for (const auto& t : terms) a_trip.emplace_back(r, t.var, t.coeff / scale);
    b_vals.push_back(row.rhs / scale);
  }
  form.p = static_cast<int>(b_vals.size());
  form.b = Eigen::Map<VectorXd>(b_vals.data(), form.p);

  std::vector<Triplet> g_trip;
  std::vector<double> h_vals;
  auto push_row = [&](const std::vector<LinearTerm>& terms, double sign, double rhs) {
    const int r = static_cast<int>(h_vals.size());
    for (const auto& t : terms) g_trip.emplace_back(r, t.var, sign * t.coeff);
    h_vals.push_back(rhs);
  };

  // s = b - a^T x >= 0
  int lp_rows = 0;
  for (const auto& row : program.linear_ineq()) {
    auto terms = merged(row.coeffs);
    const double scale = max_abs(terms);
    if (scale == 0.0) {
      if (row.rhs < -1e-12) form.trivially_infeasible = true;
      continue;
    }
    for (auto& t : terms) t.coeff /= scale;
    push_row(terms, 1.0, row.rhs / scale);
    ++lp_rows;
  }
  if (lp_rows > 0) form.cones.push_back({ConeKind::kNonneg, 0, lp_rows});

  // cone entries e(x) = g^T x + g0 become s = g0 - (-g)^T x
  auto push_expr = [&](const AffineExpr& e) { push_row(merged(e.terms), -1.0, e.constant); };
  for (const auto& block : program.soc_blocks()) {
    const int offset = static_cast<int>(h_vals.size());
    push_expr(block.bound);
    for (const auto& e : block.entries) push_expr(e);
    form.cones.push_back({ConeKind::kSoc, offset, static_cast<int>(block.entries.size()) + 1});
  }
  for (const auto& block : program.exp_blocks()) {
    const int offset = static_cast<int>(h_vals.size());
    push_expr(block.x1);
    push_expr(block.x2);
    push_expr(block.x3);
    form.cones.push_back({ConeKind::kExp, offset, 3});
  }
  form.m = static_cast<int>(h_vals.size());
  form.h = Eigen::Map<VectorXd>(h_vals.data(), form.m);

  form.A.resize(form.p, form.n);
  form.A.setFromTriplets(a_trip.begin(), a_trip.end());
  form.G.resize(form.m, form.n);
  form.G.setFromTriplets(g_trip.begin(), g_trip.end());
  form.abs_A = form.A.cwiseAbs();
  form.abs_G = form.G.cwiseAbs();

  for (const auto& cone : form.cones) form.degree += detail::degree(cone);
  return form;
}

struct Iterate {
  VectorXd x, y, z, s;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Direction {
  VectorXd dx, dy, dz, ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

class InteriorPointSolver {
 public:
  InteriorPointSolver(const StandardForm& form, const SolverOptions& options)
      : f_(form), opt_(options) {}

  ConicSolution run();

 private:
  void initialize();
  void compute_scalings(double mu);
  void apply_w2(const VectorXd& v, VectorXd& out) const;
  void assemble_kkt(bool regularize, SparseMatrix& out) const;
  bool factor();
  VectorXd kkt_solve(const VectorXd& rhs) const;
  Direction solve_direction(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, double r4,
                            const VectorXd& rb, double rk) const;
  double max_step(const Direction& d) const;
  bool exp_interior(const VectorXd& s, const VectorXd& z) const;
  double exp_proximity(const VectorXd& s, const VectorXd& z, double mu) const;
  VectorXd combined_rb(const Direction& aff, double sigma, double mu) const;
  VectorXd centering_rb(double sigma, double mu) const;

  struct Measures {
    double pres = kInf;
    double dres = kInf;
    double gap = kInf;
    double pcost = 0.0;
    double dcost = 0.0;
    double merit() const { return std::max({pres, dres, gap}); }
  };
  Measures measure() const;
  ConicSolution finish(SolveStatus status, const Iterate& it, const Measures& m, int iterations) const;

  const StandardForm& f_;
  SolverOptions opt_;
  Iterate it_;

  // per-iteration scaling data
  VectorXd lp_w_;       // NT scaling for nonneg rows: sqrt(s/z)
  VectorXd lambda_;     // scaled point for symmetric cones (unused entries for exp)
  std::vector<detail::SocScaling> soc_;
  std::vector<Eigen::Matrix3d> exp_w2_;  // inverse of the exp-cone scaling Hc
  std::vector<Eigen::Vector3d> exp_grad_;
  // quasi-definite KKT [[0, A^T, G^T], [A, 0, 0], [G, 0, -W^2]]; the factor
  // carries a small static shift on the first two blocks and is refined
  // against the exact matrix
  SparseMatrix kkt_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  VectorXd tau_part_;  // K^{-1} [-c; b; h]
};

void InteriorPointSolver::initialize() {
  it_.x = VectorXd::Zero(f_.n);
  it_.y = VectorXd::Zero(f_.p);
  it_.s = VectorXd::Zero(f_.m);
  for (const auto& cone : f_.cones) {
    switch (cone.kind) {
      case ConeKind::kNonneg:
        it_.s.segment(cone.offset, cone.dim).setOnes();
        break;
      case ConeKind::kSoc:
        it_.s[cone.offset] = 1.0;
        break;
      case ConeKind::kExp:
        for (int i = 0; i < 3; ++i) it_.s[cone.offset + i] = detail::kExpCentral[i];
        break;
    }
  }
  it_.z = it_.s;
  it_.tau = 1.0;
  it_.kappa = 1.0;
  soc_.clear();
  exp_w2_.clear();
  exp_grad_.clear();
  for (const auto& cone : f_.cones) {
    if (cone.kind == ConeKind::kSoc) soc_.emplace_back();
    if (cone.kind == ConeKind::kExp) {
      exp_w2_.emplace_back();
      exp_grad_.emplace_back();
    }
  }
}

void InteriorPointSolver::compute_scalings(double mu) {
  lambda_ = VectorXd::Zero(f_.m);
  std::size_t soc_idx = 0;
  std::size_t exp_idx = 0;
  for (const auto& cone : f_.cones) {
    const int o = cone.offset;
    switch (cone.kind) {
      case ConeKind::kNonneg:
        lp_w_ = (it_.s.segment(o, cone.dim).array() / it_.z.segment(o, cone.dim).array()).sqrt();
        lambda_.segment(o, cone.dim) =
            (it_.s.segment(o, cone.dim).array() * it_.z.segment(o, cone.dim).array()).sqrt();
        break;
      case ConeKind::kSoc: {
        auto& sc = soc_[soc_idx++];
        sc.compute(it_.s.data() + o, it_.z.data() + o, cone.dim);
        sc.apply(it_.z.data() + o, lambda_.data() + o, cone.dim);
        break;
      }
      case ConeKind::kExp:
        exp_grad_[exp_idx] = detail::exp_gradient(it_.s.data() + o);
        exp_w2_[exp_idx] = detail::exp_scaling(it_.s.data() + o, it_.z.data() + o, mu).w2;
        ++exp_idx;
        break;
    }
  }
}

void InteriorPointSolver::apply_w2(const VectorXd& v, VectorXd& out) const {
  out.resize(f_.m);
  std::size_t soc_idx = 0;
  std::size_t exp_idx = 0;
  VectorXd tmp;
  for (const auto& cone : f_.cones) {
    const int o = cone.offset;
    switch (cone.kind) {
      case ConeKind::kNonneg:
        out.segment(o, cone.dim) = v.segment(o, cone.dim).array() * lp_w_.array().square();
        break;
      case ConeKind::kSoc: {
        const auto& sc = soc_[soc_idx++];
        tmp.resize(cone.dim);
        sc.apply(v.data() + o, tmp.data(), cone.dim);
        sc.apply(tmp.data(), out.data() + o, cone.dim);
        break;
      }
      case ConeKind::kExp:
        out.segment<3>(o) = exp_w2_[exp_idx++] * v.segment<3>(o);
        break;
    }
  }
}

void InteriorPointSolver::assemble_kkt(bool regularize, SparseMatrix& out) const {
  constexpr double kReg = 1e-8;
  const int zo = f_.n + f_.p;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(2 * (f_.A.nonZeros() + f_.G.nonZeros()) + f_.n + f_.p + 4 * f_.m));
  for (int i = 0; i < f_.n; ++i) trip.emplace_back(i, i, regularize ? kReg : 0.0);
  for (int i = 0; i < f_.p; ++i) trip.emplace_back(f_.n + i, f_.n + i, regularize ? -kReg : 0.0);
  for (int col = 0; col < f_.A.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(f_.A, col); it; ++it) {
      trip.emplace_back(f_.n + static_cast<int>(it.row()), col, it.value());
      trip.emplace_back(col, f_.n + static_cast<int>(it.row()), it.value());
    }
  }
  for (int col = 0; col < f_.G.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(f_.G, col); it; ++it) {
      trip.emplace_back(zo + static_cast<int>(it.row()), col, it.value());
      trip.emplace_back(col, zo + static_cast<int>(it.row()), it.value());
    }
  }
  // -W^2 is already negative definite; shifting it would swamp tiny entries on active rows
  std::size_t soc_idx = 0;
  std::size_t exp_idx = 0;
  for (const auto& cone : f_.cones) {
    const int o = zo + cone.offset;
    switch (cone.kind) {
      case ConeKind::kNonneg:
        for (int i = 0; i < cone.dim; ++i) trip.emplace_back(o + i, o + i, -lp_w_[i] * lp_w_[i]);
        break;
      case ConeKind::kSoc: {
        const MatrixXd w2 = soc_[soc_idx++].scaling_squared();
        for (int i = 0; i < cone.dim; ++i) {
          for (int j = 0; j < cone.dim; ++j) trip.emplace_back(o + i, o + j, -w2(i, j));
        }
        break;
      }
      case ConeKind::kExp: {
        const Eigen::Matrix3d& w2 = exp_w2_[exp_idx++];
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) trip.emplace_back(o + i, o + j, -0.5 * (w2(i, j) + w2(j, i)));
        }
        break;
      }
    }
  }
  const int dim = f_.n + f_.p + f_.m;
  out.resize(dim, dim);
  out.setFromTriplets(trip.begin(), trip.end());
}

bool InteriorPointSolver::factor() {
  SparseMatrix regularized;
  assemble_kkt(true, regularized);
  assemble_kkt(false, kkt_);
  if (!analyzed_) {
    ldlt_.analyzePattern(regularized);
    analyzed_ = true;
  }
  ldlt_.factorize(regularized);
  if (ldlt_.info() != Eigen::Success) return false;
  VectorXd rhs(f_.n + f_.p + f_.m);
  rhs << -f_.c, f_.b, f_.h;
  tau_part_ = kkt_solve(rhs);
  return tau_part_.allFinite();
}

VectorXd InteriorPointSolver::kkt_solve(const VectorXd& rhs) const {
  VectorXd sol = ldlt_.solve(rhs);
  const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
  double previous = kInf;
  for (int refine = 0; refine < 20; ++refine) {
    const VectorXd residual = rhs - kkt_ * sol;
    const double norm = residual.lpNorm<Eigen::Infinity>();
    if (norm <= 1e-14 * scale || norm > 0.9 * previous) break;
    previous = norm;
    sol += ldlt_.solve(residual);
  }
  return sol;
}

// Solves the linearized embedding
//   A^T dy + G^T dz + c dtau = r1
//   -A dx + b dtau = r2
//   -G dx + h dtau - ds = r3
//   -c^T dx - b^T dy - h^T dz - dkappa = r4
//   dz + Hc ds = rb
//   kappa dtau + tau dkappa = rk
Direction InteriorPointSolver::solve_direction(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3,
                                               double r4, const VectorXd& rb, double rk) const {
  VectorXd w2_rb;
  apply_w2(rb, w2_rb);
  VectorXd rhs(f_.n + f_.p + f_.m);
  rhs << r1, -r2, -r3 - w2_rb;
  const VectorXd u = kkt_solve(rhs);
  const auto& t = tau_part_;
  const double numerator = r4 + rk / it_.tau + f_.c.dot(u.head(f_.n)) + f_.b.dot(u.segment(f_.n, f_.p)) +
                           f_.h.dot(u.tail(f_.m));
  const double denominator = -f_.c.dot(t.head(f_.n)) - f_.b.dot(t.segment(f_.n, f_.p)) - f_.h.dot(t.tail(f_.m)) +
                             it_.kappa / it_.tau;
  Direction d;
  d.dtau = numerator / denominator;
  d.dx = u.head(f_.n) + d.dtau * t.head(f_.n);
  d.dy = u.segment(f_.n, f_.p) + d.dtau * t.segment(f_.n, f_.p);
  d.dz = u.tail(f_.m) + d.dtau * t.tail(f_.m);
  // from the feasibility row, so rounding lands in the complementarity row
  d.ds = -(f_.G * d.dx) + f_.h * d.dtau - r3;
  d.dkappa = (rk - it_.kappa * d.dtau) / it_.tau;
  return d;
}

bool InteriorPointSolver::exp_interior(const VectorXd& s, const VectorXd& z) const {
  for (const auto& cone : f_.cones) {
    if (cone.kind != ConeKind::kExp) continue;
    if (!detail::exp_primal_interior(s.data() + cone.offset)) return false;
    if (!detail::exp_dual_interior(z.data() + cone.offset)) return false;
  }
  return true;
}

// max over exp blocks of ||z + mu grad F(s)||_{H(s)^{-1}} / mu
double InteriorPointSolver::exp_proximity(const VectorXd& s, const VectorXd& z, double mu) const {
  double worst = 0.0;
  for (const auto& cone : f_.cones) {
    if (cone.kind != ConeKind::kExp) continue;
    const double* sb = s.data() + cone.offset;
    const Eigen::Vector3d r = Eigen::Vector3d(z.segment<3>(cone.offset)) + mu * detail::exp_gradient(sb);
    const double norm_sq = r.dot(detail::exp_hessian_inverse(sb) * r);
    worst = std::max(worst, std::sqrt(std::max(norm_sq, 0.0)) / mu);
  }
  return worst;
}

double InteriorPointSolver::max_step(const Direction& d) const {
  double alpha = 1.0 / opt_.step_fraction;  // allow a full step after the fraction is applied
  if (d.dtau < 0.0) alpha = std::min(alpha, -it_.tau / d.dtau);
  if (d.dkappa < 0.0) alpha = std::min(alpha, -it_.kappa / d.dkappa);
  for (const auto& cone : f_.cones) {
    const int o = cone.offset;
    switch (cone.kind) {
      case ConeKind::kNonneg:
        for (int i = o; i < o + cone.dim; ++i) {
          if (d.ds[i] < 0.0) alpha = std::min(alpha, -it_.s[i] / d.ds[i]);
          if (d.dz[i] < 0.0) alpha = std::min(alpha, -it_.z[i] / d.dz[i]);
        }
        break;
      case ConeKind::kSoc:
        alpha = std::min(alpha, detail::soc_max_step(it_.s.data() + o, d.ds.data() + o, cone.dim));
        alpha = std::min(alpha, detail::soc_max_step(it_.z.data() + o, d.dz.data() + o, cone.dim));
        break;
      case ConeKind::kExp:
        break;
    }
  }
  // exponential cones: backtrack until strictly interior
  VectorXd s_new(f_.m);
  VectorXd z_new(f_.m);
  for (int k = 0; k < 200; ++k) {
    s_new = it_.s + alpha * d.ds;
    z_new = it_.z + alpha * d.dz;
    if (exp_interior(s_new, z_new)) return alpha;
    alpha *= 0.8;
  }
  return 0.0;
}

VectorXd InteriorPointSolver::combined_rb(const Direction& aff, double sigma, double mu) const {
  VectorXd rb(f_.m);
  std::size_t soc_idx = 0;
  std::size_t exp_idx = 0;
  VectorXd w_dz, winv_ds, corr, target, tmp;
  for (const auto& cone : f_.cones) {
    const int o = cone.offset;
    const int dim = cone.dim;
    switch (cone.kind) {
      case ConeKind::kNonneg:
        for (int i = 0; i < dim; ++i) {
          const int r = o + i;
          const double w = lp_w_[i];
          const double lam = lambda_[r];
          const double correction = (w * aff.dz[r]) * (aff.ds[r] / w);
          // W^{-1} (lambda \ (sigma mu - lambda^2 - correction))
          rb[r] = ((sigma * mu - lam * lam - correction) / lam) / w;
        }
        break;
      case ConeKind::kSoc: {
        const auto& sc = soc_[soc_idx++];
        w_dz.resize(dim);
        winv_ds.resize(dim);
        corr.resize(dim);
        target.resize(dim);
        tmp.resize(dim);
        sc.apply(aff.dz.data() + o, w_dz.data(), dim);
        sc.apply_inverse(aff.ds.data() + o, winv_ds.data(), dim);
        detail::soc_product(w_dz.data(), winv_ds.data(), corr.data(), dim);
        detail::soc_product(lambda_.data() + o, lambda_.data() + o, target.data(), dim);
        target = -target - corr;
        target[0] += sigma * mu;
        detail::soc_divide(lambda_.data() + o, target.data(), tmp.data(), dim);
        sc.apply_inverse(tmp.data(), rb.data() + o, dim);
        break;
      }
      case ConeKind::kExp:
      {
        // second-order correction from the affine step
        const double* sb = it_.s.data() + o;
        const Eigen::Vector3d ds_aff = aff.ds.segment<3>(o);
        const Eigen::Vector3d h_inv_dz = detail::exp_hessian_inverse(sb) * aff.dz.segment<3>(o);
        rb.segment<3>(o) = -it_.z.segment<3>(o) - sigma * mu * exp_grad_[exp_idx++] +
                           0.5 * detail::exp_third_order(sb, ds_aff, h_inv_dz);
      }
        break;
    }
  }
  return rb;
}

// rb without the second-order correction
VectorXd InteriorPointSolver::centering_rb(double sigma, double mu) const {
  Direction zero;
  zero.dz = VectorXd::Zero(f_.m);
  zero.ds = VectorXd::Zero(f_.m);
  return combined_rb(zero, sigma, mu);
}

InteriorPointSolver::Measures InteriorPointSolver::measure() const {
  Measures m;
  const double tau = it_.tau;
  const VectorXd x = it_.x / tau;
  const VectorXd y = it_.y / tau;
  const VectorXd z = it_.z / tau;
  const VectorXd s = it_.s / tau;

  m.pres = 0.0;
  if (f_.m > 0) {
    const VectorXd r = f_.G * x + s - f_.h;
    const VectorXd scale = VectorXd::Ones(f_.m) + f_.h.cwiseAbs();
    m.pres = std::max(m.pres, (r.cwiseAbs().array() / scale.array()).maxCoeff());
  }
  if (f_.p > 0) {
    const VectorXd r = f_.A * x - f_.b;
    const VectorXd scale = VectorXd::Ones(f_.p) + f_.b.cwiseAbs();
    m.pres = std::max(m.pres, (r.cwiseAbs().array() / scale.array()).maxCoeff());
  }
  m.dres = 0.0;
  if (f_.n > 0) {
    VectorXd r = f_.c;
    VectorXd scale = VectorXd::Ones(f_.n) + f_.c.cwiseAbs();
    if (f_.p > 0) {
      r += f_.A.transpose() * y;
      scale += f_.abs_A.transpose() * y.cwiseAbs();
    }
    if (f_.m > 0) {
      r += f_.G.transpose() * z;
      scale += f_.abs_G.transpose() * z.cwiseAbs();
    }
    m.dres = (r.cwiseAbs().array() / scale.array()).maxCoeff();
  }
  m.pcost = f_.c.dot(x);
  m.dcost = -(f_.b.dot(y) + f_.h.dot(z));
  const double complementarity = s.dot(z);
  m.gap = std::max(std::abs(complementarity), std::abs(m.pcost - m.dcost)) /
          (1.0 + std::abs(m.pcost) + std::abs(m.dcost));
  return m;
}

ConicSolution InteriorPointSolver::finish(SolveStatus status, const Iterate& it, const Measures& m,
                                          int iterations) const {
  ConicSolution sol;
  sol.status = status;
  sol.iterations = iterations;
  const double scale = status == SolveStatus::kInfeasible || status == SolveStatus::kUnbounded ? 1.0 : it.tau;
  sol.primal.resize(static_cast<std::size_t>(f_.n));
  for (int i = 0; i < f_.n; ++i) sol.primal[static_cast<std::size_t>(i)] = it.x[i] / scale;
  sol.objective_value = f_.c.dot(it.x / scale);
  sol.dual_objective = m.dcost;
  sol.max_primal_residual = m.pres;
  sol.max_dual_residual = m.dres;
  sol.duality_gap = m.gap;
  return sol;
}

ConicSolution InteriorPointSolver::run() {
  initialize();
  const double nu = static_cast<double>(f_.degree) + 1.0;
  Iterate best = it_;
  Measures best_measures;
  int stalled = 0;

  for (int iter = 0; iter <= opt_.max_iter; ++iter) {
    const Measures m = measure();
    if (opt_.verbose) {
      std::fprintf(stderr, "%3d pres %.2e dres %.2e gap %.2e pcost %+.6e tau %.2e kappa %.2e\n", iter, m.pres,
                   m.dres, m.gap, m.pcost, it_.tau, it_.kappa);
    }
    if (m.merit() < best_measures.merit()) {
      best = it_;
      best_measures = m;
    }
    if (m.pres <= opt_.tol && m.dres <= opt_.tol && m.gap <= opt_.tol) {
      return finish(SolveStatus::kOptimal, it_, m, iter);
    }

    // infeasibility certificates (scale-free in tau)
    const double by_hz = f_.b.dot(it_.y) + f_.h.dot(it_.z);
    if (by_hz < 0.0) {
      VectorXd aty = VectorXd::Zero(f_.n);
      if (f_.p > 0) aty += f_.A.transpose() * it_.y;
      if (f_.m > 0) aty += f_.G.transpose() * it_.z;
      const double norm_yz = std::max(it_.y.lpNorm<Eigen::Infinity>(), it_.z.lpNorm<Eigen::Infinity>());
      // residual relative to the size of the (unnormalized) certificate
      if (aty.lpNorm<Eigen::Infinity>() <= opt_.tol * std::max(-by_hz, norm_yz) &&
          -by_hz > opt_.tol * norm_yz && it_.tau < it_.kappa) {
        ConicSolution sol = finish(SolveStatus::kInfeasible, it_, m, iter);
        return sol;
      }
    }
    const double cx = f_.c.dot(it_.x);
    if (cx < 0.0) {
      VectorXd ax = f_.G * it_.x + it_.s;
      double res = f_.m > 0 ? ax.lpNorm<Eigen::Infinity>() : 0.0;
      if (f_.p > 0) res = std::max(res, (f_.A * it_.x).lpNorm<Eigen::Infinity>());
      const double norm_xs = std::max(it_.x.lpNorm<Eigen::Infinity>(), it_.s.lpNorm<Eigen::Infinity>());
      if (res <= opt_.tol * std::max(-cx, norm_xs) && -cx > opt_.tol * it_.x.lpNorm<Eigen::Infinity>() &&
          it_.tau < it_.kappa) {
        return finish(SolveStatus::kUnbounded, it_, m, iter);
      }
    }
    if (iter == opt_.max_iter) break;

    const double mu = (it_.s.dot(it_.z) + it_.tau * it_.kappa) / nu;
    if (!std::isfinite(mu) || mu <= 0.0) break;

    compute_scalings(mu);
    if (!factor()) break;

    const VectorXd rx = (f_.p > 0 ? VectorXd(f_.A.transpose() * it_.y) : VectorXd::Zero(f_.n)) +
                        f_.G.transpose() * it_.z + f_.c * it_.tau;
    const VectorXd ry = f_.b * it_.tau - f_.A * it_.x;
    const VectorXd rz = f_.h * it_.tau - f_.G * it_.x - it_.s;
    const double rt = -f_.c.dot(it_.x) - f_.b.dot(it_.y) - f_.h.dot(it_.z) - it_.kappa;

    // predictor
    const Direction aff = solve_direction(-rx, -ry, -rz, -rt, -it_.z, -it_.tau * it_.kappa);
    if (!aff.dx.allFinite() || !std::isfinite(aff.dtau)) break;
    const double alpha_aff = std::min(1.0, max_step(aff));
    double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);
    const double current_prox = exp_w2_.empty() ? 0.0 : exp_proximity(it_.s, it_.z, mu);

    // Combined predictor-corrector. When exponential cones force a short
    // step, retry with more centering; sigma = 1 is a pure centering step.
    Direction dir;
    double alpha = 0.0;
    for (const double floor_sigma : {0.0, 0.5, 1.0}) {
      if (floor_sigma > 0.0 && (exp_w2_.empty() || alpha >= 0.2)) break;
      const double sig = std::max(sigma, floor_sigma);
      const double eta = 1.0 - sig;
      const VectorXd rb = floor_sigma > 0.0 ? centering_rb(sig, mu) : combined_rb(aff, sig, mu);
      const double rk = sig * mu - it_.tau * it_.kappa - (floor_sigma > 0.0 ? 0.0 : aff.dtau * aff.dkappa);
      Direction trial_dir = solve_direction(-eta * rx, -eta * ry, -eta * rz, -eta * rt, rb, rk);
      if (!trial_dir.dx.allFinite() || !std::isfinite(trial_dir.dtau)) continue;
      double trial_alpha = std::min(1.0, opt_.step_fraction * max_step(trial_dir));
      // keep exponential-cone iterates near the central path
      if (!exp_w2_.empty()) {
        const double limit = std::max(0.9, current_prox);
        for (int k = 0; k < 30; ++k) {
          const VectorXd ts = it_.s + trial_alpha * trial_dir.ds;
          const VectorXd tz = it_.z + trial_alpha * trial_dir.dz;
          const double tt = it_.tau + trial_alpha * trial_dir.dtau;
          const double tk = it_.kappa + trial_alpha * trial_dir.dkappa;
          const double mu_trial = (ts.dot(tz) + tt * tk) / nu;
          if (exp_proximity(ts, tz, mu_trial) <= limit) break;
          trial_alpha *= 0.7;
        }
      }
      if (trial_alpha > alpha || floor_sigma == 0.0) {
        alpha = trial_alpha;
        dir = std::move(trial_dir);
        sigma = sig;
      }
    }
    if (!dir.dx.allFinite() || !std::isfinite(dir.dtau)) break;

    if (opt_.verbose) std::fprintf(stderr, "    sigma %.3f alpha_aff %.3f alpha %.3e\n", sigma, alpha_aff, alpha);
    if (alpha < 1e-12) {
      if (++stalled > 3) break;
    } else {
      stalled = 0;
    }
    it_.x += alpha * dir.dx;
    it_.y += alpha * dir.dy;
    it_.z += alpha * dir.dz;
    it_.s += alpha * dir.ds;
    it_.tau += alpha * dir.dtau;
    it_.kappa += alpha * dir.dkappa;

    // rescale the embedding to avoid drift
    const double norm = std::max(it_.tau, it_.kappa);
    if (norm > 1e6 || norm < 1e-6) {
      it_.x /= norm;
      it_.y /= norm;
      it_.z /= norm;
      it_.s /= norm;
      it_.tau /= norm;
      it_.kappa /= norm;
    }
  }
  const bool exhausted = best_measures.merit() < kInf;
  return finish(exhausted ? SolveStatus::kMaxIter : SolveStatus::kNumericalError, best, best_measures,
                opt_.max_iter);
}

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  program.validate();
  const StandardForm form = compile(program);
  if (form.trivially_infeasible) {
    ConicSolution sol;
    sol.status = SolveStatus::kInfeasible;
    sol.primal.assign(static_cast<std::size_t>(program.num_vars()), 0.0);
    return sol;
  }
  InteriorPointSolver solver(form, options);
  return solver.run();
}

}  // namespace rsma::conic
