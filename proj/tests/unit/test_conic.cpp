#include "conic/cones.hpp"
#include "rsma/conic/audit.hpp"
#include "rsma/conic/encodings.hpp"
#include "rsma/conic/solver.hpp"
#include "rsma/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace rsma::conic;
namespace detail = rsma::conic::detail;

namespace {

double finite_grad_component(const double* s, int i) {
  // derivative of the exp barrier along coordinate i
  auto barrier = [](const double* p) {
    return -std::log(p[1] * std::log(p[0] / p[1]) - p[2]) - std::log(p[0]) - std::log(p[1]);
  };
  double plus[3] = {s[0], s[1], s[2]};
  double minus[3] = {s[0], s[1], s[2]};
  const double step = 1e-6;
  plus[i] += step;
  minus[i] -= step;
  return (barrier(plus) - barrier(minus)) / (2.0 * step);
}

void check_optimal(const ConicProgram& program, const ConicSolution& sol, double tol = 1e-7) {
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(sol.max_primal_residual <= tol);
  CHECK(sol.max_dual_residual <= tol);
  CHECK(sol.duality_gap <= tol);
  CHECK(sol.objective_value == doctest::Approx(program.objective_value(sol.primal)).epsilon(1e-12));
  CHECK(sol.objective_value >= sol.dual_objective - tol * (1.0 + std::abs(sol.objective_value)));
  CHECK(audit(program, sol.primal).passes(tol));
}

}  // namespace

TEST_CASE("exponential cone barrier: central point, gradient and Hessian") {
  const double* e = detail::kExpCentral;
  const Eigen::Vector3d g = detail::exp_gradient(e);
  for (int i = 0; i < 3; ++i) CHECK(e[i] == doctest::Approx(-g[i]).epsilon(1e-9));
  CHECK(detail::exp_primal_interior(e));
  CHECK(detail::exp_dual_interior(e));

  const double s[3] = {2.0, 0.7, -0.4};
  REQUIRE(detail::exp_primal_interior(s));
  const Eigen::Vector3d grad = detail::exp_gradient(s);
  for (int i = 0; i < 3; ++i) CHECK(grad[i] == doctest::Approx(finite_grad_component(s, i)).epsilon(1e-6));
  const Eigen::Matrix3d hess = detail::exp_hessian(s);
  for (int j = 0; j < 3; ++j) {
    double plus[3] = {s[0], s[1], s[2]};
    double minus[3] = {s[0], s[1], s[2]};
    plus[j] += 1e-6;
    minus[j] -= 1e-6;
    const Eigen::Vector3d column = (detail::exp_gradient(plus) - detail::exp_gradient(minus)) / 2e-6;
    for (int i = 0; i < 3; ++i) CHECK(hess(i, j) == doctest::Approx(column[i]).epsilon(1e-5));
  }
  // log-homogeneity: s^T grad F(s) = -3
  CHECK(Eigen::Vector3d(s[0], s[1], s[2]).dot(grad) == doctest::Approx(-3.0));

  const double outside[3] = {1.0, 1.0, 0.5};  // 1 * e^{0.5} > 1
  CHECK_FALSE(detail::exp_primal_interior(outside));
  const double dual_outside[3] = {1.0, 1.0, 1.0};
  CHECK_FALSE(detail::exp_dual_interior(dual_outside));
}

TEST_CASE("exponential cone inverse Hessian") {
  rsma::RandomStream rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const double s1 = std::exp(3.0 * rng.standard_normal());
    const double s2 = 0.1 + 3.0 * rng.uniform();
    // distance to the boundary down to 1e-5; closer points lose digits in H itself
    const double gap = std::pow(10.0, -5.0 * rng.uniform());
    const double s[3] = {s1, s2, s2 * std::log(s1 / s2) - gap};
    REQUIRE(detail::exp_primal_interior(s));
    const Eigen::Matrix3d inv = detail::exp_hessian_inverse(s);
    CHECK((inv - inv.transpose()).norm() <= 1e-12 * inv.norm());
    CHECK(inv.llt().info() == Eigen::Success);
    // H s = -grad F(s) for a 3-logarithmically homogeneous barrier
    const Eigen::Vector3d back = inv * (-detail::exp_gradient(s));
    for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(s[i]).epsilon(1e-7).scale(1.0 + std::abs(s[i])));
    if (gap < 1e-2) continue;  // the forward Hessian is the inaccurate side here
    const Eigen::Matrix3d hess = detail::exp_hessian(s);
    const Eigen::Vector3d balance = hess.diagonal().cwiseSqrt();
    const Eigen::Matrix3d product = balance.cwiseInverse().asDiagonal() * hess * inv * balance.asDiagonal();
    CHECK((product - Eigen::Matrix3d::Identity()).norm() <= 1e-8);
  }
}

TEST_CASE("exponential cone barrier third derivative matches differenced Hessian") {
  rsma::RandomStream rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const double s1 = 0.2 + 3.0 * rng.uniform();
    const double s2 = 0.2 + 3.0 * rng.uniform();
    const double s[3] = {s1, s2, s2 * std::log(s1 / s2) - 0.1 - 2.0 * rng.uniform()};
    REQUIRE(detail::exp_primal_interior(s));
    const Eigen::Vector3d u(rng.standard_normal(), rng.standard_normal(), rng.standard_normal());
    const Eigen::Vector3d v(rng.standard_normal(), rng.standard_normal(), rng.standard_normal());
    const double h = 1e-6;
    double plus[3], minus[3];
    for (int i = 0; i < 3; ++i) {
      plus[i] = s[i] + h * u[i];
      minus[i] = s[i] - h * u[i];
    }
    const Eigen::Vector3d expected = (detail::exp_hessian(plus) - detail::exp_hessian(minus)) * v / (2.0 * h);
    const Eigen::Vector3d got = detail::exp_third_order(s, u, v);
    CHECK((got - expected).norm() <= 1e-5 * (1.0 + expected.norm()));
    // symmetric in its two arguments
    CHECK((got - detail::exp_third_order(s, v, u)).norm() <= 1e-9 * (1.0 + got.norm()));
  }
}

TEST_CASE("exponential cone primal-dual scaling maps s to z and s~ to z~") {
  rsma::RandomStream rng(5);
  int scaled = 0;
  for (int trial = 0; trial < 200; ++trial) {
    // random interior pair: s = (x2 e^{x3/x2} + slack, x2, x3), z from a random conjugate image
    const double x2 = 0.2 + 2.0 * rng.uniform();
    const double x3 = 2.0 * rng.standard_normal();
    const double s[3] = {x2 * std::exp(x3 / x2) + 0.05 + rng.uniform(), x2, x3};
    const double u[3] = {1.0 + 3.0 * rng.uniform(), 0.3 + rng.uniform(), rng.standard_normal()};
    if (!detail::exp_primal_interior(u)) continue;
    const Eigen::Vector3d zv = -detail::exp_gradient(u) * (0.2 + 3.0 * rng.uniform());
    REQUIRE(detail::exp_dual_interior(zv.data()));
    Eigen::Vector3d st;
    REQUIRE(detail::exp_conjugate_point(zv.data(), Eigen::Vector3d(1.0, 1.0, 0.0), st));
    const Eigen::Vector3d back = -detail::exp_gradient(st.data());
    for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(zv[i]).epsilon(1e-8));

    const double mu = Eigen::Vector3d(s[0], s[1], s[2]).dot(zv) / 3.0;
    const auto scaling = detail::exp_scaling(s, zv.data(), mu);
    const Eigen::Matrix3d& hc = scaling.hc;
    INFO("primal-dual ", scaling.primal_dual, " z ", zv[0], " ", zv[1], " ", zv[2], " s ", s[0], " ", s[1], " ", s[2]);
    // compare in the diagonally balanced frame; raw entries span many decades
    const Eigen::Vector3d balance = hc.diagonal().cwiseSqrt();
    const Eigen::Matrix3d round_trip =
        balance.cwiseInverse().asDiagonal() * hc * scaling.w2 * balance.asDiagonal();
    if (scaling.primal_dual) CHECK((round_trip - Eigen::Matrix3d::Identity()).norm() <= 1e-6);
    if (scaling.primal_dual) {
      const Eigen::Vector3d w2z = scaling.w2 * zv;
      for (int i = 0; i < 3; ++i) CHECK(w2z[i] == doctest::Approx(s[i]).epsilon(1e-7).scale(1.0 + std::abs(s[i])));
    }
    CHECK((hc - hc.transpose()).norm() <= 1e-9 * hc.norm());
    CHECK(hc.llt().info() == Eigen::Success);
    const Eigen::Vector3d sv(s[0], s[1], s[2]);
    const Eigen::Vector3d hs = hc * sv;
    const Eigen::Vector3d fallback = mu * detail::exp_hessian(s) * sv;
    if ((hs - fallback).norm() > 1e-9 * fallback.norm()) {
      ++scaled;
      for (int i = 0; i < 3; ++i) CHECK(hs[i] == doctest::Approx(zv[i]).epsilon(1e-7).scale(zv.norm()));
      const Eigen::Vector3d hst = hc * st;
      const Eigen::Vector3d zt = -detail::exp_gradient(s);
      for (int i = 0; i < 3; ++i) CHECK(hst[i] == doctest::Approx(zt[i]).epsilon(1e-7).scale(zt.norm()));
    }
  }
  CHECK(scaled > 50);
}

TEST_CASE("second-order cone Nesterov-Todd scaling") {
  rsma::RandomStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + trial % 6;
    Eigen::VectorXd s(dim), z(dim);
    for (int i = 1; i < dim; ++i) {
      s[i] = rng.standard_normal();
      z[i] = rng.standard_normal();
    }
    s[0] = s.tail(dim - 1).norm() + 0.1 + rng.uniform();
    z[0] = z.tail(dim - 1).norm() + 0.1 + rng.uniform();
    detail::SocScaling sc;
    sc.compute(s.data(), z.data(), dim);
    Eigen::VectorXd wz(dim), winv_s(dim);
    sc.apply(z.data(), wz.data(), dim);
    sc.apply_inverse(s.data(), winv_s.data(), dim);
    for (int i = 0; i < dim; ++i) CHECK(wz[i] == doctest::Approx(winv_s[i]).epsilon(1e-9));

    // hessian() == W^{-2}, and maps s to z
    const Eigen::MatrixXd hc = sc.hessian();
    const Eigen::VectorXd hs = hc * s;
    CHECK((hc * sc.scaling_squared() - Eigen::MatrixXd::Identity(dim, dim)).norm() <= 1e-9 * dim);
    for (int i = 0; i < dim; ++i) CHECK(hs[i] == doctest::Approx(z[i]).epsilon(1e-8));

    // Jordan division inverts the product
    Eigen::VectorXd prod(dim), back(dim);
    detail::soc_product(wz.data(), s.data(), prod.data(), dim);
    detail::soc_divide(wz.data(), prod.data(), back.data(), dim);
    for (int i = 0; i < dim; ++i) CHECK(back[i] == doctest::Approx(s[i]).epsilon(1e-8));
  }
}

TEST_CASE("second-order cone step to boundary matches bisection") {
  rsma::RandomStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 2 + trial % 4;
    Eigen::VectorXd x(dim), d(dim);
    for (int i = 1; i < dim; ++i) x[i] = rng.standard_normal();
    x[0] = x.tail(dim - 1).norm() + 0.05 + rng.uniform();
    for (int i = 0; i < dim; ++i) d[i] = 3.0 * rng.standard_normal();
    auto inside = [&](double a) {
      const Eigen::VectorXd p = x + a * d;
      return p[0] >= p.tail(dim - 1).norm();
    };
    const double alpha = detail::soc_max_step(x.data(), d.data(), dim);
    if (std::isinf(alpha)) {
      CHECK(inside(1e3));
      continue;
    }
    CHECK(inside(alpha * (1 - 1e-9)));
    CHECK_FALSE(inside(alpha * (1 + 1e-6) + 1e-12));
  }
}

TEST_CASE("log encoding boundary and capacity values") {
  ConicProgram program(2);  // x, t
  const int u = encode_log_lower(0, 1, program);
  CHECK(u == 2);
  REQUIRE(program.exp_blocks().size() == 1);
  REQUIRE(program.linear_eq().size() == 1);
  const std::vector<double> boundary = {1.0, 1.0, std::numbers::ln2};
  CHECK(audit(program, boundary).passes(1e-12));
  const std::vector<double> beyond = {1.0, 1.1, 1.1 * std::numbers::ln2};
  CHECK_FALSE(audit(program, beyond).passes(1e-6));
  CHECK_THROWS_AS(encode_log_lower(0, 7, program), std::invalid_argument);

  for (const auto& [x_value, expected] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {3.0, 2.0}, {1.0, 1.0}}) {
    ConicProgram p(2);
    encode_log_lower(0, 1, p);
    p.add_equality(AffineExpr::variable(0), AffineExpr(x_value));
    p.set_objective(1, -1.0);
    const auto sol = solve(p);
    check_optimal(p, sol);
    CHECK(sol.primal[1] == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("closed-form conic programs") {
  SUBCASE("log maximization: min -t s.t. t <= log2(1+x), 0 <= x <= 3") {
    ConicProgram p(2);
    encode_log_lower(0, 1, p);
    p.add_greater_equal(AffineExpr::variable(0), 0.0);
    p.add_less_equal(AffineExpr::variable(0), 3.0);
    p.set_objective(1, -1.0);
    const auto sol = solve(p);
    check_optimal(p, sol);
    CHECK(sol.objective_value == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(sol.primal[0] == doctest::Approx(3.0).epsilon(1e-6));
  }
  SUBCASE("sigma >= 1 + |a|^2 with |a|^2 = 2") {
    ConicProgram p(3);  // sigma, re a, im a
    p.set_objective(0, 1.0);
    p.add_equality(AffineExpr::variable(1), 1.0);
    p.add_equality(AffineExpr::variable(2), 1.0);
    p.add_rotated_soc(AffineExpr({{0, 1.0}}, -1.0), AffineExpr(1.0),
                      {AffineExpr::variable(1), AffineExpr::variable(2)});
    const auto sol = solve(p);
    check_optimal(p, sol);
    CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-6));
  }
  SUBCASE("separable LP") {
    ConicProgram p(2);
    p.set_objective(0, 1.0);
    p.set_objective(1, 1.0);
    p.add_greater_equal(AffineExpr::variable(0), 1.0);
    p.add_greater_equal(AffineExpr::variable(1), 2.0);
    const auto sol = solve(p);
    check_optimal(p, sol);
    CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-7));
  }
}

TEST_CASE("interference bound encoding") {
  const Eigen::VectorXcd h = Eigen::VectorXcd::Ones(2);

  SUBCASE("no interferers reduces to sigma >= 1") {
    ConicProgram p(1);
    p.set_objective(0, 1.0);
    encode_interference_bound(h, {}, 0, p);
    const auto sol = solve(p);
    check_optimal(p, sol);
    CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("one interferer with h^H p = 1 + j gives sigma >= 3") {
    ConicProgram p(5);  // sigma, p (2 complex entries stacked)
    p.set_objective(0, 1.0);
    const ComplexBlock block{1, 2};
    // p = [1 + j, 0] so that h^H p = 1 + j
    p.add_equality(AffineExpr::variable(block.re(0)), 1.0);
    p.add_equality(AffineExpr::variable(block.im(0)), 1.0);
    p.add_equality(AffineExpr::variable(block.re(1)), 0.0);
    p.add_equality(AffineExpr::variable(block.im(1)), 0.0);
    encode_interference_bound(h, {block}, 0, p);
    const auto sol = solve(p);
    check_optimal(p, sol);
    CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-6));
    // the boundary point is feasible, anything below is not
    std::vector<double> point = {3.0, 1.0, 0.0, 1.0, 0.0};
    CHECK(audit(p, point).passes(1e-12));
    point[0] = 2.9;
    CHECK_FALSE(audit(p, point).passes(1e-6));
  }
  SUBCASE("two fixed interferers with |h^H p|^2 = 2 and 0.5") {
    // hand arithmetic: sigma* = 1 + 2 + 0.5
    ConicProgram p(9);
    p.set_objective(0, 1.0);
    const ComplexBlock p1{1, 2};
    const ComplexBlock p2{5, 2};
    const double fixed[8] = {1.0, 0.0, 1.0, 0.0, std::sqrt(0.5), 0.0, 0.0, 0.0};
    for (int i = 0; i < 8; ++i) p.add_equality(AffineExpr::variable(1 + i), fixed[i]);
    encode_interference_bound(h, {p1, p2}, 0, p);
    const auto sol = solve(p);
    check_optimal(p, sol);
    CHECK(sol.objective_value == doctest::Approx(3.5).epsilon(1e-6));
  }
  SUBCASE("mismatched dimensions are rejected") {
    ConicProgram p(5);
    CHECK_THROWS_AS(encode_interference_bound(Eigen::VectorXcd::Ones(3), {ComplexBlock{1, 2}}, 0, p),
                    std::invalid_argument);
  }
}

TEST_CASE("infeasible and unbounded programs are detected") {
  SUBCASE("x >= 1 and x <= 0") {
    ConicProgram p(1);
    p.set_objective(0, 1.0);
    p.add_greater_equal(AffineExpr::variable(0), 1.0);
    p.add_less_equal(AffineExpr::variable(0), 0.0);
    CHECK(solve(p).status == SolveStatus::kInfeasible);
  }
  SUBCASE("exp cone forcing log2(1+x) >= 3 with x <= 1") {
    ConicProgram p(2);
    encode_log_lower(0, 1, p);
    p.add_less_equal(AffineExpr::variable(0), 1.0);
    p.add_greater_equal(AffineExpr::variable(1), 3.0);
    CHECK(solve(p).status == SolveStatus::kInfeasible);
  }
  SUBCASE("min x with x <= 1") {
    ConicProgram p(1);
    p.set_objective(0, 1.0);
    p.add_less_equal(AffineExpr::variable(0), 1.0);
    CHECK(solve(p).status == SolveStatus::kUnbounded);
  }
  SUBCASE("empty row 0 = 1") {
    ConicProgram p(1);
    p.add_equality(AffineExpr(), 1.0);
    CHECK(solve(p).status == SolveStatus::kInfeasible);
  }
}

TEST_CASE("malformed programs are rejected") {
  ConicProgram p(1);
  p.add_less_equal(AffineExpr::variable(3), 1.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
  ConicProgram q(1);
  q.set_objective(0, std::nan(""));
  CHECK_THROWS_AS(solve(q), std::invalid_argument);
  ConicProgram ok(1);
  CHECK_THROWS_AS(solve(ok, SolverOptions{0.0, 10}), std::invalid_argument);
}

TEST_CASE("JSON dump reloads exactly") {
  ConicProgram p(4);
  p.set_objective(0, 0.1);
  p.set_objective(3, -1.0 / 3.0);
  encode_log_lower(1, 2, p);
  p.add_less_equal(AffineExpr({{0, 1e-17}, {1, 2.5}}, 0.3), 7.0);
  encode_interference_bound(Eigen::VectorXcd::Constant(1, {0.3, -0.7}), {ComplexBlock{0, 1}}, 3, p);
  const ConicProgram reloaded = program_from_json(program_to_json(p));
  CHECK(reloaded == p);
}

TEST_CASE("random feasible programs: audit, weak duality, determinism") {
  rsma::RandomStream rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 5;
    ConicProgram p(n);
    // a known interior point x0
    std::vector<double> x0(static_cast<std::size_t>(n));
    for (auto& v : x0) v = rng.standard_normal();
    for (int i = 0; i < n; ++i) p.set_objective(i, rng.standard_normal());
    // box keeps the program bounded
    for (int i = 0; i < n; ++i) {
      p.add_less_equal(AffineExpr::variable(i), x0[static_cast<std::size_t>(i)] + 1.0 + rng.uniform());
      p.add_greater_equal(AffineExpr::variable(i), x0[static_cast<std::size_t>(i)] - 1.0 - rng.uniform());
    }
    // an SOC block through x0
    SocBlock soc;
    double sq = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      AffineExpr e({{i, rng.standard_normal()}, {i + 1, rng.standard_normal()}}, 0.0);
      const double v = e.evaluate(x0);
      sq += v * v;
      soc.entries.push_back(std::move(e));
    }
    soc.bound = AffineExpr({{0, 0.1}}, std::sqrt(sq) + 0.5 - 0.1 * x0[0]);
    p.add_soc(soc);
    // an exp block through x0: (x1 + shift, 1, x2 - margin) with shift so that it is interior
    {
      const double a = x0[0];
      const double b = x0[1];
      const double shift = std::exp(b) + 0.5 - a;
      p.add_exp({AffineExpr({{0, 1.0}}, shift), AffineExpr(1.0), AffineExpr({{1, 1.0}}, -0.0)});
    }
    REQUIRE(audit(p, x0).passes(0.0));
    SolverOptions verbose_opts;
    verbose_opts.verbose = std::getenv("RSMA_VERBOSE") != nullptr;
    const auto first = solve(p, verbose_opts);
    check_optimal(p, first);
    const auto second = solve(p);
    CHECK(second.objective_value == doctest::Approx(first.objective_value).epsilon(1e-12));
  }
}
