#include "rsma/optimizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

namespace rsma {

using conic::AffineExpr;
using conic::ComplexBlock;
using conic::ConicProgram;

std::string_view to_string(AccessMode mode) { return mode == AccessMode::kRsma ? "rsma" : "sdma"; }

AccessMode access_mode_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "rsma") return AccessMode::kRsma;
  if (lower == "sdma") return AccessMode::kSdma;
  throw std::invalid_argument("unknown access mode '" + std::string(text) + "' (expected rsma or sdma)");
}

std::string_view to_string(ScaStatus status) {
  switch (status) {
    case ScaStatus::kConverged:
      return "converged";
    case ScaStatus::kMaxIterations:
      return "max_iterations";
    case ScaStatus::kStoppedEarly:
      return "stopped_early";
    case ScaStatus::kNoAchievableUser:
      return "no_achievable_user";
  }
  return "unknown";
}

void SlotProblem::validate() const {
  const auto k = static_cast<std::size_t>(channels.num_users());
  if (required_rates.size() != k) throw std::invalid_argument("SlotProblem: required_rates size != K");
  if (weights.size() != k) throw std::invalid_argument("SlotProblem: weights size != K");
  for (double rate : required_rates) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("SlotProblem: I_k must be positive");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("SlotProblem: weights must be nonnegative");
  }
  if (!(total_power > 0.0) || !std::isfinite(total_power)) {
    throw std::invalid_argument("SlotProblem: total_power must be positive");
  }
}

void OptimizerConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("OptimizerConfig: epsilon must be positive");
  if (max_sca_iters < 1) throw std::invalid_argument("OptimizerConfig: max_sca_iters must be >= 1");
  if (!(z_round_delta > 0.0 && z_round_delta < 0.5)) {
    throw std::invalid_argument("OptimizerConfig: z_round_delta must lie in (0, 0.5)");
  }
  if (!(rate_margin >= 0.0)) throw std::invalid_argument("OptimizerConfig: rate_margin must be nonnegative");
}

double big_m_bound(const SlotProblem& problem) {
  const double max_rate = *std::max_element(problem.required_rates.begin(), problem.required_rates.end());
  return max_rate + std::log2(1.0 + problem.total_power * problem.channels.max_gain()) + 1.0;
}

namespace sca {

double log2_tangent(double b0, double b) {
  return std::log2(1.0 + b0) + (b - b0) / ((1.0 + b0) * std::numbers::ln2);
}

double quad_over_linear(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p, double sigma) {
  return std::norm(h.dot(p)) / sigma;
}

double quad_over_linear_tangent(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p0, double sigma0,
                                const Eigen::VectorXcd& p, double sigma) {
  const std::complex<double> a0 = h.dot(p0);
  const std::complex<double> a = h.dot(p);
  return 2.0 * (std::conj(a0) * a).real() / sigma0 - std::norm(a0) * sigma / (sigma0 * sigma0);
}

double product_tangent(const std::vector<double>& z0, const std::vector<double>& z) {
  const auto grad = product_gradient(z0);
  double value = std::accumulate(z0.begin(), z0.end(), 1.0, std::multiplies<>());
  for (std::size_t k = 0; k < z0.size(); ++k) value += (z[k] - z0[k]) * grad[k];
  return value;
}

std::vector<double> product_gradient(const std::vector<double>& z0) {
  std::vector<double> grad(z0.size(), 1.0);
  for (std::size_t k = 0; k < z0.size(); ++k) {
    for (std::size_t l = 0; l < z0.size(); ++l) {
      if (l != k) grad[k] *= z0[l];
    }
  }
  return grad;
}

}  // namespace sca

namespace {

double received(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p) { return std::norm(h.dot(p)); }

// beta, sigma_p, sigma_c from the SINR definitions at the given precoders
SCAState state_from_precoders(const SlotProblem& problem, PrecoderSet precoders, std::vector<double> z) {
  const int num_users = problem.num_users();
  SCAState state;
  state.beta.resize(static_cast<std::size_t>(num_users));
  state.sigma_p.resize(static_cast<std::size_t>(num_users));
  state.sigma_c.resize(static_cast<std::size_t>(num_users));
  for (int k = 0; k < num_users; ++k) {
    const auto& h = problem.channels[k];
    double interference = 1.0;
    for (int i = 0; i < num_users; ++i) {
      if (i != k) interference += received(h, precoders.privates[static_cast<std::size_t>(i)]);
    }
    const double own = received(h, precoders.privates[static_cast<std::size_t>(k)]);
    state.sigma_p[static_cast<std::size_t>(k)] = interference;
    state.sigma_c[static_cast<std::size_t>(k)] = interference + own;
    state.beta[static_cast<std::size_t>(k)] = own / interference;
  }
  state.precoders = std::move(precoders);
  state.objective = 0.0;
  for (int k = 0; k < num_users; ++k) {
    state.objective += problem.weights[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)];
  }
  state.z = std::move(z);
  return state;
}

Eigen::VectorXcd unit_direction(const Eigen::VectorXcd& h) { return h / h.norm(); }

double single_user_capacity(const SlotProblem& problem, int k) {
  return std::log2(1.0 + problem.total_power * channel_gain(problem.channels[k]));
}

bool achievable(const SlotProblem& problem, const OptimizerConfig& cfg, int k) {
  return single_user_capacity(problem, k) >= problem.required_rates[static_cast<std::size_t>(k)] + cfg.rate_margin;
}

// All power on one achievable user: z_k = 0 for that user, 1 for the rest.
SCAState single_user_start(const SlotProblem& problem, const OptimizerConfig& cfg) {
  const int num_users = problem.num_users();
  int best = -1;
  for (int k = 0; k < num_users; ++k) {
    if (!achievable(problem, cfg, k)) continue;
    if (best < 0) {
      best = k;
      continue;
    }
    const double wk = problem.weights[static_cast<std::size_t>(k)];
    const double wb = problem.weights[static_cast<std::size_t>(best)];
    if (wk > wb || (wk == wb && channel_gain(problem.channels[k]) > channel_gain(problem.channels[best]))) best = k;
  }
  auto precoders = PrecoderSet::zeros(problem.channels.num_antennas(), num_users);
  precoders.privates[static_cast<std::size_t>(best)] =
      std::sqrt(problem.total_power) * unit_direction(problem.channels[best]);
  std::vector<double> z(static_cast<std::size_t>(num_users), 1.0);
  z[static_cast<std::size_t>(best)] = 0.0;
  return state_from_precoders(problem, std::move(precoders), std::move(z));
}

// T(p, sigma) = (2/sigma0) Re{conj(a0) h^H p} - |a0|^2 sigma / sigma0^2
AffineExpr tangent_form(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p0, double sigma0,
                        const ComplexBlock& p, int sigma) {
  const std::complex<double> a0 = h.dot(p0);
  AffineExpr e = (2.0 * a0.real() / sigma0) * conic::inner_real(h, p);
  e += (2.0 * a0.imag() / sigma0) * conic::inner_imag(h, p);
  e.add(sigma, -std::norm(a0) / (sigma0 * sigma0));
  return e;
}

Eigen::VectorXcd read_complex(const std::vector<double>& x, const ComplexBlock& block) {
  Eigen::VectorXcd v(block.dim);
  for (int n = 0; n < block.dim; ++n) {
    v[n] = {x[static_cast<std::size_t>(block.re(n))], x[static_cast<std::size_t>(block.im(n))]};
  }
  return v;
}

std::vector<double> read_values(const std::vector<double>& x, const std::vector<int>& indices) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(x[static_cast<std::size_t>(i)]);
  return out;
}

struct Extracted {
  SCAState state;
  CommonRateShares shares;
};

Extracted extract(const SlotProblem& problem, const Subproblem& sub, const conic::ConicSolution& sol) {
  const auto& layout = sub.layout;
  const auto& x = sol.primal;
  const int num_users = problem.num_users();
  Extracted out;
  auto& state = out.state;
  state.precoders = PrecoderSet::zeros(problem.channels.num_antennas(), num_users);
  if (layout.has_common) state.precoders.common = read_complex(x, layout.common);
  for (int k = 0; k < num_users; ++k) {
    state.precoders.privates[static_cast<std::size_t>(k)] = read_complex(x, layout.privates[static_cast<std::size_t>(k)]);
  }
  // The solver meets the power cone to its tolerance; pull back onto the budget.
  const double power = state.precoders.total_power();
  if (power > problem.total_power) {
    const double scale = std::sqrt(problem.total_power / power);
    state.precoders.common *= scale;
    for (auto& p : state.precoders.privates) p *= scale;
  }
  state.z = read_values(x, layout.z);
  for (double& z : state.z) z = std::clamp(z, 0.0, 1.0);
  state.beta = read_values(x, layout.beta);
  for (double& b : state.beta) b = std::max(b, 0.0);
  state.sigma_p = read_values(x, layout.sigma_p);
  for (double& s : state.sigma_p) s = std::max(s, 1.0);
  if (layout.has_common) {
    state.sigma_c = read_values(x, layout.sigma_c);
    for (double& s : state.sigma_c) s = std::max(s, 1.0);
  } else {
    state.sigma_c = state_from_precoders(problem, state.precoders, state.z).sigma_c;
  }
  state.objective = sol.objective_value;
  out.shares.shares.assign(static_cast<std::size_t>(num_users), 0.0);
  if (layout.has_common) {
    out.shares.shares = read_values(x, layout.c);
    for (double& c : out.shares.shares) c = std::max(c, 0.0);
  }
  return out;
}

}  // namespace

SCAState initialize(const SlotProblem& problem, const OptimizerConfig& cfg) {
  problem.validate();
  const int num_users = problem.num_users();
  auto precoders = PrecoderSet::zeros(problem.channels.num_antennas(), num_users);
  double private_budget = problem.total_power;
  if (cfg.mode == AccessMode::kRsma) {
    int weakest = 0;
    for (int k = 1; k < num_users; ++k) {
      if (channel_gain(problem.channels[k]) < channel_gain(problem.channels[weakest])) weakest = k;
    }
    const double common_power = 0.2 * problem.total_power;
    precoders.common = std::sqrt(common_power) * unit_direction(problem.channels[weakest]);
    private_budget -= common_power;
  }
  const double per_user = private_budget / num_users;
  for (int k = 0; k < num_users; ++k) {
    precoders.privates[static_cast<std::size_t>(k)] = std::sqrt(per_user) * unit_direction(problem.channels[k]);
  }
  return state_from_precoders(problem, std::move(precoders), std::vector<double>(static_cast<std::size_t>(num_users), 0.5));
}

Subproblem assemble_subproblem(const SlotProblem& problem, const SCAState& state, const OptimizerConfig& cfg) {
  problem.validate();
  const int num_users = problem.num_users();
  const int num_antennas = problem.channels.num_antennas();
  const auto ku = static_cast<std::size_t>(num_users);
  if (state.precoders.num_users() != num_users || state.precoders.num_antennas() != num_antennas ||
      state.z.size() != ku || state.beta.size() != ku || state.sigma_p.size() != ku ||
      state.sigma_c.size() != ku) {
    throw std::invalid_argument("assemble_subproblem: state dimensions do not match the problem");
  }
  const bool rsma = cfg.mode == AccessMode::kRsma;
  const double big_m = cfg.big_m > 0.0 ? cfg.big_m : big_m_bound(problem);

  Subproblem sub;
  auto& layout = sub.layout;
  auto& prog = sub.program;
  layout.has_common = rsma;
  auto add_vars = [&](std::vector<int>& out) {
    for (int k = 0; k < num_users; ++k) out.push_back(prog.add_variable());
  };
  auto add_block = [&] {
    ComplexBlock block{prog.num_vars(), num_antennas};
    for (int i = 0; i < 2 * num_antennas; ++i) prog.add_variable();
    return block;
  };

  if (rsma) {
    add_vars(layout.c);
    layout.common = add_block();
  }
  for (int k = 0; k < num_users; ++k) layout.privates.push_back(add_block());
  add_vars(layout.z);
  add_vars(layout.alpha);
  add_vars(layout.beta);
  if (rsma) add_vars(layout.omega);
  add_vars(layout.sigma_p);
  if (rsma) add_vars(layout.sigma_c);
  layout.core_vars = prog.num_vars();

  for (int k = 0; k < num_users; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    prog.set_objective(layout.z[uk], problem.weights[uk]);
  }

  AffineExpr common_sum;
  if (rsma) {
    for (int c : layout.c) {
      prog.add_greater_equal(AffineExpr::variable(c), 0.0);
      common_sum.add(c, 1.0);
    }
  }

  for (int k = 0; k < num_users; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const auto& h = problem.channels[k];
    const double rate = problem.required_rates[uk];
    const AffineExpr z = AffineExpr::variable(layout.z[uk]);
    const AffineExpr c = rsma ? AffineExpr::variable(layout.c[uk]) : AffineExpr();

    // I_k - c_k - log2(1 + alpha_k) <= M z_k
    const int alpha_rate = prog.add_variable();
    conic::encode_log_lower(layout.alpha[uk], alpha_rate, prog);
    prog.add_less_equal(AffineExpr(rate + cfg.rate_margin) - c - AffineExpr::variable(alpha_rate), big_m * z);

    // c_k + log2(1 + beta_k) - I_k <= M (1 - z_k), log expanded at beta0
    const double beta0 = state.beta[uk];
    const double slope = 1.0 / ((1.0 + beta0) * std::numbers::ln2);
    AffineExpr beta_side = c + AffineExpr({{layout.beta[uk], slope}}, std::log2(1.0 + beta0) - slope * beta0 - rate);
    prog.add_less_equal(beta_side, AffineExpr(big_m) - big_m * z);
    prog.add_greater_equal(AffineExpr::variable(layout.beta[uk]), 0.0);

    // alpha_k <= T(p_k, sigma_p) and T(p_k, sigma_p) <= beta_k
    const AffineExpr private_tangent = tangent_form(h, state.precoders.privates[uk], state.sigma_p[uk],
                                                    layout.privates[uk], layout.sigma_p[uk]);
    prog.add_less_equal(AffineExpr::variable(layout.alpha[uk]), private_tangent);
    if (cfg.exact_beta) {
      prog.add_rotated_soc(AffineExpr::variable(layout.beta[uk]), AffineExpr::variable(layout.sigma_p[uk]),
                           {conic::inner_real(h, layout.privates[uk]), conic::inner_imag(h, layout.privates[uk])});
    } else {
      prog.add_less_equal(private_tangent, AffineExpr::variable(layout.beta[uk]));
    }

    // sigma_p >= 1 + sum_{i != k} |h_k^H p_i|^2
    std::vector<ComplexBlock> interferers;
    for (int i = 0; i < num_users; ++i) {
      if (i != k) interferers.push_back(layout.privates[static_cast<std::size_t>(i)]);
    }
    conic::encode_interference_bound(h, interferers, layout.sigma_p[uk], prog);

    if (rsma) {
      // omega_k <= T(p_c, sigma_c) and sum c <= log2(1 + omega_k) + M z_k
      prog.add_less_equal(AffineExpr::variable(layout.omega[uk]),
                          tangent_form(h, state.precoders.common, state.sigma_c[uk], layout.common,
                                       layout.sigma_c[uk]));
      const int omega_rate = prog.add_variable();
      conic::encode_log_lower(layout.omega[uk], omega_rate, prog);
      prog.add_less_equal(common_sum, AffineExpr::variable(omega_rate) + big_m * z);
      conic::encode_interference_bound(h, layout.privates, layout.sigma_c[uk], prog);
    }

    prog.add_greater_equal(z, 0.0);
    prog.add_less_equal(z, 1.0);
  }

  // prod z = 0, expanded at z0
  const auto grad = sca::product_gradient(state.z);
  AffineExpr product(std::accumulate(state.z.begin(), state.z.end(), 1.0, std::multiplies<>()));
  for (int k = 0; k < num_users; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    product.add(layout.z[uk], grad[uk]);
    product.constant -= grad[uk] * state.z[uk];
  }
  prog.add_equality(product, 0.0);

  // ||vec P|| <= sqrt(P_total)
  conic::SocBlock power{AffineExpr(std::sqrt(problem.total_power)), {}};
  std::vector<ComplexBlock> all_blocks = layout.privates;
  if (rsma) all_blocks.push_back(layout.common);
  for (const auto& block : all_blocks) {
    for (int i = 0; i < 2 * num_antennas; ++i) power.entries.push_back(AffineExpr::variable(block.offset + i));
  }
  prog.add_soc(std::move(power));
  return sub;
}

std::vector<int> round_schedule(const SlotProblem& problem, const PrecoderSet& precoders,
                                const CommonRateShares& shares, const std::vector<double>& z_relaxed,
                                double z_round_delta) {
  const int num_users = problem.num_users();
  const auto report = rate_report(problem.channels, precoders, {});
  std::vector<int> z_binary(static_cast<std::size_t>(num_users), 0);
  for (int k = 0; k < num_users; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double delivered = shares.shares.at(uk) + report.rate_private[uk];
    const bool relaxed_off = z_relaxed.at(uk) >= 1.0 - z_round_delta;
    const bool short_of_rate = delivered <= problem.required_rates[uk] - kSuccessMargin;
    z_binary[uk] = relaxed_off || short_of_rate ? 1 : 0;
  }
  return z_binary;
}

ScheduleResult evaluate(const SlotProblem& problem, const PrecoderSet& precoders, const CommonRateShares& shares,
                        std::vector<int> z_binary) {
  const int num_users = problem.num_users();
  const auto ku = static_cast<std::size_t>(num_users);
  if (z_binary.size() != ku || shares.shares.size() != ku) {
    throw std::invalid_argument("evaluate: schedule dimensions do not match the problem");
  }
  ScheduleResult result;
  result.precoders = precoders;
  std::vector<double> c(ku, 0.0);

  while (true) {
    std::vector<int> scheduled;
    for (int k = 0; k < num_users; ++k) {
      if (z_binary[static_cast<std::size_t>(k)] == 0) scheduled.push_back(k);
    }
    const auto report = rate_report(problem.channels, precoders, scheduled);
    std::vector<double> need(ku, 0.0);
    std::fill(c.begin(), c.end(), 0.0);
    double assigned = 0.0;
    for (int k : scheduled) {
      const auto uk = static_cast<std::size_t>(k);
      need[uk] = std::max(0.0, problem.required_rates[uk] - report.rate_private[uk]);
      c[uk] = std::min(std::max(shares.shares[uk], 0.0), need[uk]);
      assigned += c[uk];
    }
    if (assigned > report.common_rate) {
      const double scale = assigned > 0.0 ? report.common_rate / assigned : 0.0;
      for (double& value : c) value *= scale;
      assigned = report.common_rate;
    }
    // hand the remaining common rate to the largest deficits first
    double slack = std::max(0.0, report.common_rate - assigned);
    std::vector<int> order = scheduled;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return need[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)] >
             need[static_cast<std::size_t>(b)] - c[static_cast<std::size_t>(b)];
    });
    for (int k : order) {
      const auto uk = static_cast<std::size_t>(k);
      const double give = std::min(slack, need[uk] - c[uk]);
      if (give <= 0.0) continue;
      c[uk] += give;
      slack -= give;
    }

    CommonRateShares current{c};
    int worst = -1;
    double worst_gap = 0.0;
    for (int k : scheduled) {
      if (success_check(report, current, problem.required_rates, k)) continue;
      const auto uk = static_cast<std::size_t>(k);
      const double gap = problem.required_rates[uk] - c[uk] - report.rate_private[uk];
      if (worst < 0 || gap > worst_gap) {
        worst = k;
        worst_gap = gap;
      }
    }
    if (worst < 0) {
      result.scheduled = std::move(scheduled);
      break;
    }
    z_binary[static_cast<std::size_t>(worst)] = 1;
    ++result.demotions;
  }

  result.shares.shares = std::move(c);
  result.achieved_aoii = 0.0;
  for (int k = 0; k < num_users; ++k) {
    if (z_binary[static_cast<std::size_t>(k)] == 1) result.achieved_aoii += problem.weights[static_cast<std::size_t>(k)];
  }
  result.z_binary = std::move(z_binary);
  return result;
}

namespace {

// SCA iterations from `state`, then rounding and evaluation. A failed first
// subproblem either throws (no fallback left) or returns nullopt.
std::optional<ScheduleResult> sca_pass(const SlotProblem& problem, const OptimizerConfig& cfg, SCAState state,
                                       bool throw_on_first_failure) {
  const auto ku = static_cast<std::size_t>(problem.num_users());
  CommonRateShares shares{std::vector<double>(ku, 0.0)};
  std::vector<ScaTraceEntry> trace;
  std::vector<conic::SolveStatus> statuses;
  ScaStatus status = ScaStatus::kMaxIterations;
  int iterations = 0;

  while (iterations < cfg.max_sca_iters) {
    const Subproblem sub = assemble_subproblem(problem, state, cfg);
    const auto sol = conic::solve(sub.program, cfg.solver);
    statuses.push_back(sol.status);
    // A stalled solve whose best iterate is feasible and no worse still
    // serves as the next expansion point; only its optimality is uncertain.
    const bool usable_stall = iterations > 0 && sol.status == conic::SolveStatus::kMaxIter &&
                              sol.max_primal_residual <= cfg.solver.tol &&
                              sol.objective_value <= state.objective + 10.0 * cfg.solver.tol;
    if (sol.status != conic::SolveStatus::kOptimal && !usable_stall) {
      if (iterations > 0) {
        status = ScaStatus::kStoppedEarly;
        break;
      }
      if (throw_on_first_failure) throw InfeasibleInitialization();
      return std::nullopt;
    }
    ++iterations;
    auto next = extract(problem, sub, sol);
    trace.push_back({iterations, next.state.objective, next.state.z, sol.status});
    const double change = std::abs(next.state.objective - state.objective);
    state = std::move(next.state);
    shares = std::move(next.shares);
    if (change < cfg.epsilon) {
      status = ScaStatus::kConverged;
      break;
    }
  }

  auto z_binary = round_schedule(problem, state.precoders, shares, state.z, cfg.z_round_delta);
  auto result = evaluate(problem, state.precoders, shares, std::move(z_binary));
  result.z_relaxed = state.z;
  result.sca_iterations = iterations;
  result.subproblem_statuses = std::move(statuses);
  result.trace = std::move(trace);
  result.status = status;
  return result;
}

}  // namespace

ScheduleResult sca_solve(const SlotProblem& problem, const OptimizerConfig& cfg, const ScheduleResult* incumbent) {
  problem.validate();
  cfg.validate();
  const int num_users = problem.num_users();
  const auto ku = static_cast<std::size_t>(num_users);

  auto keep_better = [&](ScheduleResult result) {
    if (incumbent != nullptr && incumbent->achieved_aoii < result.achieved_aoii) {
      ScheduleResult kept = *incumbent;
      kept.kept_incumbent = true;
      kept.trace = std::move(result.trace);
      kept.subproblem_statuses = std::move(result.subproblem_statuses);
      kept.sca_iterations = result.sca_iterations;
      return kept;
    }
    return result;
  };

  bool any_achievable = false;
  for (int k = 0; k < num_users; ++k) any_achievable = any_achievable || achievable(problem, cfg, k);
  if (!any_achievable) {
    auto result = evaluate(problem, PrecoderSet::zeros(problem.channels.num_antennas(), num_users),
                           CommonRateShares{std::vector<double>(ku, 0.0)}, std::vector<int>(ku, 1));
    result.z_relaxed.assign(ku, 1.0);
    result.status = ScaStatus::kNoAchievableUser;
    return keep_better(std::move(result));
  }

  auto first = sca_pass(problem, cfg, initialize(problem, cfg), false);
  if (first && first->status != ScaStatus::kStoppedEarly) return keep_better(std::move(*first));

  // Either the default start was infeasible or the run collapsed onto an
  // infeasible subproblem: go again from a one-user schedule.
  auto second = sca_pass(problem, cfg, single_user_start(problem, cfg), !first.has_value());
  if (!second) throw InfeasibleInitialization();
  if (first && first->achieved_aoii <= second->achieved_aoii) return keep_better(std::move(*first));
  second->used_fallback_start = true;
  return keep_better(std::move(*second));
}

std::string trace_to_jsonl(const ScheduleResult& result) {
  std::ostringstream out;
  for (const auto& entry : result.trace) {
    nlohmann::json line = {{"iteration", entry.iteration},
                           {"objective", entry.objective},
                           {"z", entry.z},
                           {"status", conic::to_string(entry.status)}};
    out << line.dump() << '\n';
  }
  return out.str();
}

}  // namespace rsma
