#pragma once

#include "rsma/channel.hpp"
#include "rsma/conic/encodings.hpp"
#include "rsma/conic/program.hpp"
#include "rsma/conic/solver.hpp"
#include "rsma/model.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsma {

enum class AccessMode { kRsma, kSdma };

std::string_view to_string(AccessMode mode);
/// Accepts "rsma" or "sdma" (case-insensitive).
AccessMode access_mode_from_string(std::string_view text);

/// One scheduling decision: channels, per-user rate requirement I_k,
/// per-user objective weight w_k and the power budget.
struct SlotProblem {
  ChannelSet channels;
  std::vector<double> required_rates;
  std::vector<double> weights;
  double total_power = 1.0;

  int num_users() const { return channels.num_users(); }
  void validate() const;
};

struct OptimizerConfig {
  /// Big-M constant; a non-positive value selects big_m_bound(problem).
  double big_m = 0.0;
  double epsilon = 1e-4;
  int max_sca_iters = 100;
  AccessMode mode = AccessMode::kRsma;
  double z_round_delta = 1e-3;
  /// Extra rate demanded of scheduled users inside the subproblem so that
  /// the solver's boundary solutions clear the success margin after rounding.
  double rate_margin = 1e-6;
  /// Ablation: encode |h^H p_k|^2 / sigma_p <= beta exactly as a rotated cone
  /// instead of its first-order expansion.
  bool exact_beta = false;
  conic::SolverOptions solver;

  void validate() const;
};

/// Expansion point carried from one SCA iteration to the next.
struct SCAState {
  PrecoderSet precoders;
  std::vector<double> z;
  std::vector<double> beta;
  std::vector<double> sigma_p;
  std::vector<double> sigma_c;
  double objective = 0.0;
};

/// Variable indices of one assembled subproblem. Entries for the common
/// stream (c, p_c, omega, sigma_c) are empty in SDMA mode.
struct SubproblemLayout {
  std::vector<int> c;
  conic::ComplexBlock common;
  std::vector<conic::ComplexBlock> privates;
  std::vector<int> z, alpha, beta, omega, sigma_p, sigma_c;
  /// Variables before the auxiliaries added by the cone encodings.
  int core_vars = 0;
  bool has_common = false;
};

struct Subproblem {
  conic::ConicProgram program;
  SubproblemLayout layout;
};

/// M = max_k I_k + log2(1 + P_total max_k ||h_k||^2) + 1
double big_m_bound(const SlotProblem& problem);

/// Matched-filter privates with an equal split; in RSMA mode 20% of the
/// budget goes to a common precoder aligned with the weakest user's channel.
/// z = 0.5 and beta, sigma_p, sigma_c follow from the SINR definitions.
SCAState initialize(const SlotProblem& problem, const OptimizerConfig& cfg);

Subproblem assemble_subproblem(const SlotProblem& problem, const SCAState& state, const OptimizerConfig& cfg);

/// First-order expansions used by the subproblem, exposed for testing.
namespace sca {

/// log2(1 + b0) + (b - b0) / ((1 + b0) ln 2)
double log2_tangent(double b0, double b);

/// |h^H p|^2 / sigma
double quad_over_linear(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p, double sigma);

/// 2 Re{conj(h^H p0) h^H p} / sigma0 - |h^H p0|^2 sigma / sigma0^2, a global
/// minorant of quad_over_linear that is tight at (p0, sigma0).
double quad_over_linear_tangent(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p0, double sigma0,
                                const Eigen::VectorXcd& p, double sigma);

/// prod_k z0_k + sum_k (z_k - z0_k) prod_{l != k} z0_l
double product_tangent(const std::vector<double>& z0, const std::vector<double>& z);
/// d/dz_k of product_tangent: prod_{l != k} z0_l
std::vector<double> product_gradient(const std::vector<double>& z0);

}  // namespace sca

enum class ScaStatus {
  kConverged,
  kMaxIterations,
  /// A later subproblem failed; the last solved iterate was kept.
  kStoppedEarly,
  /// No user can meet its rate even alone at full power; nothing to solve.
  kNoAchievableUser,
};

std::string_view to_string(ScaStatus status);

struct ScaTraceEntry {
  int iteration = 0;
  double objective = 0.0;
  std::vector<double> z;
  conic::SolveStatus status = conic::SolveStatus::kOptimal;
};

struct ScheduleResult {
  PrecoderSet precoders;
  CommonRateShares shares;
  std::vector<double> z_relaxed;
  std::vector<int> z_binary;
  std::vector<int> scheduled;
  double achieved_aoii = 0.0;
  int sca_iterations = 0;
  std::vector<conic::SolveStatus> subproblem_statuses;
  std::vector<ScaTraceEntry> trace;
  ScaStatus status = ScaStatus::kConverged;
  /// Scheduled users dropped by evaluate() after failing the success check.
  int demotions = 0;
  /// The result comes from the single-user start, taken when the default
  /// start had an infeasible first subproblem or stopped early with a worse
  /// schedule.
  bool used_fallback_start = false;
  /// The result is the incumbent passed to sca_solve, not the SCA output.
  bool kept_incumbent = false;
};

/// Thrown when no starting point yields a feasible first subproblem.
class InfeasibleInitialization : public std::runtime_error {
 public:
  InfeasibleInitialization() : std::runtime_error("infeasible initialization") {}
};

/// SCA iterations followed by rounding and evaluation. When `incumbent` is
/// given (e.g. the SDMA schedule, which is feasible for RSMA), it is
/// returned instead whenever it achieves a strictly lower AoII.
ScheduleResult sca_solve(const SlotProblem& problem, const OptimizerConfig& cfg,
                         const ScheduleResult* incumbent = nullptr);

/// z'_k = 1 if z_k >= 1 - delta or c_k + R_k(P) <= I_k - kSuccessMargin, else 0.
std::vector<int> round_schedule(const SlotProblem& problem, const PrecoderSet& precoders,
                                const CommonRateShares& shares, const std::vector<double>& z_relaxed,
                                double z_round_delta);

/// Recomputes rates, hands the common rate of unscheduled users to
/// scheduled users short of their requirement (largest deficit first),
/// demotes any scheduled user still failing the success check, and reports
/// achieved_aoii = sum of weights of unscheduled users.
ScheduleResult evaluate(const SlotProblem& problem, const PrecoderSet& precoders, const CommonRateShares& shares,
                        std::vector<int> z_binary);

/// One JSON object per line: iteration, objective, z, status.
std::string trace_to_jsonl(const ScheduleResult& result);

}  // namespace rsma
