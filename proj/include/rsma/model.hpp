#pragma once

#include "rsma/channel.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rsma {

/// Common precoder p_c and one private precoder p_k per user.
/// SDMA is represented by an exactly-zero common precoder.
struct PrecoderSet {
  Eigen::VectorXcd common;
  std::vector<Eigen::VectorXcd> privates;

  static PrecoderSet zeros(int num_antennas, int num_users);

  int num_antennas() const { return static_cast<int>(common.size()); }
  int num_users() const { return static_cast<int>(privates.size()); }
  /// tr(P P^H) = ||p_c||^2 + sum_k ||p_k||^2
  double total_power() const;
  bool is_sdma() const { return common.isZero(0.0); }
  /// True when total_power() <= budget * (1 + rel_tol).
  bool within_budget(double budget, double rel_tol = 1e-6) const;
};

struct RateReport {
  std::vector<double> sinr_common;
  std::vector<double> sinr_private;
  std::vector<double> rate_common_per_user;
  std::vector<double> rate_private;
  /// min over the scheduled set of rate_common_per_user; 0 for an empty set.
  double common_rate = 0.0;
};

enum class AgeFunction { kLinear, kThreshold };
enum class GapFunction { kSquare, kThreshold };

struct AoiiConfig {
  AgeFunction f = AgeFunction::kLinear;
  GapFunction g = GapFunction::kSquare;
  double zeta = 0.0;      ///< time threshold for AgeFunction::kThreshold
  double c_thresh = 0.0;  ///< value threshold for GapFunction::kThreshold

  void validate() const;
};

/// Per-user portion c_k of the common rate.
struct CommonRateShares {
  std::vector<double> shares;

  double scheduled_sum(const std::vector<int>& scheduled) const;
};

/// Absolute margin on rate comparisons.
inline constexpr double kSuccessMargin = 1e-9;

/// |h_k^H p_k|^2 / (1 + sum_{i != k} |h_k^H p_i|^2)
double sinr_private(const ChannelSet& channels, const PrecoderSet& precoders, int k);
/// |h_k^H p_c|^2 / (1 + sum_i |h_k^H p_i|^2); the denominator includes user k's own private stream.
double sinr_common(const ChannelSet& channels, const PrecoderSet& precoders, int k);

/// All SINRs and rates (bits/s/Hz); common_rate is the minimum over `scheduled`.
RateReport rate_report(const ChannelSet& channels, const PrecoderSet& precoders,
                       const std::vector<int>& scheduled);

/// c_k + R_k >= I_k - kSuccessMargin
bool success_check(const RateReport& report, const CommonRateShares& shares,
                   const std::vector<double>& required_rates, int k);

double age_factor(const AoiiConfig& cfg, double t, double last_accurate);
double gap_factor(const AoiiConfig& cfg, double x, double x_hat);

/// f(t) * g(X, X_hat). Throws std::invalid_argument when t < V.
double aoii_penalty(const AoiiConfig& cfg, double t, double last_accurate, double x, double x_hat);

/// AoII at t+1 after the decision at t: zero on success, otherwise the
/// age factor evaluated at t+1 times g(X_next, X_hat_next).
double next_slot_aoii(const AoiiConfig& cfg, double t, double last_accurate, double x_next,
                      double x_hat_next, bool success);

}  // namespace rsma
