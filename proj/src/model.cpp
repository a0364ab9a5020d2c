#include "rsma/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsma {

namespace {

void check_dimensions(const ChannelSet& channels, const PrecoderSet& precoders, int k) {
  if (k < 0 || k >= channels.num_users()) throw std::out_of_range("user index out of range");
  if (precoders.num_users() != channels.num_users() ||
      precoders.num_antennas() != channels.num_antennas()) {
    throw std::invalid_argument("precoder dimensions do not match the channel set");
  }
}

double received_power(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p) {
  return std::norm(h.dot(p));  // Eigen's dot conjugates the first argument: h^H p
}

double private_interference(const ChannelSet& channels, const PrecoderSet& precoders, int k) {
  double total = 0.0;
  for (int i = 0; i < precoders.num_users(); ++i) {
    if (i != k) total += received_power(channels[k], precoders.privates[static_cast<std::size_t>(i)]);
  }
  return total;
}

}  // namespace

PrecoderSet PrecoderSet::zeros(int num_antennas, int num_users) {
  PrecoderSet p;
  p.common = Eigen::VectorXcd::Zero(num_antennas);
  p.privates.assign(static_cast<std::size_t>(num_users), Eigen::VectorXcd::Zero(num_antennas));
  return p;
}

double PrecoderSet::total_power() const {
  double total = common.squaredNorm();
  for (const auto& p : privates) total += p.squaredNorm();
  return total;
}

bool PrecoderSet::within_budget(double budget, double rel_tol) const {
  return total_power() <= budget * (1.0 + rel_tol);
}

void AoiiConfig::validate() const {
  if (!(zeta >= 0.0) || !(c_thresh >= 0.0)) {
    throw std::invalid_argument("AoiiConfig: thresholds must be nonnegative");
  }
}

double CommonRateShares::scheduled_sum(const std::vector<int>& scheduled) const {
  double total = 0.0;
  for (int k : scheduled) total += shares.at(static_cast<std::size_t>(k));
  return total;
}

double sinr_private(const ChannelSet& channels, const PrecoderSet& precoders, int k) {
  check_dimensions(channels, precoders, k);
  const double signal = received_power(channels[k], precoders.privates[static_cast<std::size_t>(k)]);
  return signal / (1.0 + private_interference(channels, precoders, k));
}

double sinr_common(const ChannelSet& channels, const PrecoderSet& precoders, int k) {
  check_dimensions(channels, precoders, k);
  const double signal = received_power(channels[k], precoders.common);
  const double own = received_power(channels[k], precoders.privates[static_cast<std::size_t>(k)]);
  return signal / (1.0 + own + private_interference(channels, precoders, k));
}

RateReport rate_report(const ChannelSet& channels, const PrecoderSet& precoders,
                       const std::vector<int>& scheduled) {
  const int num_users = channels.num_users();
  RateReport report;
  report.sinr_common.resize(static_cast<std::size_t>(num_users));
  report.sinr_private.resize(static_cast<std::size_t>(num_users));
  report.rate_common_per_user.resize(static_cast<std::size_t>(num_users));
  report.rate_private.resize(static_cast<std::size_t>(num_users));
  for (int k = 0; k < num_users; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    report.sinr_common[idx] = sinr_common(channels, precoders, k);
    report.sinr_private[idx] = sinr_private(channels, precoders, k);
    report.rate_common_per_user[idx] = std::log2(1.0 + report.sinr_common[idx]);
    report.rate_private[idx] = std::log2(1.0 + report.sinr_private[idx]);
  }
  if (scheduled.empty()) {
    report.common_rate = 0.0;
  } else {
    double rc = std::numeric_limits<double>::infinity();
    for (int k : scheduled) {
      if (k < 0 || k >= num_users) throw std::out_of_range("scheduled user index out of range");
      rc = std::min(rc, report.rate_common_per_user[static_cast<std::size_t>(k)]);
    }
    report.common_rate = rc;
  }
  return report;
}

bool success_check(const RateReport& report, const CommonRateShares& shares,
                   const std::vector<double>& required_rates, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= report.rate_private.size()) {
    throw std::out_of_range("user index out of range");
  }
  const auto idx = static_cast<std::size_t>(k);
  const double share = idx < shares.shares.size() ? shares.shares[idx] : 0.0;
  return share + report.rate_private[idx] >= required_rates.at(idx) - kSuccessMargin;
}

double age_factor(const AoiiConfig& cfg, double t, double last_accurate) {
  if (t < last_accurate) throw std::invalid_argument("aoii: t must not precede V");
  const double age = t - last_accurate;
  switch (cfg.f) {
    case AgeFunction::kLinear:
      return age;
    case AgeFunction::kThreshold:
      return age >= cfg.zeta ? 1.0 : 0.0;
  }
  return 0.0;
}

double gap_factor(const AoiiConfig& cfg, double x, double x_hat) {
  const double diff = x - x_hat;
  switch (cfg.g) {
    case GapFunction::kSquare:
      return diff * diff;
    case GapFunction::kThreshold:
      return std::abs(diff) >= cfg.c_thresh ? 1.0 : 0.0;
  }
  return 0.0;
}

double aoii_penalty(const AoiiConfig& cfg, double t, double last_accurate, double x, double x_hat) {
  return age_factor(cfg, t, last_accurate) * gap_factor(cfg, x, x_hat);
}

double next_slot_aoii(const AoiiConfig& cfg, double t, double last_accurate, double x_next,
                      double x_hat_next, bool success) {
  // V may already equal t+1 (freshness renewed during the slot).
  if (t + 1.0 < last_accurate) throw std::invalid_argument("aoii: t must not precede V");
  if (success) return 0.0;
  return aoii_penalty(cfg, t + 1.0, last_accurate, x_next, x_hat_next);
}

}  // namespace rsma
