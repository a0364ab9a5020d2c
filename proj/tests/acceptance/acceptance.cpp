// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "rsma/conic/audit.hpp"
#include "rsma/conic/encodings.hpp"
#include "rsma/conic/solver.hpp"
#include "rsma/optimizer.hpp"
#include "rsma/rng.hpp"
#include "rsma/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace rsma;

namespace {

// ------------------------------------------------------------ raw oracles

// |h^H p|^2 written out entry by entry
double gain(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index n = 0; n < h.size(); ++n) acc += std::conj(h(n)) * p(n);
  return std::norm(acc);
}

struct RawRates {
  std::vector<double> priv;
  std::vector<double> common;
};

RawRates raw_rates(const ChannelSet& channels, const PrecoderSet& precoders) {
  const int users = channels.num_users();
  RawRates r;
  for (int k = 0; k < users; ++k) {
    double all_private = 0.0;
    for (int i = 0; i < users; ++i) all_private += gain(channels[k], precoders.privates[static_cast<std::size_t>(i)]);
    const double own = gain(channels[k], precoders.privates[static_cast<std::size_t>(k)]);
    r.priv.push_back(std::log2(1.0 + own / (1.0 + all_private - own)));
    r.common.push_back(std::log2(1.0 + gain(channels[k], precoders.common) / (1.0 + all_private)));
  }
  return r;
}

double raw_power(const PrecoderSet& p) {
  double total = p.common.squaredNorm();
  for (const auto& v : p.privates) total += v.squaredNorm();
  return total;
}

// Returns an empty string when the schedule passes, otherwise the reason.
std::string audit_schedule(const SlotProblem& problem, const ScheduleResult& result) {
  std::ostringstream why;
  if (raw_power(result.precoders) > problem.total_power * (1.0 + 1e-6)) why << "power; ";
  const auto rates = raw_rates(problem.channels, result.precoders);
  double common_rate = result.scheduled.empty() ? 0.0 : 1e300;
  for (int k : result.scheduled) common_rate = std::min(common_rate, rates.common[static_cast<std::size_t>(k)]);
  double share_sum = 0.0;
  for (double c : result.shares.shares) {
    if (c < 0.0) why << "negative share; ";
  }
  for (int k : result.scheduled) share_sum += result.shares.shares[static_cast<std::size_t>(k)];
  if (share_sum > common_rate + 1e-6) why << "shares exceed R_c; ";
  for (int k : result.scheduled) {
    const auto uk = static_cast<std::size_t>(k);
    if (result.shares.shares[uk] + rates.priv[uk] < problem.required_rates[uk] - 1e-4) {
      why << "user " << k << " short; ";
    }
  }
  return why.str();
}

struct Audit {
  int runs = 0;
  int failures = 0;
  std::string first;

  void check(const SlotProblem& problem, const ScheduleResult& result) {
    ++runs;
    const auto why = audit_schedule(problem, result);
    if (why.empty()) return;
    if (failures++ == 0) first = why;
  }
};

SlotProblem slot(ChannelSet channels, double rate, double power) {
  const auto k = static_cast<std::size_t>(channels.num_users());
  return {std::move(channels), std::vector<double>(k, rate), std::vector<double>(k, 1.0), power};
}

OptimizerConfig mode_config(AccessMode mode) {
  OptimizerConfig cfg;
  cfg.mode = mode;
  return cfg;
}

std::vector<double> grid(double from, double to, double step) {
  std::vector<double> out;
  for (int i = 0; from + i * step <= to + 1e-12; ++i) out.push_back(from + i * step);
  return out;
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// ------------------------------------------------------------ criteria

Verdict sca_convergence(Audit& audit) {
  const auto start = std::chrono::steady_clock::now();
  const double tol = 10.0 * conic::SolverOptions{}.tol;
  int runs = 0;
  int bad_monotone = 0;
  int not_converged = 0;
  int max_iters = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto problem = slot(rayleigh(4, 3, seed), 2.0, snr_to_power(20.0));
    for (auto mode : {AccessMode::kRsma, AccessMode::kSdma}) {
      const auto cfg = mode_config(mode);
      const auto result = sca_solve(problem, cfg);
      audit.check(problem, result);
      ++runs;
      for (std::size_t n = 1; n < result.trace.size(); ++n) {
        if (result.trace[n].objective > result.trace[n - 1].objective + tol) {
          ++bad_monotone;
          break;
        }
      }
      if (result.status != ScaStatus::kConverged || result.sca_iterations > cfg.max_sca_iters) ++not_converged;
      max_iters = std::max(max_iters, result.sca_iterations);
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << runs << " runs, " << bad_monotone << " non-monotone, " << not_converged << " not converged, max "
    << max_iters << " iterations, " << seconds << " s";
  return {bad_monotone == 0 && not_converged == 0 && seconds < 120.0, d.str()};
}

Verdict single_user_oracle(Audit& audit) {
  int points = 0;
  int matches = 0;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto channels = rayleigh(4, 1, seed);
    for (double snr : {10.0, 20.0}) {
      const double power = snr_to_power(snr);
      const double capacity = std::log2(1.0 + power * channels[0].squaredNorm());
      for (double rate : grid(0.5, 12.0, 0.5)) {
        for (auto mode : {AccessMode::kRsma, AccessMode::kSdma}) {
          const auto problem = slot(channels, rate, power);
          const auto result = sca_solve(problem, mode_config(mode));
          audit.check(problem, result);
          ++points;
          const bool scheduled = result.scheduled.size() == 1;
          if (scheduled == (capacity >= rate)) {
            ++matches;
          } else {
            worst_gap = std::max(worst_gap, std::abs(capacity - rate));
          }
        }
      }
    }
  }
  std::ostringstream d;
  d << matches << "/" << points << " match, worst mismatch " << worst_gap << " bits from threshold";
  return {matches >= 0.95 * points && worst_gap <= 0.05, d.str()};
}

Verdict orthogonal_oracle(Audit& audit) {
  const auto channels = geometric_pair(4, std::numbers::pi / 2.0);
  int checked = 0;
  int wrong = 0;
  std::ostringstream d;
  for (double snr : {10.0, 20.0}) {
    const double power = snr_to_power(snr);
    // brute-force power split: both served iff some q gives both rates
    auto both_fit = [&](double rate) {
      for (int i = 0; i <= 100000; ++i) {
        const double q = power * i / 100000.0;
        if (std::log2(1.0 + 4.0 * q) >= rate && std::log2(1.0 + 4.0 * (power - q)) >= rate) return true;
      }
      return false;
    };
    const double threshold = std::log2(1.0 + 2.0 * power);
    auto rates = grid(0.25, threshold + 3.0, 0.25);
    rates.push_back(threshold - 0.1);
    rates.push_back(threshold + 0.1);
    for (double rate : rates) {
      if (std::abs(rate - threshold) < 0.1 - 1e-12) continue;
      const bool expected = both_fit(rate);
      for (auto mode : {AccessMode::kRsma, AccessMode::kSdma}) {
        const auto problem = slot(channels, rate, power);
        const auto result = sca_solve(problem, mode_config(mode));
        audit.check(problem, result);
        ++checked;
        if ((result.scheduled.size() == 2) != expected) {
          if (wrong++ == 0) d << "first miss: " << to_string(mode) << " snr " << snr << " I " << rate << "; ";
        }
      }
    }
  }
  d << checked - wrong << "/" << checked << " agree with the power-split oracle";
  return {wrong == 0, d.str()};
}

Verdict geometric_sweep(Audit& audit) {
  bool pass = true;
  std::ostringstream d;
  for (double divisor : {18.0, 9.0}) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::kGeometric;
    cfg.num_antennas = 4;
    cfg.num_users = 2;
    cfg.thetas = {std::numbers::pi / divisor};
    cfg.snr_db = {20.0};
    cfg.rates = grid(0.25, 10.0, 0.25);
    const auto record = sweep_scheduled_users(cfg, [&](const SlotProblem& p, AccessMode, const ScheduleResult& r) {
      audit.check(p, r);
    });
    double last_two_rsma = 0.0;
    double last_two_sdma = 0.0;
    bool split = false;
    for (std::size_t i = 0; i < cfg.rates.size(); ++i) {
      const auto& rsma = record.rows[2 * i];
      const auto& sdma = record.rows[2 * i + 1];
      if (rsma.num_scheduled == 2) last_two_rsma = rsma.rate;
      if (sdma.num_scheduled == 2) last_two_sdma = sdma.rate;
      split = split || (rsma.num_scheduled == 2 && sdma.num_scheduled == 1);
    }
    const bool ok = split && last_two_rsma > last_two_sdma && record.failures() == 0;
    pass = pass && ok;
    d << "pi/" << divisor << ": two users up to I=" << last_two_rsma << " (RSMA) vs " << last_two_sdma
      << " (SDMA)" << (split ? "" : ", no 2-vs-1 interval") << "; ";
  }
  return {pass, d.str()};
}

Verdict monte_carlo_reproduction(Audit& audit) {
  bool pass = true;
  std::ostringstream d;
  auto run = [&](int n, int k, std::vector<double> snrs, std::vector<double> rates, int realizations,
                 bool need_more) {
    ExperimentConfig cfg;
    cfg.num_antennas = n;
    cfg.num_users = k;
    cfg.snr_db = std::move(snrs);
    cfg.rates = std::move(rates);
    cfg.num_realizations = realizations;
    cfg.seed = 2024;
    const auto record = monte_carlo_aoii(cfg, 1, [&](const SlotProblem& p, AccessMode, const ScheduleResult& r) {
      audit.check(p, r);
    });
    std::map<std::pair<double, double>, std::pair<double, double>> means;
    double best_pct = 0.0;
    int violations = 0;
    for (const auto& cell : record.cells) {
      auto& m = means[{cell.snr_db, cell.rate}];
      (cell.mode == AccessMode::kRsma ? m.first : m.second) = cell.mean_aoii;
      best_pct = std::max(best_pct, cell.pct_rsma_more.value_or(0.0));
    }
    for (const auto& [key, m] : means) violations += m.first <= m.second ? 0 : 1;
    const bool ok = violations == 0 && record.failures() == 0 && (!need_more || best_pct > 0.0);
    pass = pass && ok;
    d << "N=" << n << " K=" << k << ": " << means.size() - violations << "/" << means.size()
      << " points with RSMA <= SDMA, max pct_rsma_more " << best_pct << ", " << record.failures() << " failed; ";
  };
  run(4, 3, {15.0, 20.0}, grid(1.0, 8.0, 1.0), 100, true);
  run(8, 5, {25.0, 30.0}, {4.0, 8.0}, 20, false);
  return {pass, d.str()};
}

Verdict linearization_suite() {
  RandomStream rng(606);
  const double step = 1e-5;
  int bad_value = 0;
  int bad_grad = 0;
  int bad_minorant = 0;
  double worst_value = 0.0;
  double worst_grad = 0.0;
  for (int i = 0; i < 1000; ++i) {
    // log2(1 + beta)
    const double b0 = 30.0 * rng.uniform();
    const double value = std::abs(sca::log2_tangent(b0, b0) - std::log2(1.0 + b0));
    const double exact_grad = 1.0 / ((1.0 + b0) * std::numbers::ln2);
    const double fd = (sca::log2_tangent(b0, b0 + step) - sca::log2_tangent(b0, b0 - step)) / (2.0 * step);
    worst_value = std::max(worst_value, value);
    worst_grad = std::max(worst_grad, std::abs(fd - exact_grad));
    bad_value += value > 1e-9;
    bad_grad += std::abs(fd - exact_grad) > 1e-5;

    // |h^H p|^2 / sigma at (p0, sigma0)
    const int n = 4;
    Eigen::VectorXcd h(n);
    Eigen::VectorXcd p0(n);
    for (int j = 0; j < n; ++j) {
      h(j) = rng.complex_normal();
      p0(j) = rng.complex_normal();
    }
    const double s0 = 1.0 + 5.0 * rng.uniform();
    const double exact = gain(h, p0) / s0;
    const double at_point = sca::quad_over_linear_tangent(h, p0, s0, p0, s0);
    const double err = std::abs(at_point - exact) / std::max(1.0, exact);
    worst_value = std::max(worst_value, err);
    bad_value += err > 1e-9;

    // analytic gradient of the exact function vs. finite differences of the expansion
    const std::complex<double> a0 = h.dot(p0);
    for (int j = 0; j < 2 * n + 1; ++j) {
      Eigen::VectorXcd dp = Eigen::VectorXcd::Zero(n);
      double ds = 0.0;
      double grad = 0.0;
      if (j < n) {
        dp(j) = 1.0;
        grad = 2.0 * (std::conj(a0) * std::conj(h(j))).real() / s0;
      } else if (j < 2 * n) {
        dp(j - n) = std::complex<double>(0.0, 1.0);
        grad = 2.0 * (std::conj(a0) * std::conj(h(j - n)) * std::complex<double>(0.0, 1.0)).real() / s0;
      } else {
        ds = 1.0;
        grad = -std::norm(a0) / (s0 * s0);
      }
      const double fd_t = (sca::quad_over_linear_tangent(h, p0, s0, p0 + step * dp, s0 + step * ds) -
                           sca::quad_over_linear_tangent(h, p0, s0, p0 - step * dp, s0 - step * ds)) /
                          (2.0 * step);
      const double e = std::abs(fd_t - grad) / std::max(1.0, std::abs(grad));
      worst_grad = std::max(worst_grad, e);
      bad_grad += e > 1e-5;
    }

    // global minorant at a perturbed point
    Eigen::VectorXcd p(n);
    for (int j = 0; j < n; ++j) p(j) = p0(j) + rng.complex_normal();
    const double s = std::max(1.0, s0 + 3.0 * rng.standard_normal());
    if (sca::quad_over_linear_tangent(h, p0, s0, p, s) > gain(h, p) / s + 1e-10) ++bad_minorant;
  }
  std::ostringstream d;
  d << "worst value error " << worst_value << ", worst gradient error " << worst_grad << ", " << bad_minorant
    << " minorant violations";
  return {bad_value == 0 && bad_grad == 0 && bad_minorant == 0, d.str()};
}

Verdict conic_correctness() {
  using namespace conic;
  struct Case {
    std::string name;
    ConicProgram program;
    double expected;
  };
  std::vector<Case> cases;

  {  // max log2(1 + x), 0 <= x <= 3
    ConicProgram p(2);
    p.set_objective(1, -1.0);
    p.add_greater_equal(AffineExpr::variable(0), 0.0);
    p.add_less_equal(AffineExpr::variable(0), 3.0);
    encode_log_lower(0, 1, p);
    cases.push_back({"log-max", p, -2.0});
  }
  {  // sum of logs under a budget: x1 + x2 <= 6 -> x = 3, 3
    ConicProgram p(4);
    p.set_objective(2, -1.0);
    p.set_objective(3, -1.0);
    AffineExpr budget = AffineExpr::variable(0);
    budget.add(1, 1.0);
    p.add_less_equal(budget, 6.0);
    p.add_greater_equal(AffineExpr::variable(0), 0.0);
    p.add_greater_equal(AffineExpr::variable(1), 0.0);
    encode_log_lower(0, 2, p);
    encode_log_lower(1, 3, p);
    cases.push_back({"log-sum", p, -2.0 * std::log2(4.0)});
  }
  {  // sigma >= 1 + |a|^2 with |a|^2 = 2
    ConicProgram p(3);
    p.set_objective(0, 1.0);
    const ComplexBlock a{1, 1};
    p.add_equality(AffineExpr::variable(a.re(0)), 1.0);
    p.add_equality(AffineExpr::variable(a.im(0)), 1.0);
    encode_interference_bound(Eigen::VectorXcd::Ones(1), {a}, 0, p);
    cases.push_back({"interference-3", p, 3.0});
  }
  {  // two fixed interferers: 1 + 2 + 0.5
    ConicProgram p(9);
    p.set_objective(0, 1.0);
    const double fixed[8] = {1.0, 0.0, 1.0, 0.0, std::sqrt(0.5), 0.0, 0.0, 0.0};
    for (int i = 0; i < 8; ++i) p.add_equality(AffineExpr::variable(1 + i), fixed[i]);
    encode_interference_bound(Eigen::VectorXcd::Ones(2), {ComplexBlock{1, 2}, ComplexBlock{5, 2}}, 0, p);
    cases.push_back({"interference-3.5", p, 3.5});
  }
  {  // min x1 + x2, x1 >= 1, x2 >= 2
    ConicProgram p(2);
    p.set_objective(0, 1.0);
    p.set_objective(1, 1.0);
    p.add_greater_equal(AffineExpr::variable(0), 1.0);
    p.add_greater_equal(AffineExpr::variable(1), 2.0);
    cases.push_back({"lp-separable", p, 3.0});
  }
  {  // separable LP in 6 variables with box bounds: sum_i c_i x_i, c alternating sign
    ConicProgram p(6);
    double expected = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double c = (i % 2 == 0 ? 1.0 : -1.0) * (i + 1);
      p.set_objective(i, c);
      p.add_greater_equal(AffineExpr::variable(i), -1.0 - i);
      p.add_less_equal(AffineExpr::variable(i), 2.0 + i);
      expected += c > 0 ? c * (-1.0 - i) : c * (2.0 + i);
    }
    cases.push_back({"lp-box", p, expected});
  }

  int failures = 0;
  double worst = 0.0;
  std::ostringstream d;
  for (const auto& c : cases) {
    const auto sol = solve(c.program);
    const double err = std::abs(sol.objective_value - c.expected);
    worst = std::max(worst, err);
    const bool audited = sol.status == SolveStatus::kOptimal && audit(c.program, sol.primal).passes(1e-6);
    if (sol.status != SolveStatus::kOptimal || err > 1e-6 || !audited) {
      ++failures;
      d << c.name << " failed (" << to_string(sol.status) << ", error " << err << "); ";
    }
  }
  d << cases.size() - failures << "/" << cases.size() << " solved and audited, worst objective error " << worst;
  return {failures == 0, d.str()};
}

Verdict sdma_dominance(Audit& audit) {
  int worse = 0;
  int strictly_better = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomStream rng(seed, 0, Stream::kProcess);
    auto problem = slot(rayleigh(4, 3, 1000 + seed), 2.0 + static_cast<double>(seed % 5), snr_to_power(20.0));
    for (auto& w : problem.weights) w = 0.1 + rng.uniform();
    const auto sdma = sca_solve(problem, mode_config(AccessMode::kSdma));
    const auto rsma = sca_solve(problem, mode_config(AccessMode::kRsma), &sdma);
    audit.check(problem, sdma);
    audit.check(problem, rsma);
    worse += rsma.achieved_aoii > sdma.achieved_aoii ? 1 : 0;
    strictly_better += rsma.achieved_aoii < sdma.achieved_aoii ? 1 : 0;
  }
  std::ostringstream d;
  d << "50 instances, RSMA worse on " << worse << ", strictly better on " << strictly_better;
  return {worse == 0, d.str()};
}

}  // namespace

int main() {
  Audit audit;
  int failed = 0;
  auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("[%s] %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  };

  report(1, "SCA monotonicity and convergence", sca_convergence(audit));
  report(2, "single-user analytic oracle", single_user_oracle(audit));
  report(3, "orthogonal-channel oracle", orthogonal_oracle(audit));
  report(4, "scheduled users vs. I on the geometric pair", geometric_sweep(audit));
  report(5, "Monte Carlo mean AoII, RSMA vs. SDMA", monte_carlo_reproduction(audit));
  report(6, "linearization tangency and minorant", linearization_suite());
  report(7, "conic solver closed-form set", conic_correctness());

  const auto dominance = sdma_dominance(audit);

  std::ostringstream d;
  d << audit.runs << " schedules from criteria 1-5 and 9, " << audit.failures << " violations";
  if (audit.failures > 0) d << " (first: " << audit.first << ")";
  report(8, "feasibility audit of returned schedules", {audit.failures == 0, d.str()});
  report(9, "SDMA-restriction dominance", dominance);

  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
