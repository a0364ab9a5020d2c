#pragma once

#include "rsma/model.hpp"
#include "rsma/optimizer.hpp"
#include "rsma/rng.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsma {

/// Per-user semantic process as seen by transmitter and receiver.
struct SemanticState {
  std::vector<double> x;      ///< current process value X_t
  std::vector<double> x_hat;  ///< receiver estimate, X at slot U
  std::vector<int> last_accurate;
  std::vector<int> last_success;

  int num_users() const { return static_cast<int>(x.size()); }

  /// V = U = 0 and X = X_hat = a draw from `rng`, so the receiver starts in sync.
  static SemanticState initial(int num_users, RandomStream& rng);
};

/// Draws a fresh X_k ~ N(0, 1) for every user; estimates and timestamps are untouched.
SemanticState step_process(SemanticState state, RandomStream& rng);

/// For each k in `successful`: U = t, X_hat = X, V = t + 1.
SemanticState apply_ack(SemanticState state, const std::vector<int>& successful, int t);

enum class Scenario { kGeometric, kRayleigh };
std::string_view to_string(Scenario scenario);

struct VMode {
  enum class Kind { kZero, kFixed, kUniform };
  Kind kind = Kind::kZero;
  std::vector<int> values;  ///< kFixed: one entry per user
  int max = 0;              ///< kUniform: V drawn from {0, ..., max}

  std::string label() const;
  /// Decision slot t: the largest V the mode can produce.
  int decision_slot() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kRayleigh;
  int num_antennas = 4;
  int num_users = 3;
  std::vector<double> thetas;  ///< geometric only
  std::vector<double> snr_db;
  std::vector<double> rates;   ///< I values; I_k = I for all k
  int num_realizations = 1;
  VMode v_mode;
  AoiiConfig aoii;
  std::vector<AccessMode> modes{AccessMode::kRsma, AccessMode::kSdma};
  std::uint64_t seed = 1;
  int slots = 1;  ///< trajectory horizon T
  /// Trajectory only: overrides 10^(snr/10) when set (0 disables the transmitter).
  std::optional<double> total_power;
  /// Give RSMA the SDMA schedule of the same instance as an incumbent.
  bool warm_start = true;
  OptimizerConfig optimizer;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses a config object. Unknown keys, missing keys and type errors raise
/// ConfigError with the key path in the message.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
/// Canonical form: every field written out, keys sorted.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// FNV-1a (64-bit, hex) of the canonical JSON text.
std::string config_hash(const ExperimentConfig& cfg);

/// P_total = 10^(snr_db / 10)
double snr_to_power(double snr_db);

/// One optimizer run.
struct RunRow {
  Scenario scenario = Scenario::kRayleigh;
  AccessMode mode = AccessMode::kRsma;
  double snr_db = 0.0;
  double rate = 0.0;
  int realization = 0;
  std::string v_mode;
  double aoii = 0.0;
  int num_scheduled = 0;
  int sca_iters = 0;
  double theta = 0.0;
  int demotions = 0;
  std::string error;  ///< empty on success
};

struct CellSummary {
  AccessMode mode = AccessMode::kRsma;
  double theta = 0.0;
  double snr_db = 0.0;
  double rate = 0.0;
  double mean_aoii = 0.0;
  double mean_scheduled = 0.0;
  /// Share of realizations where RSMA schedules more users than SDMA, in
  /// percent; empty unless both modes ran.
  std::optional<double> pct_rsma_more;
  int completed = 0;
  int failures = 0;
  /// Optimizer time summed over realizations and modes (not written to the summary).
  double seconds = 0.0;
};

struct MetricsRecord {
  std::vector<RunRow> rows;
  std::vector<CellSummary> cells;

  int failures() const;
};

/// Sees every successful optimizer run (calls are serialized).
using RunObserver = std::function<void(const SlotProblem&, AccessMode, const ScheduleResult&)>;

/// Scheduled-user sweep: one run per (theta, snr, I, mode) on the geometric pair
/// with unit weights. A throwing cell is recorded in its row.
MetricsRecord sweep_scheduled_users(const ExperimentConfig& cfg, const RunObserver& observer = {});

/// Rayleigh Monte Carlo. Realizations run on `jobs` threads; rows are ordered by
/// realization index so the output does not depend on scheduling.
MetricsRecord monte_carlo_aoii(const ExperimentConfig& cfg, int jobs = 1, const RunObserver& observer = {});

struct TrajectoryPoint {
  int slot = 0;
  AccessMode mode = AccessMode::kRsma;
  double snr_db = 0.0;
  double rate = 0.0;
  /// Sum over users of the AoII reached at slot + 1.
  double aoii = 0.0;
  double cumulative_aoii = 0.0;
  int num_scheduled = 0;
  int sca_iters = 0;
  std::string error;
};

/// Closed loop over cfg.slots slots for every (snr, I, mode): draw X, weigh
/// users, schedule, acknowledge. Channels are redrawn each slot; slot 0 uses
/// the same channels and process draws as Monte Carlo realization 0.
std::vector<TrajectoryPoint> run_trajectory(const ExperimentConfig& cfg);

/// Decision weights (t + 1 - V_k) g(X_k, X_hat_k).
std::vector<double> decision_weights(const AoiiConfig& aoii, const SemanticState& state, int t);

void write_rows_csv(std::ostream& out, const std::vector<RunRow>& rows, const std::string& hash,
                    std::uint64_t seed);
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryPoint>& points, const std::string& hash,
                          std::uint64_t seed);
nlohmann::json summary_to_json(const MetricsRecord& record, const std::string& hash, std::uint64_t seed);

/// Shortest round-trip decimal text, independent of the global locale.
std::string format_double(double value);

}  // namespace rsma
