#include "rsma/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace rsma {

using nlohmann::json;

SemanticState SemanticState::initial(int num_users, RandomStream& rng) {
  const auto k = static_cast<std::size_t>(num_users);
  SemanticState state{std::vector<double>(k), std::vector<double>(k), std::vector<int>(k, 0),
                      std::vector<int>(k, 0)};
  for (std::size_t i = 0; i < k; ++i) state.x[i] = rng.standard_normal();
  state.x_hat = state.x;
  return state;
}

SemanticState step_process(SemanticState state, RandomStream& rng) {
  for (double& x : state.x) x = rng.standard_normal();
  return state;
}

SemanticState apply_ack(SemanticState state, const std::vector<int>& successful, int t) {
  if (t < 0) throw std::invalid_argument("apply_ack: negative slot");
  for (int k : successful) {
    const auto uk = static_cast<std::size_t>(k);
    state.last_success.at(uk) = t;
    state.x_hat.at(uk) = state.x.at(uk);
    state.last_accurate.at(uk) = t + 1;
  }
  return state;
}

std::vector<double> decision_weights(const AoiiConfig& aoii, const SemanticState& state, int t) {
  std::vector<double> weights(state.x.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] = age_factor(aoii, t + 1, state.last_accurate[k]) * gap_factor(aoii, state.x[k], state.x_hat[k]);
  }
  return weights;
}

std::string_view to_string(Scenario scenario) {
  return scenario == Scenario::kGeometric ? "geometric" : "rayleigh";
}

std::string VMode::label() const {
  switch (kind) {
    case Kind::kZero:
      return "zero";
    case Kind::kFixed: {
      std::string text = "fixed(";
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) text += ' ';
        text += std::to_string(values[i]);
      }
      return text + ")";
    }
    case Kind::kUniform:
      return "uniform(" + std::to_string(max) + ")";
  }
  return "zero";
}

int VMode::decision_slot() const {
  switch (kind) {
    case Kind::kZero:
      return 0;
    case Kind::kFixed:
      return values.empty() ? 0 : *std::max_element(values.begin(), values.end());
    case Kind::kUniform:
      return max;
  }
  return 0;
}

double snr_to_power(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- config

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& what) {
  throw ConfigError("config: '" + key + "' " + what);
}

double get_number(const json& node, const std::string& key) {
  if (!node.is_number()) config_fail(key, "must be a number");
  return node.get<double>();
}

int get_int(const json& node, const std::string& key) {
  if (!node.is_number_integer()) config_fail(key, "must be an integer");
  return node.get<int>();
}

bool get_bool(const json& node, const std::string& key) {
  if (!node.is_boolean()) config_fail(key, "must be true or false");
  return node.get<bool>();
}

std::string get_string(const json& node, const std::string& key) {
  if (!node.is_string()) config_fail(key, "must be a string");
  return node.get<std::string>();
}

// A scalar is accepted as a one-element list.
std::vector<double> get_number_list(const json& node, const std::string& key) {
  if (node.is_number()) return {node.get<double>()};
  if (!node.is_array()) config_fail(key, "must be a number or an array of numbers");
  if (node.empty()) config_fail(key, "must not be empty");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(get_number(node[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown(const json& node, const std::string& prefix, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : node.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_fail(prefix + key, "is not a recognized key");
    }
  }
}

const json& require(const json& node, const std::string& prefix, const char* key) {
  if (!node.contains(key)) config_fail(prefix + key, "is required");
  return node.at(key);
}

VMode parse_v_mode(const json& node) {
  VMode mode;
  if (node.is_string()) {
    if (node.get<std::string>() != "zero") config_fail("v_mode", "must be \"zero\" or an object with a 'kind'");
    return mode;
  }
  if (!node.is_object()) config_fail("v_mode", "must be \"zero\" or an object with a 'kind'");
  const auto kind = get_string(require(node, "v_mode.", "kind"), "v_mode.kind");
  if (kind == "zero") {
    reject_unknown(node, "v_mode.", {"kind"});
  } else if (kind == "fixed") {
    reject_unknown(node, "v_mode.", {"kind", "values"});
    mode.kind = VMode::Kind::kFixed;
    const auto& values = require(node, "v_mode.", "values");
    if (!values.is_array() || values.empty()) config_fail("v_mode.values", "must be a nonempty array of integers");
    for (std::size_t i = 0; i < values.size(); ++i) {
      mode.values.push_back(get_int(values[i], "v_mode.values[" + std::to_string(i) + "]"));
    }
  } else if (kind == "uniform") {
    reject_unknown(node, "v_mode.", {"kind", "max"});
    mode.kind = VMode::Kind::kUniform;
    mode.max = get_int(require(node, "v_mode.", "max"), "v_mode.max");
  } else {
    config_fail("v_mode.kind", "must be one of zero, fixed, uniform");
  }
  return mode;
}

AoiiConfig parse_aoii(const json& node) {
  if (!node.is_object()) config_fail("aoii", "must be an object");
  reject_unknown(node, "aoii.", {"f", "g", "zeta", "c"});
  AoiiConfig cfg;
  if (node.contains("f")) {
    const auto f = get_string(node["f"], "aoii.f");
    if (f == "linear") {
      cfg.f = AgeFunction::kLinear;
    } else if (f == "threshold") {
      cfg.f = AgeFunction::kThreshold;
    } else {
      config_fail("aoii.f", "must be linear or threshold");
    }
  }
  if (node.contains("g")) {
    const auto g = get_string(node["g"], "aoii.g");
    if (g == "square") {
      cfg.g = GapFunction::kSquare;
    } else if (g == "threshold") {
      cfg.g = GapFunction::kThreshold;
    } else {
      config_fail("aoii.g", "must be square or threshold");
    }
  }
  if (node.contains("zeta")) cfg.zeta = get_number(node["zeta"], "aoii.zeta");
  if (node.contains("c")) cfg.c_thresh = get_number(node["c"], "aoii.c");
  return cfg;
}

void parse_optimizer(const json& node, OptimizerConfig& cfg) {
  if (!node.is_object()) config_fail("optimizer", "must be an object");
  reject_unknown(node, "optimizer.",
                 {"big_m", "epsilon", "max_sca_iters", "z_round_delta", "rate_margin", "exact_beta", "solver_tol",
                  "solver_max_iter"});
  if (node.contains("big_m")) cfg.big_m = get_number(node["big_m"], "optimizer.big_m");
  if (node.contains("epsilon")) cfg.epsilon = get_number(node["epsilon"], "optimizer.epsilon");
  if (node.contains("max_sca_iters")) cfg.max_sca_iters = get_int(node["max_sca_iters"], "optimizer.max_sca_iters");
  if (node.contains("z_round_delta")) cfg.z_round_delta = get_number(node["z_round_delta"], "optimizer.z_round_delta");
  if (node.contains("rate_margin")) cfg.rate_margin = get_number(node["rate_margin"], "optimizer.rate_margin");
  if (node.contains("exact_beta")) cfg.exact_beta = get_bool(node["exact_beta"], "optimizer.exact_beta");
  if (node.contains("solver_tol")) cfg.solver.tol = get_number(node["solver_tol"], "optimizer.solver_tol");
  if (node.contains("solver_max_iter")) {
    cfg.solver.max_iter = get_int(node["solver_max_iter"], "optimizer.solver_max_iter");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_antennas < 1) config_fail("num_antennas", "must be >= 1");
  if (num_users < 1) config_fail("num_users", "must be >= 1");
  if (scenario == Scenario::kGeometric) {
    if (num_users != 2) config_fail("num_users", "must be 2 for the geometric scenario");
    if (thetas.empty()) config_fail("theta", "is required for the geometric scenario");
  } else if (!thetas.empty()) {
    config_fail("theta", "only applies to the geometric scenario");
  }
  if (snr_db.empty()) config_fail("snr_db", "must not be empty");
  if (rates.empty()) config_fail("I_values", "must not be empty");
  for (double rate : rates) {
    if (!(rate > 0.0) || !std::isfinite(rate)) config_fail("I_values", "entries must be positive");
  }
  for (double snr : snr_db) {
    if (!std::isfinite(snr)) config_fail("snr_db", "entries must be finite");
  }
  if (num_realizations < 1) config_fail("num_realizations", "must be >= 1");
  if (slots < 1) config_fail("slots", "must be >= 1");
  if (modes.empty()) config_fail("modes", "must not be empty");
  if (v_mode.kind == VMode::Kind::kFixed) {
    if (static_cast<int>(v_mode.values.size()) != num_users) config_fail("v_mode.values", "needs one entry per user");
    for (int v : v_mode.values) {
      if (v < 0) config_fail("v_mode.values", "entries must be >= 0");
    }
  }
  if (v_mode.kind == VMode::Kind::kUniform && v_mode.max < 0) config_fail("v_mode.max", "must be >= 0");
  if (total_power && !(*total_power >= 0.0)) config_fail("total_power", "must be >= 0");
  try {
    aoii.validate();
  } catch (const std::invalid_argument& e) {
    config_fail("aoii", e.what());
  }
  try {
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    config_fail("optimizer", e.what());
  }
  if (!(optimizer.solver.tol > 0.0)) config_fail("optimizer.solver_tol", "must be positive");
  if (optimizer.solver.max_iter < 1) config_fail("optimizer.solver_max_iter", "must be >= 1");
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(doc, "",
                 {"description", "scenario", "num_antennas", "num_users", "theta", "snr_db", "I_values",
                  "num_realizations", "v_mode", "aoii", "modes", "seed", "slots", "total_power", "warm_start",
                  "optimizer"});
  ExperimentConfig cfg;
  const auto scenario = get_string(require(doc, "", "scenario"), "scenario");
  if (scenario == "geometric") {
    cfg.scenario = Scenario::kGeometric;
  } else if (scenario == "rayleigh") {
    cfg.scenario = Scenario::kRayleigh;
  } else {
    config_fail("scenario", "must be geometric or rayleigh");
  }
  cfg.num_antennas = get_int(require(doc, "", "num_antennas"), "num_antennas");
  cfg.num_users = get_int(require(doc, "", "num_users"), "num_users");
  if (doc.contains("theta")) cfg.thetas = get_number_list(doc["theta"], "theta");
  cfg.snr_db = get_number_list(require(doc, "", "snr_db"), "snr_db");
  cfg.rates = get_number_list(require(doc, "", "I_values"), "I_values");
  if (doc.contains("num_realizations")) cfg.num_realizations = get_int(doc["num_realizations"], "num_realizations");
  if (doc.contains("v_mode")) cfg.v_mode = parse_v_mode(doc["v_mode"]);
  if (doc.contains("aoii")) cfg.aoii = parse_aoii(doc["aoii"]);
  if (doc.contains("modes")) {
    const auto& modes = doc["modes"];
    if (!modes.is_array()) config_fail("modes", "must be an array of \"rsma\" / \"sdma\"");
    cfg.modes.clear();
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const auto key = "modes[" + std::to_string(i) + "]";
      try {
        const auto mode = access_mode_from_string(get_string(modes[i], key));
        if (std::find(cfg.modes.begin(), cfg.modes.end(), mode) != cfg.modes.end()) config_fail(key, "is repeated");
        cfg.modes.push_back(mode);
      } catch (const std::invalid_argument&) {
        config_fail(key, "must be rsma or sdma");
      }
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) config_fail("seed", "must be a nonnegative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("slots")) cfg.slots = get_int(doc["slots"], "slots");
  if (doc.contains("total_power")) cfg.total_power = get_number(doc["total_power"], "total_power");
  if (doc.contains("warm_start")) cfg.warm_start = get_bool(doc["warm_start"], "warm_start");
  if (doc.contains("optimizer")) parse_optimizer(doc["optimizer"], cfg.optimizer);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON (" + e.what() + ")");
  }
  return config_from_json(doc);
}

json config_to_json(const ExperimentConfig& cfg) {
  json v_mode = {{"kind", cfg.v_mode.kind == VMode::Kind::kZero    ? "zero"
                          : cfg.v_mode.kind == VMode::Kind::kFixed ? "fixed"
                                                                   : "uniform"}};
  if (cfg.v_mode.kind == VMode::Kind::kFixed) v_mode["values"] = cfg.v_mode.values;
  if (cfg.v_mode.kind == VMode::Kind::kUniform) v_mode["max"] = cfg.v_mode.max;
  json modes = json::array();
  for (auto mode : cfg.modes) modes.push_back(std::string(to_string(mode)));
  const auto& opt = cfg.optimizer;
  json out = {
      {"scenario", std::string(to_string(cfg.scenario))},
      {"num_antennas", cfg.num_antennas},
      {"num_users", cfg.num_users},
      {"snr_db", cfg.snr_db},
      {"I_values", cfg.rates},
      {"num_realizations", cfg.num_realizations},
      {"v_mode", v_mode},
      {"aoii",
       {{"f", cfg.aoii.f == AgeFunction::kLinear ? "linear" : "threshold"},
        {"g", cfg.aoii.g == GapFunction::kSquare ? "square" : "threshold"},
        {"zeta", cfg.aoii.zeta},
        {"c", cfg.aoii.c_thresh}}},
      {"modes", modes},
      {"seed", cfg.seed},
      {"slots", cfg.slots},
      {"warm_start", cfg.warm_start},
      {"optimizer",
       {{"big_m", opt.big_m},
        {"epsilon", opt.epsilon},
        {"max_sca_iters", opt.max_sca_iters},
        {"z_round_delta", opt.z_round_delta},
        {"rate_margin", opt.rate_margin},
        {"exact_beta", opt.exact_beta},
        {"solver_tol", opt.solver.tol},
        {"solver_max_iter", opt.solver.max_iter}}},
  };
  if (!cfg.thetas.empty()) out["theta"] = cfg.thetas;
  if (cfg.total_power) out["total_power"] = *cfg.total_power;
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

// ---------------------------------------------------------------- harnesses

namespace {

struct Outcome {
  double aoii = 0.0;
  int num_scheduled = 0;
  int sca_iters = 0;
  int demotions = 0;
  std::vector<int> scheduled;
  std::string error;
  double seconds = 0.0;
};

Outcome to_outcome(const ScheduleResult& result) {
  return {result.achieved_aoii, static_cast<int>(result.scheduled.size()), result.sca_iterations, result.demotions,
          result.scheduled, {}};
}

Outcome failed(const std::exception& e) {
  Outcome out;
  out.error = e.what();
  return out;
}

// Runs every requested mode on one instance. SDMA runs first so that RSMA can
// start from its schedule; it is solved even when only RSMA was asked for, so
// the RSMA numbers do not depend on the mode list.
std::vector<Outcome> solve_modes(const SlotProblem& problem, const ExperimentConfig& cfg,
                                 const std::function<void(AccessMode, const ScheduleResult&)>& notify = {}) {
  using Clock = std::chrono::steady_clock;
  auto elapsed = [](Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); };
  const bool want_sdma = std::find(cfg.modes.begin(), cfg.modes.end(), AccessMode::kSdma) != cfg.modes.end();
  const bool want_rsma = std::find(cfg.modes.begin(), cfg.modes.end(), AccessMode::kRsma) != cfg.modes.end();
  std::optional<ScheduleResult> sdma;
  Outcome sdma_outcome;
  if (want_sdma || (want_rsma && cfg.warm_start)) {
    OptimizerConfig opt = cfg.optimizer;
    opt.mode = AccessMode::kSdma;
    const auto start = Clock::now();
    try {
      sdma = sca_solve(problem, opt);
      sdma_outcome = to_outcome(*sdma);
      if (notify && want_sdma) notify(AccessMode::kSdma, *sdma);
    } catch (const std::exception& e) {
      sdma_outcome = failed(e);
    }
    sdma_outcome.seconds = elapsed(start);
  }
  std::vector<Outcome> out;
  for (auto mode : cfg.modes) {
    if (mode == AccessMode::kSdma) {
      out.push_back(sdma_outcome);
      continue;
    }
    OptimizerConfig opt = cfg.optimizer;
    opt.mode = AccessMode::kRsma;
    const auto start = Clock::now();
    try {
      const ScheduleResult* incumbent = cfg.warm_start && sdma ? &*sdma : nullptr;
      const auto result = sca_solve(problem, opt, incumbent);
      if (notify) notify(AccessMode::kRsma, result);
      out.push_back(to_outcome(result));
    } catch (const std::exception& e) {
      out.push_back(failed(e));
    }
    out.back().seconds = elapsed(start);
  }
  return out;
}

// Nothing can be sent without power: every user stays unscheduled.
Outcome idle_outcome(const std::vector<double>& weights) {
  Outcome out;
  out.aoii = std::accumulate(weights.begin(), weights.end(), 0.0);
  return out;
}

int mode_index(const ExperimentConfig& cfg, AccessMode mode) {
  const auto it = std::find(cfg.modes.begin(), cfg.modes.end(), mode);
  return it == cfg.modes.end() ? -1 : static_cast<int>(it - cfg.modes.begin());
}

// outcomes[r][m] for one (theta, snr, I) cell
void summarize(const ExperimentConfig& cfg, double theta, double snr, double rate,
               const std::vector<std::vector<Outcome>>& outcomes, MetricsRecord& record) {
  const int rsma = mode_index(cfg, AccessMode::kRsma);
  const int sdma = mode_index(cfg, AccessMode::kSdma);
  std::optional<double> pct;
  if (rsma >= 0 && sdma >= 0) {
    int more = 0;
    for (const auto& row : outcomes) {
      const auto& a = row[static_cast<std::size_t>(rsma)];
      const auto& b = row[static_cast<std::size_t>(sdma)];
      if (a.error.empty() && b.error.empty() && a.num_scheduled > b.num_scheduled) ++more;
    }
    pct = 100.0 * more / static_cast<double>(outcomes.size());
  }
  for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
    CellSummary cell;
    cell.mode = cfg.modes[m];
    cell.theta = theta;
    cell.snr_db = snr;
    cell.rate = rate;
    cell.pct_rsma_more = pct;
    double aoii = 0.0;
    double scheduled = 0.0;
    for (const auto& row : outcomes) {
      const auto& o = row[m];
      cell.seconds += o.seconds;
      if (!o.error.empty()) {
        ++cell.failures;
        continue;
      }
      ++cell.completed;
      aoii += o.aoii;
      scheduled += o.num_scheduled;
    }
    if (cell.completed > 0) {
      cell.mean_aoii = aoii / cell.completed;
      cell.mean_scheduled = scheduled / cell.completed;
    }
    record.cells.push_back(cell);
  }
}

RunRow make_row(const ExperimentConfig& cfg, AccessMode mode, double theta, double snr, double rate,
                int realization, const Outcome& o) {
  RunRow row;
  row.scenario = cfg.scenario;
  row.mode = mode;
  row.snr_db = snr;
  row.rate = rate;
  row.realization = realization;
  row.v_mode = cfg.scenario == Scenario::kGeometric ? "zero" : cfg.v_mode.label();
  row.aoii = o.aoii;
  row.num_scheduled = o.num_scheduled;
  row.sca_iters = o.sca_iters;
  row.theta = theta;
  row.demotions = o.demotions;
  row.error = o.error;
  return row;
}

// Channels, semantic state and decision slot of Monte Carlo realization r.
struct Realization {
  ChannelSet channels;
  std::vector<double> weights;
};

Realization draw_realization(const ExperimentConfig& cfg, int r) {
  const auto index = static_cast<std::uint64_t>(r);
  RandomStream process(cfg.seed, index, Stream::kProcess);
  auto state = step_process(SemanticState::initial(cfg.num_users, process), process);
  RandomStream age(cfg.seed, index, Stream::kAge);
  for (int k = 0; k < cfg.num_users; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    int v = 0;
    if (cfg.v_mode.kind == VMode::Kind::kFixed) v = cfg.v_mode.values[uk];
    if (cfg.v_mode.kind == VMode::Kind::kUniform) v = static_cast<int>(age.uniform_int(0, cfg.v_mode.max));
    state.last_accurate[uk] = v;
    state.last_success[uk] = std::max(v - 1, 0);
  }
  return {rayleigh(cfg.num_antennas, cfg.num_users, mix_seed(cfg.seed, index, static_cast<std::uint64_t>(Stream::kChannel))),
          decision_weights(cfg.aoii, state, cfg.v_mode.decision_slot())};
}

}  // namespace

int MetricsRecord::failures() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const RunRow& r) { return !r.error.empty(); }));
}

MetricsRecord sweep_scheduled_users(const ExperimentConfig& cfg, const RunObserver& observer) {
  cfg.validate();
  if (cfg.scenario != Scenario::kGeometric) throw ConfigError("config: 'scenario' must be geometric for sweep-users");
  MetricsRecord record;
  for (double theta : cfg.thetas) {
    const auto channels = geometric_pair(cfg.num_antennas, theta);
    for (double snr : cfg.snr_db) {
      for (double rate : cfg.rates) {
        const SlotProblem problem{channels, std::vector<double>(2, rate), std::vector<double>(2, 1.0),
                                  snr_to_power(snr)};
        const auto outcomes = solve_modes(problem, cfg, [&](AccessMode mode, const ScheduleResult& result) {
          if (observer) observer(problem, mode, result);
        });
        for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
          record.rows.push_back(make_row(cfg, cfg.modes[m], theta, snr, rate, 0, outcomes[m]));
        }
        summarize(cfg, theta, snr, rate, {outcomes}, record);
      }
    }
  }
  return record;
}

MetricsRecord monte_carlo_aoii(const ExperimentConfig& cfg, int jobs, const RunObserver& observer) {
  cfg.validate();
  if (cfg.scenario != Scenario::kRayleigh) throw ConfigError("config: 'scenario' must be rayleigh for monte-carlo");
  const int count = cfg.num_realizations;
  const std::size_t cells = cfg.snr_db.size() * cfg.rates.size();
  // results[r][cell][mode]
  std::vector<std::vector<std::vector<Outcome>>> results(static_cast<std::size_t>(count));
  std::mutex observer_mutex;

  auto run_one = [&](int r) {
    const auto draw = draw_realization(cfg, r);
    auto& slot = results[static_cast<std::size_t>(r)];
    slot.reserve(cells);
    for (double snr : cfg.snr_db) {
      for (double rate : cfg.rates) {
        const SlotProblem problem{draw.channels, std::vector<double>(static_cast<std::size_t>(cfg.num_users), rate),
                                  draw.weights, snr_to_power(snr)};
        slot.push_back(solve_modes(problem, cfg, [&](AccessMode mode, const ScheduleResult& result) {
          if (!observer) return;
          const std::lock_guard lock(observer_mutex);
          observer(problem, mode, result);
        }));
      }
    }
  };

  const int workers = std::clamp(jobs, 1, count);
  if (workers == 1) {
    for (int r = 0; r < count; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < count; r = next++) run_one(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  MetricsRecord record;
  std::size_t cell = 0;
  for (double snr : cfg.snr_db) {
    for (double rate : cfg.rates) {
      std::vector<std::vector<Outcome>> outcomes;
      for (int r = 0; r < count; ++r) outcomes.push_back(results[static_cast<std::size_t>(r)][cell]);
      for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
        for (int r = 0; r < count; ++r) {
          record.rows.push_back(make_row(cfg, cfg.modes[m], 0.0, snr, rate, r, outcomes[static_cast<std::size_t>(r)][m]));
        }
      }
      summarize(cfg, 0.0, snr, rate, outcomes, record);
      ++cell;
    }
  }
  return record;
}

std::vector<TrajectoryPoint> run_trajectory(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.scenario != Scenario::kRayleigh) throw ConfigError("config: 'scenario' must be rayleigh for trajectory");
  std::vector<TrajectoryPoint> points;
  for (double snr : cfg.snr_db) {
    const double power = cfg.total_power.value_or(snr_to_power(snr));
    for (double rate : cfg.rates) {
      for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
        ExperimentConfig one = cfg;
        one.modes = {cfg.modes[m]};
        RandomStream process(cfg.seed, 0, Stream::kProcess);
        auto state = SemanticState::initial(cfg.num_users, process);
        double cumulative = 0.0;
        for (int t = 0; t < cfg.slots; ++t) {
          state = step_process(std::move(state), process);
          const auto weights = decision_weights(cfg.aoii, state, t);
          const auto channels = rayleigh(cfg.num_antennas, cfg.num_users,
                                         mix_seed(cfg.seed, static_cast<std::uint64_t>(t),
                                                  static_cast<std::uint64_t>(Stream::kChannel)));
          Outcome outcome;
          if (power > 0.0) {
            const SlotProblem problem{channels, std::vector<double>(static_cast<std::size_t>(cfg.num_users), rate),
                                      weights, power};
            outcome = solve_modes(problem, one).front();
          } else {
            outcome = idle_outcome(weights);
          }

          TrajectoryPoint point;
          point.slot = t;
          point.mode = cfg.modes[m];
          point.snr_db = snr;
          point.rate = rate;
          point.num_scheduled = outcome.num_scheduled;
          point.sca_iters = outcome.sca_iters;
          point.error = outcome.error;
          for (int k = 0; k < cfg.num_users; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const bool success =
                std::find(outcome.scheduled.begin(), outcome.scheduled.end(), k) != outcome.scheduled.end();
            // slow process: X_{t+1} is taken equal to X_t
            point.aoii += next_slot_aoii(cfg.aoii, t, state.last_accurate[uk], state.x[uk], state.x_hat[uk], success);
          }
          cumulative += point.aoii;
          point.cumulative_aoii = cumulative;
          points.push_back(point);
          state = apply_ack(std::move(state), outcome.scheduled, t);
        }
      }
    }
  }
  return points;
}

// ---------------------------------------------------------------- output

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

void write_preamble(std::ostream& out, const std::string& hash, std::uint64_t seed) {
  out << "# config_hash=" << hash << ", seed=" << seed << '\n';
}

}  // namespace

void write_rows_csv(std::ostream& out, const std::vector<RunRow>& rows, const std::string& hash, std::uint64_t seed) {
  write_preamble(out, hash, seed);
  out << "scenario,mode,snr_db,I,realization,v_mode,aoii,num_scheduled,sca_iters,theta,demotions,error\n";
  for (const auto& r : rows) {
    out << to_string(r.scenario) << ',' << to_string(r.mode) << ',' << format_double(r.snr_db) << ','
        << format_double(r.rate) << ',' << r.realization << ',' << csv_field(r.v_mode) << ','
        << format_double(r.aoii) << ',' << r.num_scheduled << ',' << r.sca_iters << ',' << format_double(r.theta)
        << ',' << r.demotions << ',' << csv_field(r.error) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryPoint>& points, const std::string& hash,
                          std::uint64_t seed) {
  write_preamble(out, hash, seed);
  out << "slot,mode,snr_db,I,aoii,cumulative_aoii,num_scheduled,sca_iters,error\n";
  for (const auto& p : points) {
    out << p.slot << ',' << to_string(p.mode) << ',' << format_double(p.snr_db) << ',' << format_double(p.rate)
        << ',' << format_double(p.aoii) << ',' << format_double(p.cumulative_aoii) << ',' << p.num_scheduled << ','
        << p.sca_iters << ',' << csv_field(p.error) << '\n';
  }
}

json summary_to_json(const MetricsRecord& record, const std::string& hash, std::uint64_t seed) {
  json cells = json::array();
  for (const auto& c : record.cells) {
    cells.push_back({{"mode", std::string(to_string(c.mode))},
                     {"theta", c.theta},
                     {"snr_db", c.snr_db},
                     {"I", c.rate},
                     {"mean_aoii", c.mean_aoii},
                     {"mean_scheduled", c.mean_scheduled},
                     {"pct_rsma_more", c.pct_rsma_more ? json(*c.pct_rsma_more) : json(nullptr)},
                     {"completed", c.completed},
                     {"failures", c.failures}});
  }
  return {{"config_hash", hash}, {"seed", seed}, {"failures", record.failures()}, {"cells", cells}};
}

}  // namespace rsma
