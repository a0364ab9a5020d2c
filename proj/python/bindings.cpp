#include "rsma/sim.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rsma;

namespace {

std::vector<Eigen::VectorXcd> vectors_of(const ChannelSet& channels) { return channels.vectors(); }

py::dict result_dict(const ScheduleResult& r) {
  py::dict d;
  d["scheduled"] = r.scheduled;
  d["z_relaxed"] = r.z_relaxed;
  d["achieved_aoii"] = r.achieved_aoii;
  d["sca_iterations"] = r.sca_iterations;
  d["status"] = std::string(to_string(r.status));
  d["common"] = r.precoders.common;
  d["privates"] = r.precoders.privates;
  d["shares"] = r.shares.shares;
  d["demotions"] = r.demotions;
  std::vector<double> objective;
  for (const auto& e : r.trace) objective.push_back(e.objective);
  d["trace"] = objective;
  return d;
}

ScheduleResult schedule(const std::vector<Eigen::VectorXcd>& channels, const std::vector<double>& rates,
                        const std::vector<double>& weights, double total_power, const std::string& mode) {
  SlotProblem problem{ChannelSet(channels), rates, weights, total_power};
  OptimizerConfig cfg;
  cfg.mode = access_mode_from_string(mode);
  if (cfg.mode == AccessMode::kSdma) return sca_solve(problem, cfg);
  auto sdma_cfg = cfg;
  sdma_cfg.mode = AccessMode::kSdma;
  const auto sdma = sca_solve(problem, sdma_cfg);
  return sca_solve(problem, cfg, &sdma);
}

py::list rows_of(const MetricsRecord& record) {
  py::list out;
  for (const auto& row : record.rows) {
    py::dict d;
    d["mode"] = std::string(to_string(row.mode));
    d["theta"] = row.theta;
    d["snr_db"] = row.snr_db;
    d["I"] = row.rate;
    d["realization"] = row.realization;
    d["aoii"] = row.aoii;
    d["num_scheduled"] = row.num_scheduled;
    d["error"] = row.error;
    out.append(d);
  }
  return out;
}

ExperimentConfig parse(const std::string& text) {
  auto cfg = config_from_json(nlohmann::json::parse(text));
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "RSMA/SDMA AoII scheduling core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("geometric_pair", [](int n, double theta) { return vectors_of(geometric_pair(n, theta)); },
        py::arg("num_antennas"), py::arg("theta"));
  m.def("rayleigh", [](int n, int k, std::uint64_t seed) { return vectors_of(rayleigh(n, k, seed)); },
        py::arg("num_antennas"), py::arg("num_users"), py::arg("seed"));
  m.def("snr_to_power", &snr_to_power);

  m.def(
      "schedule",
      [](const std::vector<Eigen::VectorXcd>& channels, const std::vector<double>& rates,
         const std::vector<double>& weights, double total_power, const std::string& mode) {
        ScheduleResult r;
        {
          py::gil_scoped_release release;
          r = schedule(channels, rates, weights, total_power, mode);
        }
        return result_dict(r);
      },
      py::arg("channels"), py::arg("rates"), py::arg("weights"), py::arg("total_power"), py::arg("mode") = "rsma",
      "Solve one slot; RSMA is warm-started from the SDMA schedule.");

  m.def(
      "sweep_users",
      [](const std::string& config_json) {
        const auto cfg = parse(config_json);
        MetricsRecord record;
        {
          py::gil_scoped_release release;
          record = sweep_scheduled_users(cfg);
        }
        return rows_of(record);
      },
      py::arg("config_json"));
  m.def(
      "monte_carlo",
      [](const std::string& config_json, int jobs) {
        const auto cfg = parse(config_json);
        MetricsRecord record;
        {
          py::gil_scoped_release release;
          record = monte_carlo_aoii(cfg, jobs);
        }
        return py::make_tuple(rows_of(record),
                              summary_to_json(record, config_hash(cfg), cfg.seed).dump());
      },
      py::arg("config_json"), py::arg("jobs") = 1, "Returns (rows, summary JSON text).");
  m.def("config_hash", [](const std::string& config_json) { return config_hash(parse(config_json)); });
}
