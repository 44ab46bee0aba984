#pragma once

// Small hand-built profiles for unit tests.

#include <memory>
#include <string>
#include <vector>

#include "rass/moo.hpp"
#include "rass/profile.hpp"

namespace build {

inline rass::ModelVariant model(const std::string& id, const std::string& task, double accuracy,
                                double flops = 1e9, double params = 1e6) {
  rass::ModelVariant m;
  m.id = id;
  m.architecture = id;
  m.task_id = task;
  m.input_size = "224x224";
  m.size_mb = params * 4 / 1e6;
  m.flops = flops;
  m.params = params;
  m.accuracy = accuracy;
  return m;
}

inline rass::HardwareConfig hw(const std::string& engine) { return {engine, {}}; }

inline rass::MeasurementRecord record(const std::string& model, const rass::HardwareConfig& h,
                                      std::vector<double> latency, double memory = 10.0,
                                      int batch = 1) {
  rass::MeasurementRecord r;
  r.model_id = model;
  r.hw = h;
  r.latency_samples = std::move(latency);
  r.memory_mb = memory;
  r.batch = batch;
  return r;
}

inline rass::MetricId metric(rass::Metric m, rass::Statistic s = rass::Statistic::Value,
                             rass::TaskScope t = rass::TaskScope::unscoped()) {
  rass::MetricId id;
  id.metric = m;
  id.statistic = s;
  id.task = t;
  return id;
}

inline rass::Objective maximize(rass::MetricId id, double w = 1.0) {
  return {id, rass::Direction::Maximize, w};
}
inline rass::Objective minimize(rass::MetricId id, double w = 1.0) {
  return {id, rass::Direction::Minimize, w};
}

inline rass::MOOProblem compile(rass::ProfileDB db, rass::SLOSpec slo,
                                std::vector<std::string> tasks = {},
                                rass::ContentionParams c = {}) {
  return rass::MOOProblem::compile(std::make_shared<const rass::ProfileDB>(std::move(db)),
                                   std::move(slo), std::move(tasks), c);
}

/// Three single-engine configs with A = 70, 75, 80 and latency 10, 20, 40 ms.
inline rass::ProfileDB three_config_db() {
  rass::ProfileDB db;
  db.device_name = "toy";
  db.engine_set = {"CPU"};
  db.models = {model("x1", "t", 70), model("x2", "t", 75), model("x3", "t", 80)};
  db.single_records = {record("x1", hw("CPU"), {10}), record("x2", hw("CPU"), {20}),
                       record("x3", hw("CPU"), {40})};
  return db;
}

inline rass::SLOSpec accuracy_latency_slo() {
  rass::SLOSpec slo;
  slo.objectives = {maximize(metric(rass::Metric::A)),
                    minimize(metric(rass::Metric::L, rass::Statistic::Avg))};
  return slo;
}

}  // namespace build
