#include "rass/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rass/errors.hpp"
#include "rass/stats.hpp"

namespace rass {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::FP32: return "FP32";
    case Precision::FP16: return "FP16";
    case Precision::DR8: return "DR8";
    case Precision::FX8: return "FX8";
    case Precision::FFX8: return "FFX8";
  }
  return "?";
}

Precision precision_from_string(std::string_view s) {
  if (s == "FP32") return Precision::FP32;
  if (s == "FP16") return Precision::FP16;
  if (s == "DR8") return Precision::DR8;
  if (s == "FX8") return Precision::FX8;
  if (s == "FFX8") return Precision::FFX8;
  throw SchemaError("unknown precision '" + std::string(s) + "'");
}

std::string HardwareConfig::encode() const {
  if (options.empty()) return engine;
  std::string out = engine + "{";
  bool first = true;
  for (const auto& [k, v] : options) {
    if (!first) out += ",";
    out += k + "=" + v;
    first = false;
  }
  return out + "}";
}

const ModelVariant* ProfileDB::find_model(std::string_view id) const {
  for (const auto& m : models)
    if (m.id == id) return &m;
  return nullptr;
}

const MeasurementRecord* ProfileDB::find_record(std::string_view model_id,
                                                const HardwareConfig& hw) const {
  for (const auto& r : single_records)
    if (r.model_id == model_id && r.hw == hw) return &r;
  return nullptr;
}

bool ProfileDB::has_engine(std::string_view engine) const {
  return std::find(engine_set.begin(), engine_set.end(), engine) != engine_set.end();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end())
    throw SchemaError(where + ": missing field '" + name + "'");
  return *it;
}

std::string get_string(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_string())
    throw SchemaError(where + ": field '" + name + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number())
    throw SchemaError(where + ": field '" + name + "' must be a number");
  return v.get<double>();
}

std::vector<double> get_samples(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + ": samples must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& s : v) {
    if (!s.is_number()) throw SchemaError(where + ": samples must be numbers");
    out.push_back(s.get<double>());
  }
  return out;
}

std::string option_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  throw SchemaError(where + ": option values must be scalars");
}

HardwareConfig parse_hw(const json& v, const std::string& where) {
  HardwareConfig hw;
  hw.engine = get_string(v, "engine", where);
  if (auto it = v.find("options"); it != v.end()) {
    if (!it->is_object()) throw SchemaError(where + ": options must be an object");
    for (const auto& [k, val] : it->items()) hw.options[k] = option_text(val, where);
  }
  return hw;
}

ModelVariant parse_model(const json& v, std::size_t i) {
  const std::string where = "models[" + std::to_string(i) + "]";
  ModelVariant m;
  m.id = get_string(v, "id", where);
  m.architecture = get_string(v, "architecture", where);
  m.task_id = get_string(v, "task_id", where);
  m.input_size = get_string(v, "input_size", where);
  m.precision = precision_from_string(get_string(v, "precision", where));
  m.size_mb = get_number(v, "size_mb", where);
  m.flops = get_number(v, "flops", where);
  m.params = get_number(v, "params", where);
  m.accuracy = get_number(v, "accuracy", where);
  if (auto it = v.find("accuracy_direction"); it != v.end()) {
    if (!it->is_string()) throw SchemaError(where + ": accuracy_direction must be a string");
    const auto dir = it->get<std::string>();
    if (dir == "higher") m.accuracy_direction = AccuracyDirection::HigherBetter;
    else if (dir == "lower") m.accuracy_direction = AccuracyDirection::LowerBetter;
    else throw SchemaError(where + ": accuracy_direction must be 'higher' or 'lower'");
  }
  return m;
}

MeasurementRecord parse_record(const json& v, std::size_t i) {
  const std::string where = "measurements[" + std::to_string(i) + "]";
  MeasurementRecord r;
  r.model_id = get_string(v, "model_id", where);
  r.hw = parse_hw(field(v, "hw", where), where);
  r.latency_samples = get_samples(field(v, "latency_samples", where), where);
  r.memory_mb = get_number(v, "memory_mb", where);
  if (auto it = v.find("energy_j"); it != v.end() && !it->is_null()) {
    if (!it->is_number()) throw SchemaError(where + ": energy_j must be a number");
    r.energy_j = it->get<double>();
  }
  if (auto it = v.find("batch"); it != v.end()) {
    if (!it->is_number_integer()) throw SchemaError(where + ": batch must be an integer");
    r.batch = it->get<int>();
  }
  return r;
}

JointMeasurementRecord parse_joint(const json& v, std::size_t i) {
  const std::string where = "joint_measurements[" + std::to_string(i) + "]";
  JointMeasurementRecord j;
  const json& entries = field(v, "entries", where);
  if (!entries.is_array()) throw SchemaError(where + ": entries must be an array");
  for (const auto& e : entries)
    j.entries.emplace_back(get_string(e, "model_id", where),
                           parse_hw(field(e, "hw", where), where));
  const json& samples = field(v, "joint_latency_samples", where);
  if (!samples.is_array())
    throw SchemaError(where + ": joint_latency_samples must be an array");
  for (const auto& s : samples) j.joint_latency_samples.push_back(get_samples(s, where));
  return j;
}

ordered_json hw_json(const HardwareConfig& hw) {
  ordered_json out;
  out["engine"] = hw.engine;
  ordered_json opts = ordered_json::object();
  for (const auto& [k, v] : hw.options) opts[k] = v;
  out["options"] = std::move(opts);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void check_invariants(const ProfileDB& db) {
  if (db.engine_set.empty()) throw SchemaError("engines: empty engine set");
  std::set<std::string> engines(db.engine_set.begin(), db.engine_set.end());
  if (engines.size() != db.engine_set.size())
    throw SchemaError("engines: duplicate engine name");
  if (db.models.empty()) throw SchemaError("models: empty models list");

  std::set<std::string> ids;
  for (const auto& m : db.models) {
    if (!ids.insert(m.id).second)
      throw SchemaError("models: duplicate model id '" + m.id + "'");
    if (!(m.size_mb > 0) || !(m.flops > 0) || !(m.params > 0))
      throw ValueError("model '" + m.id + "': size_mb, flops and params must be positive");
    if (!std::isfinite(m.accuracy))
      throw ValueError("model '" + m.id + "': accuracy must be finite");
  }

  auto check_ref = [&](const std::string& model_id, const HardwareConfig& hw,
                       const std::string& where) {
    if (!ids.count(model_id))
      throw SchemaError(where + ": unknown model_id '" + model_id + "'");
    if (!engines.count(hw.engine))
      throw SchemaError(where + ": unknown engine '" + hw.engine + "'");
  };
  auto check_samples = [](const std::vector<double>& xs, const std::string& where) {
    if (xs.empty()) throw SchemaError(where + ": empty latency sample list");
    for (double x : xs)
      if (!(x > 0) || !std::isfinite(x))
        throw ValueError(where + ": latency samples must be positive");
  };

  std::set<std::string> pairs;
  for (std::size_t i = 0; i < db.single_records.size(); ++i) {
    const auto& r = db.single_records[i];
    const std::string where = "measurements[" + std::to_string(i) + "]";
    check_ref(r.model_id, r.hw, where);
    check_samples(r.latency_samples, where);
    if (!(r.memory_mb > 0)) throw ValueError(where + ": memory_mb must be positive");
    if (r.energy_j && !(*r.energy_j > 0))
      throw ValueError(where + ": energy_j must be positive");
    if (r.batch < 1) throw ValueError(where + ": batch must be >= 1");
    if (!pairs.insert(r.model_id + "\n" + r.hw.encode()).second)
      throw SchemaError(where + ": duplicate measurement for '" + r.model_id + "' on " +
                        r.hw.encode());
  }

  for (std::size_t i = 0; i < db.joint_records.size(); ++i) {
    const auto& j = db.joint_records[i];
    const std::string where = "joint_measurements[" + std::to_string(i) + "]";
    if (j.entries.size() < 2) throw SchemaError(where + ": needs at least two entries");
    if (j.joint_latency_samples.size() != j.entries.size())
      throw SchemaError(where + ": one sample list per entry required");
    for (std::size_t k = 0; k < j.entries.size(); ++k) {
      check_ref(j.entries[k].first, j.entries[k].second, where);
      check_samples(j.joint_latency_samples[k], where);
    }
  }
}

ProfileDB parse_profiles(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("profile document: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("profile document must be an object");

  ProfileDB db;
  db.device_name = get_string(doc, "device", "document");
  const json& engines = field(doc, "engines", "document");
  if (!engines.is_array()) throw SchemaError("engines must be an array");
  for (const auto& e : engines) {
    if (!e.is_string()) throw SchemaError("engines must be strings");
    db.engine_set.push_back(e.get<std::string>());
  }
  const json& models = field(doc, "models", "document");
  if (!models.is_array()) throw SchemaError("models must be an array");
  for (std::size_t i = 0; i < models.size(); ++i) db.models.push_back(parse_model(models[i], i));

  if (auto it = doc.find("measurements"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("measurements must be an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      db.single_records.push_back(parse_record((*it)[i], i));
  }
  if (auto it = doc.find("joint_measurements"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("joint_measurements must be an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      db.joint_records.push_back(parse_joint((*it)[i], i));
  }
  check_invariants(db);
  return db;
}

ProfileDB load_profiles(const std::filesystem::path& path) {
  return parse_profiles(read_file(path));
}

std::string write_profiles(const ProfileDB& db) {
  ordered_json doc;
  doc["device"] = db.device_name;
  doc["engines"] = db.engine_set;
  ordered_json models = ordered_json::array();
  for (const auto& m : db.models) {
    ordered_json o;
    o["id"] = m.id;
    o["architecture"] = m.architecture;
    o["task_id"] = m.task_id;
    o["input_size"] = m.input_size;
    o["precision"] = std::string(to_string(m.precision));
    o["size_mb"] = m.size_mb;
    o["flops"] = m.flops;
    o["params"] = m.params;
    o["accuracy"] = m.accuracy;
    o["accuracy_direction"] =
        m.accuracy_direction == AccuracyDirection::HigherBetter ? "higher" : "lower";
    models.push_back(std::move(o));
  }
  doc["models"] = std::move(models);

  ordered_json records = ordered_json::array();
  for (const auto& r : db.single_records) {
    ordered_json o;
    o["model_id"] = r.model_id;
    o["hw"] = hw_json(r.hw);
    o["latency_samples"] = r.latency_samples;
    o["memory_mb"] = r.memory_mb;
    if (r.energy_j) o["energy_j"] = *r.energy_j;
    o["batch"] = r.batch;
    records.push_back(std::move(o));
  }
  doc["measurements"] = std::move(records);

  ordered_json joints = ordered_json::array();
  for (const auto& j : db.joint_records) {
    ordered_json o;
    ordered_json entries = ordered_json::array();
    for (const auto& [id, hw] : j.entries) {
      ordered_json e;
      e["model_id"] = id;
      e["hw"] = hw_json(hw);
      entries.push_back(std::move(e));
    }
    o["entries"] = std::move(entries);
    o["joint_latency_samples"] = j.joint_latency_samples;
    joints.push_back(std::move(o));
  }
  doc["joint_measurements"] = std::move(joints);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_profiles(const ProfileDB& db, double cv_threshold) {
  ValidationReport report;
  for (const auto& m : db.models) {
    for (const auto& engine : db.engine_set) {
      const bool covered = std::any_of(
          db.single_records.begin(), db.single_records.end(), [&](const MeasurementRecord& r) {
            return r.model_id == m.id && r.hw.engine == engine;
          });
      if (!covered)
        report.findings.push_back({ValidationFinding::Kind::CoverageGap, m.id, engine,
                                   "no measurement", 0.0});
    }
  }
  for (const auto& r : db.single_records) {
    if (r.latency_samples.empty()) continue;
    const double cv = stats::coefficient_of_variation(r.latency_samples);
    if (cv > cv_threshold) {
      std::ostringstream detail;
      detail << "latency CV " << cv << " on " << r.hw.encode() << " exceeds "
             << cv_threshold;
      report.findings.push_back({ValidationFinding::Kind::HighVariance, r.model_id,
                                 r.hw.engine, detail.str(), cv});
    }
  }
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  if (report.empty()) {
    out << "clean: full coverage, no red flags\n";
    return out.str();
  }
  for (const auto& f : report.findings) {
    out << (f.kind == ValidationFinding::Kind::CoverageGap ? "coverage-gap" : "high-variance")
        << "\t" << f.model_id << "\t" << f.engine << "\t" << f.detail << "\n";
  }
  out << report.findings.size() << " finding(s)\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic profiles

namespace {

class UnitStream {
 public:
  explicit UnitStream(std::uint64_t seed) : engine_(seed) {}
  // 53 random bits -> [0, 1).
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

constexpr Precision kPrecisionCycle[] = {Precision::FP32, Precision::FP16, Precision::DR8,
                                         Precision::FX8, Precision::FFX8};

}  // namespace

ProfileDB synth_profiles(std::uint64_t seed, const SynthSpec& spec) {
  if (spec.engines.empty()) throw ValueError("synth spec declares no engines");
  if (spec.model_count < 1) throw ValueError("synth spec needs at least one model");
  if (spec.task_count < 1 || spec.task_count > spec.model_count)
    throw ValueError("synth spec task_count must be in [1, model_count]");
  if (spec.samples_per_record < 1) throw ValueError("samples_per_record must be >= 1");
  if (!(spec.latency_min_ms > 0) || spec.latency_min_ms > spec.latency_max_ms)
    throw ValueError("latency range must be positive and ordered");
  if (!(spec.memory_min_mb > 0) || spec.memory_min_mb > spec.memory_max_mb)
    throw ValueError("memory range must be positive and ordered");
  if (spec.latency_cv < 0 || spec.latency_cv > 0.2)
    throw ValueError("latency_cv must be in [0, 0.2]");
  std::set<std::string> names;
  for (const auto& e : spec.engines)
    if (e.name.empty() || !names.insert(e.name).second)
      throw ValueError("engine names must be non-empty and unique");

  UnitStream rng(seed);
  ProfileDB db;
  db.device_name = spec.device_name;
  for (const auto& e : spec.engines) db.engine_set.push_back(e.name);

  for (int i = 0; i < spec.model_count; ++i) {
    ModelVariant m;
    m.id = "m" + std::to_string(i);
    m.architecture = "arch" + std::to_string(i);
    m.task_id = "task" + std::to_string(i % spec.task_count);
    m.input_size = "224x224";
    m.precision = kPrecisionCycle[i % 5];
    m.params = rng.uniform(0.5e6, 25e6);
    m.size_mb = m.params * 4.0 / 1e6;
    m.flops = rng.uniform(0.05e9, 5e9);
    m.accuracy = rng.uniform(60.0, 90.0);
    db.models.push_back(std::move(m));
  }

  const double half_width = spec.latency_cv * std::sqrt(3.0);
  for (const auto& m : db.models) {
    for (const auto& e : spec.engines) {
      std::vector<std::map<std::string, std::string>> option_sets = e.option_sets;
      if (option_sets.empty()) option_sets.emplace_back();
      for (const auto& opts : option_sets) {
        MeasurementRecord r;
        r.model_id = m.id;
        r.hw = HardwareConfig{e.name, opts};
        const double centre = rng.uniform(spec.latency_min_ms, spec.latency_max_ms);
        for (int s = 0; s < spec.samples_per_record; ++s)
          r.latency_samples.push_back(centre * (1.0 + half_width * (2.0 * rng.next() - 1.0)));
        r.memory_mb = rng.uniform(spec.memory_min_mb, spec.memory_max_mb);
        const double watts = rng.uniform(1.0, 4.0);
        if (spec.with_energy) r.energy_j = centre * watts / 1000.0;
        db.single_records.push_back(std::move(r));
      }
    }
  }
  return db;
}

}  // namespace rass
