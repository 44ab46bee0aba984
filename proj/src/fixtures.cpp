#include "rass/fixtures.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>

namespace rass::fixtures {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<Precision, 5> kPrecisions = {Precision::FP32, Precision::FP16, Precision::DR8,
                                                  Precision::FX8, Precision::FFX8};

struct Arch {
  const char* name;
  const char* input;
  double gflops;
  double mparams;
  std::array<double, 5> acc;  // FP32 FP16 DR8 FX8 FFX8; NaN when not available
};

std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) out += c == ' ' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double bytes_per_weight(Precision p) {
  switch (p) {
    case Precision::FP32: return 4.0;
    case Precision::FP16: return 2.0;
    default: return 1.0;
  }
}

bool is_int8(Precision p) { return p == Precision::FX8 || p == Precision::FFX8 || p == Precision::DR8; }

std::vector<ModelVariant> variants(const std::vector<Arch>& archs, const std::string& task,
                                   AccuracyDirection dir = AccuracyDirection::HigherBetter) {
  std::vector<ModelVariant> out;
  for (const auto& a : archs) {
    for (std::size_t i = 0; i < kPrecisions.size(); ++i) {
      if (std::isnan(a.acc[i])) continue;
      ModelVariant m;
      m.architecture = a.name;
      m.precision = kPrecisions[i];
      m.id = slug(a.name) + "-" + slug(to_string(m.precision));
      m.task_id = task;
      m.input_size = a.input;
      m.flops = a.gflops * 1e9;
      m.params = a.mparams * 1e6;
      m.size_mb = m.params * bytes_per_weight(m.precision) / 1e6;
      m.accuracy = a.acc[i];
      m.accuracy_direction = dir;
      out.push_back(std::move(m));
    }
  }
  return out;
}

HardwareConfig cpu(int threads, bool xnnpack) {
  return {"CPU", {{"threads", std::to_string(threads)}, {"xnnpack", xnnpack ? "true" : "false"}}};
}

std::vector<HardwareConfig> cpu_grid(bool with_plain = true) {
  std::vector<HardwareConfig> out;
  for (int t : {1, 2, 4, 8}) {
    out.push_back(cpu(t, true));
    if (with_plain) out.push_back(cpu(t, false));
  }
  return out;
}

int threads_of(const HardwareConfig& hw) { return std::stoi(hw.options.at("threads")); }
bool xnnpack_of(const HardwareConfig& hw) { return hw.options.at("xnnpack") == "true"; }

/// Latency in ms for one inference, or NaN when the engine cannot run the variant.
using LatencyFn = std::function<double(const ModelVariant&, const HardwareConfig&)>;
using MemoryFn = std::function<double(const ModelVariant&, const HardwareConfig&)>;

struct Device {
  std::string name;
  std::vector<std::string> engines;
  std::vector<HardwareConfig> hws;
  LatencyFn latency;
  MemoryFn memory;
  std::map<std::string, double> watts;
  std::map<std::string, double> cv;  // per-engine sample spread
  std::uint64_t seed = 1;
  int samples = 20;
  int batch = 1;
};

/// Calibration point: pins one (model, hw) record.
struct Override {
  std::string model_id;
  std::string hw;
  double latency_ms = kMissing;
  double memory_mb = kMissing;
};

ProfileDB build(const Device& dev, std::vector<ModelVariant> models,
                const std::vector<Override>& overrides = {}) {
  ProfileDB db;
  db.device_name = dev.name;
  db.engine_set = dev.engines;
  db.models = std::move(models);
  std::mt19937_64 rng(dev.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (const auto& m : db.models) {
    for (const auto& hw : dev.hws) {
      double lat = dev.latency(m, hw);
      if (std::isnan(lat)) continue;
      double mem = dev.memory(m, hw);
      for (const auto& o : overrides) {
        if (o.model_id != m.id || o.hw != hw.encode()) continue;
        if (!std::isnan(o.latency_ms)) lat = o.latency_ms;
        if (!std::isnan(o.memory_mb)) mem = o.memory_mb;
      }
      lat *= dev.batch;
      MeasurementRecord r;
      r.model_id = m.id;
      r.hw = hw;
      r.batch = dev.batch;
      const double half = dev.cv.at(hw.engine) * std::sqrt(3.0);
      for (int i = 0; i < dev.samples; ++i) {
        const double v = lat * (1.0 + half * (2.0 * uniform() - 1.0));
        r.latency_samples.push_back(std::round(v * 1e4) / 1e4);
      }
      r.memory_mb = std::round(mem * 100.0) / 100.0;
      double w = dev.watts.at(hw.engine);
      if (hw.engine == "CPU") w *= 0.5 + 0.35 * threads_of(hw);
      r.energy_j = std::round(lat * w * 1e3) / 1e6;  // J = ms * W / 1000
      db.single_records.push_back(std::move(r));
    }
  }
  check_invariants(db);
  return db;
}

// Relative per-engine efficiency of each architecture family.
double family_factor(const std::string& arch, const std::string& engine) {
  struct Row {
    const char* prefix;
    double cpu, gpu, npu, dsp;
  };
  static const Row rows[] = {
      {"MobileNet V2", 1.3, 1.6, 0.6, 1.2},
      {"RegNetY", 1.0, 1.0, 1.0, 1.0},
      {"MobileViT", 1.8, 1.6, 2.5, 3.0},
      {"EfficientNet Lite", 1.0, 1.0, 1.6, 1.0},
      {"BERT", 1.2, 1.5, 2.0, 2.0},
      {"XtremeDistil", 1.2, 1.5, 2.0, 2.0},
      {"MobileBERT", 1.3, 1.6, 2.2, 2.0},
      {"YAMNet", 1.0, 3.0, 2.0, 2.0},
      {"GenderNet", 1.3, 1.1, 0.6, 1.2},
      {"AgeNet", 1.3, 1.1, 0.6, 1.2},
      {"EthniNet", 1.3, 1.1, 0.6, 1.2},
  };
  for (const auto& r : rows) {
    if (arch.rfind(r.prefix, 0) != 0) continue;
    if (engine == "CPU") return r.cpu;
    if (engine == "GPU") return r.gpu;
    if (engine == "NPU") return r.npu;
    return r.dsp;
  }
  return 1.0;
}

/// Activation working set in MB, scaled by input resolution.
double activation_mb(const ModelVariant& m) {
  double scale = 1.0;
  if (m.input_size == "256x256") scale = 1.3;
  if (m.input_size == "260x260") scale = 1.35;
  if (m.input_size == "300x300") scale = 1.8;
  if (m.input_size == "62x62") scale = 0.1;
  double base = 6.5;
  if (m.architecture.rfind("MobileViT", 0) == 0) base = 14.0;
  if (m.architecture.rfind("RegNetY", 0) == 0) base = 8.0;
  if (m.architecture.rfind("BERT", 0) == 0 || m.architecture.rfind("XtremeDistil", 0) == 0 ||
      m.architecture.rfind("MobileBERT", 0) == 0)
    base = 10.0;
  if (m.architecture == "YAMNet") base = 4.0;
  return base * scale;
}

struct Rates {
  double cpu_ms_per_gflop;
  std::map<int, double> thread_speedup;
  double gpu_ms_per_gflop, gpu_overhead_ms;
  double acc_ms_per_gflop, acc_overhead_ms;  // NPU or DSP
};

double cpu_latency(const Rates& r, const ModelVariant& m, const HardwareConfig& hw) {
  static const std::map<Precision, double> prec = {{Precision::FP32, 1.0},
                                                   {Precision::FP16, 1.0},
                                                   {Precision::DR8, 0.85},
                                                   {Precision::FX8, 0.62},
                                                   {Precision::FFX8, 0.58}};
  double ms = m.flops / 1e9 * r.cpu_ms_per_gflop / r.thread_speedup.at(threads_of(hw));
  ms *= prec.at(m.precision) * family_factor(m.architecture, "CPU");
  if (xnnpack_of(hw)) ms *= is_int8(m.precision) ? 0.85 : 0.7;
  return ms;
}

double gpu_latency(const Rates& r, const ModelVariant& m) {
  double f = kMissing;
  if (m.precision == Precision::FP32) f = 1.35;
  if (m.precision == Precision::FP16) f = 1.0;
  if (m.precision == Precision::FX8) f = 1.1;
  return r.gpu_overhead_ms + m.flops / 1e9 * r.gpu_ms_per_gflop * f * family_factor(m.architecture, "GPU");
}

double npu_latency(const Rates& r, const ModelVariant& m) {
  double f = kMissing;
  if (m.precision == Precision::FP32) f = 1.25;
  if (m.precision == Precision::FP16) f = 1.0;
  return r.acc_overhead_ms + m.flops / 1e9 * r.acc_ms_per_gflop * f * family_factor(m.architecture, "NPU");
}

double dsp_latency(const Rates& r, const ModelVariant& m) {
  if (m.precision != Precision::FFX8) return kMissing;
  return r.acc_overhead_ms + m.flops / 1e9 * r.acc_ms_per_gflop * family_factor(m.architecture, "DSP");
}

double phone_memory(const ModelVariant& m, const HardwareConfig& hw) {
  const double model = 1.4 * m.size_mb + activation_mb(m);
  if (hw.engine == "CPU") return model + 0.25 * threads_of(hw) + (xnnpack_of(hw) ? 1.5 : 0.0) + 1.0;
  if (hw.engine == "GPU") return model + 2.0 * m.size_mb + 18.0;
  if (hw.engine == "NPU") return model + m.size_mb + 10.0;
  return model + 6.0;  // DSP
}

Device phone(std::string name, std::vector<std::string> engines, const Rates& rates,
             std::uint64_t seed, bool cpu_plain = true) {
  Device d;
  d.name = std::move(name);
  d.engines = engines;
  d.hws = cpu_grid(cpu_plain);
  for (const auto& e : engines)
    if (e != "CPU") d.hws.push_back({e, {}});
  d.latency = [rates](const ModelVariant& m, const HardwareConfig& hw) {
    if (hw.engine == "CPU") return cpu_latency(rates, m, hw);
    // The waveform front-end has no delegate kernels.
    if (m.architecture == "YAMNet") return kMissing;
    if (hw.engine == "GPU") return gpu_latency(rates, m);
    if (hw.engine == "NPU") return npu_latency(rates, m);
    return dsp_latency(rates, m);
  };
  d.memory = phone_memory;
  d.watts = {{"CPU", 1.0}, {"GPU", 2.5}, {"NPU", 1.5}, {"DSP", 1.0}};
  d.cv = {{"CPU", 0.04}, {"GPU", 0.06}, {"NPU", 0.03}, {"DSP", 0.03}};
  d.seed = seed;
  return d;
}

const Rates kS20{55.0, {{1, 1.0}, {2, 1.85}, {4, 3.1}, {8, 2.7}}, 9.0, 1.5, 7.0, 7.0};
const Rates kP7{40.0, {{1, 1.0}, {2, 1.9}, {4, 3.3}, {8, 3.0}}, 8.0, 2.0, 4.0, 3.0};
const Rates kA71{90.0, {{1, 1.0}, {2, 1.9}, {4, 2.6}, {8, 3.0}}, 12.0, 2.0, 9.0, 2.0};

const std::vector<Arch>& uc1_models() {
  static const std::vector<Arch> v = {
      {"MobileNet V2 1.0", "224x224", 0.60, 3.49, {71.92, 71.96, 71.65, 71.28, 71.26}},
      {"RegNetY 008", "224x224", 1.60, 6.25, {74.28, 74.28, 74.18, 74.45, 74.47}},
      {"MobileViT XS", "256x256", 2.10, 2.31, {74.61, 74.61, kMissing, kMissing, kMissing}},
      {"EfficientNet Lite0", "224x224", 0.77, 4.63, {75.19, 75.23, 75.14, 75.09, 75.11}},
      {"MobileNet V2 1.4", "224x224", 1.16, 6.09, {75.66, 75.68, 75.47, 75.41, 75.45}},
      {"RegNetY 016", "224x224", 3.23, 11.18, {76.76, 76.76, 76.62, 76.92, 76.84}},
      {"MobileViT S", "256x256", 4.06, 5.57, {78.31, 78.30, kMissing, kMissing, kMissing}},
      {"EfficientNet Lite4", "300x300", 5.11, 12.95, {80.81, 80.80, 80.78, 80.69, 80.71}},
  };
  return v;
}

const std::vector<Arch>& uc2_models() {
  static const std::vector<Arch> v = {
      {"BERT-L2-H128", "64", 0.05, 4.31, {92.10, 92.10, 91.90, 91.75, 91.75}},
      {"XtremeDistil-L6-H256", "64", 0.63, 12.57, {93.30, 93.30, 93.20, 93.15, 93.20}},
      {"MobileBERT-L24-H512", "64", 2.66, 24.33, {93.80, 93.80, 93.80, 93.65, 94.10}},
  };
  return v;
}

const std::vector<Arch>& uc3_vision() {
  static const std::vector<Arch> v = {
      {"EfficientNet Lite0", "224x224", 0.59, 3.44, {69.78, 69.70, 68.96, 69.18, 69.18}},
      {"EfficientNet Lite2", "260x260", 1.51, 4.87, {76.72, 76.72, 77.16, 77.69, 77.54}},
      {"EfficientNet Lite4", "300x300", 4.57, 11.76, {79.33, 79.33, 79.18, 79.78, 79.48}},
  };
  return v;
}

const std::vector<Arch>& uc3_audio() {
  static const std::vector<Arch> v = {
      {"YAMNet", "15600", 0.14, 3.75, {0.3756, 0.3757, 0.3620, kMissing, kMissing}},
  };
  return v;
}

std::vector<ModelVariant> uc3_variants() {
  auto out = variants(uc3_audio(), "audio-classification");
  auto vision = variants(uc3_vision(), "scene-classification");
  out.insert(out.end(), vision.begin(), vision.end());
  return out;
}

MetricId metric(Metric m, Statistic s = Statistic::Value, TaskScope t = TaskScope::unscoped()) {
  MetricId id;
  id.metric = m;
  id.statistic = s;
  id.task = t;
  return id;
}

}  // namespace

ProfileDB uc1_s20() {
  // Calibration points so the optimum and the design set follow the
  // published S20 design table.
  const std::vector<Override> pins = {
      {"efficientnet-lite0-fx8", "CPU{threads=8,xnnpack=false}", kMissing, 12.5},
      {"mobilenet-v2-1.0-fx8", "CPU{threads=4,xnnpack=true}", 6.2, kMissing},
  };
  return build(phone("S20", {"CPU", "GPU", "NPU"}, kS20, 20), variants(uc1_models(), "image-classification"),
               pins);
}

ProfileDB uc1_p7() {
  return build(phone("P7", {"CPU", "GPU", "NPU"}, kP7, 7), variants(uc1_models(), "image-classification"));
}

ProfileDB uc2_s20() {
  return build(phone("S20", {"CPU", "GPU", "NPU"}, kS20, 21), variants(uc2_models(), "text-classification"));
}

ProfileDB uc3_a71() {
  Device d = phone("A71", {"CPU", "GPU", "DSP"}, kA71, 71);
  d.cv["GPU"] = 0.03;
  return build(d, uc3_variants());
}

ProfileDB uc3_p7() {
  return build(phone("P7", {"CPU", "GPU", "NPU"}, kP7, 77), uc3_variants());
}

ProfileDB uc4_s20() {
  static const std::vector<Arch> gender = {
      {"GenderNet-MNV2", "62x62", 0.04, 0.66, {95.12, 94.95, 94.90, 94.79, 94.90}}};
  static const std::vector<Arch> age = {
      {"AgeNet-MNV2", "62x62", 0.04, 0.66, {5.976, 5.974, 5.964, 5.947, 5.923}}};
  static const std::vector<Arch> ethnicity = {
      {"EthniNet-MNV2", "62x62", 0.04, 0.66, {78.17, 78.04, 78.55, 79.30, 79.14}}};
  auto models = variants(gender, "gender");
  for (auto& m : variants(age, "age", AccuracyDirection::LowerBetter)) models.push_back(m);
  for (auto& m : variants(ethnicity, "ethnicity")) models.push_back(m);
  // XNNPACK-only CPU configs keep the three-task product near 27k points.
  Device d = phone("S20", {"CPU", "GPU", "NPU"}, kS20, 4, false);
  d.batch = 4;
  return build(d, std::move(models));
}

SLOSpec uc1_slo() {
  SLOSpec s;
  s.objectives = {{metric(Metric::A), Direction::Maximize, 1.0},
                  {metric(Metric::TP, Statistic::Avg), Direction::Maximize, 1.0}};
  s.constraints = {{metric(Metric::L, Statistic::Max), 41.67, false}};
  return s;
}

SLOSpec uc2_slo() {
  SLOSpec s;
  s.objectives = {{metric(Metric::L, Statistic::Avg), Direction::Minimize, 1.0},
                  {metric(Metric::S), Direction::Minimize, 1.0},
                  {metric(Metric::A), Direction::Maximize, 1.0}};
  s.constraints = {{metric(Metric::MF), 90.0, false}};
  return s;
}

SLOSpec uc3_slo() {
  SLOSpec s;
  s.tasks = {"audio-classification", "scene-classification"};
  s.objectives = {{metric(Metric::L, Statistic::Avg), Direction::Minimize, 1.0},
                  {metric(Metric::L, Statistic::Std), Direction::Minimize, 1.0},
                  {metric(Metric::A), Direction::Maximize, 1.0}};
  s.constraints = {{metric(Metric::L, Statistic::Avg), 100.0, false},
                   {metric(Metric::L, Statistic::Std), 10.0, false}};
  return s;
}

SLOSpec uc4_slo() {
  SLOSpec s;
  s.tasks = {"gender", "age", "ethnicity"};
  s.objectives = {{metric(Metric::L, Statistic::Avg), Direction::Minimize, 1.0},
                  {metric(Metric::L, Statistic::Std), Direction::Minimize, 1.0},
                  {metric(Metric::S), Direction::Minimize, 1.0},
                  {metric(Metric::MF), Direction::Minimize, 1.0},
                  {metric(Metric::A), Direction::Maximize, 1.0}};
  s.constraints = {{metric(Metric::L, Statistic::Max), 10.0, false}};
  return s;
}

std::vector<RuntimeEvent> uc1_trace() {
  using K = RuntimeEvent::Kind;
  return {{5.0, K::EngineOverload, "CPU"}, {12.0, K::MemoryPressure, ""}};
}

std::vector<RuntimeEvent> uc3_trace() {
  using K = RuntimeEvent::Kind;
  return {{0.0, K::EngineOverload, "DSP"},   {5.0, K::MemoryPressure, ""},
          {8.0, K::EngineOverload, "GPU"},   {10.0, K::MemoryRecover, ""},
          {10.0, K::EngineRecover, "DSP"},   {15.0, K::EngineOverload, "DSP"}};
}

std::vector<BundledFile> bundled_files() {
  return {
      {"uc1_s20.json", "fixtures", write_profiles(uc1_s20())},
      {"uc1_p7.json", "fixtures", write_profiles(uc1_p7())},
      {"uc2_s20.json", "fixtures", write_profiles(uc2_s20())},
      {"uc3_a71.json", "fixtures", write_profiles(uc3_a71())},
      {"uc3_p7.json", "fixtures", write_profiles(uc3_p7())},
      {"uc4_s20.json", "fixtures", write_profiles(uc4_s20())},
      {"uc1_slo.json", "fixtures", write_slo_spec(uc1_slo())},
      {"uc2_slo.json", "fixtures", write_slo_spec(uc2_slo())},
      {"uc3_slo.json", "fixtures", write_slo_spec(uc3_slo())},
      {"uc4_slo.json", "fixtures", write_slo_spec(uc4_slo())},
      {"uc1.jsonl", "traces", write_trace(uc1_trace())},
      {"uc3.jsonl", "traces", write_trace(uc3_trace())},
  };
}

}  // namespace rass::fixtures
