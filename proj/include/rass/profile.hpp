#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rass {

enum class Precision { FP32, FP16, DR8, FX8, FFX8 };

std::string_view to_string(Precision p);
Precision precision_from_string(std::string_view s);

enum class AccuracyDirection { HigherBetter, LowerBetter };

struct ModelVariant {
  std::string id;
  std::string architecture;
  std::string task_id;
  std::string input_size;
  Precision precision = Precision::FP32;
  double size_mb = 0.0;
  double flops = 0.0;
  double params = 0.0;
  double accuracy = 0.0;
  AccuracyDirection accuracy_direction = AccuracyDirection::HigherBetter;

  bool operator==(const ModelVariant&) const = default;
};

/// A compute engine plus its tunable options (thread count, delegate
/// toggles, arithmetic precision). Option values are kept as text so the
/// canonical encoding is stable.
struct HardwareConfig {
  std::string engine;
  std::map<std::string, std::string> options;

  /// Canonical encoding, e.g. "CPU{threads=4,xnnpack=true}" or "DSP".
  std::string encode() const;

  bool operator==(const HardwareConfig&) const = default;
  auto operator<=>(const HardwareConfig& other) const {
    return encode() <=> other.encode();
  }
};

struct MeasurementRecord {
  std::string model_id;
  HardwareConfig hw;
  std::vector<double> latency_samples;  // ms
  double memory_mb = 0.0;
  std::optional<double> energy_j;
  int batch = 1;

  bool operator==(const MeasurementRecord&) const = default;
};

/// Latencies measured while several models run concurrently. Entry i's
/// samples are in joint_latency_samples[i].
struct JointMeasurementRecord {
  std::vector<std::pair<std::string, HardwareConfig>> entries;
  std::vector<std::vector<double>> joint_latency_samples;

  bool operator==(const JointMeasurementRecord&) const = default;
};

struct ProfileDB {
  std::string device_name;
  std::vector<std::string> engine_set;
  std::vector<ModelVariant> models;
  std::vector<MeasurementRecord> single_records;
  std::vector<JointMeasurementRecord> joint_records;

  const ModelVariant* find_model(std::string_view id) const;
  const MeasurementRecord* find_record(std::string_view model_id,
                                       const HardwareConfig& hw) const;
  bool has_engine(std::string_view engine) const;

  bool operator==(const ProfileDB&) const = default;
};

// Parsing and serialization of the canonical JSON document. parse_profiles
// enforces every type invariant; write_profiles emits a byte-stable text.
ProfileDB parse_profiles(std::string_view text);
ProfileDB load_profiles(const std::filesystem::path& path);
std::string write_profiles(const ProfileDB& db);

/// Throws SchemaError / ValueError on the first violated invariant.
void check_invariants(const ProfileDB& db);

// ---------------------------------------------------------------------------
// Validation

struct ValidationFinding {
  enum class Kind { CoverageGap, HighVariance };
  Kind kind;
  std::string model_id;
  std::string engine;
  std::string detail;
  double value = 0.0;  // coefficient of variation for HighVariance
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool empty() const { return findings.empty(); }
};

ValidationReport validate_profiles(const ProfileDB& db,
                                   double cv_threshold = 0.5);
std::string format_report(const ValidationReport& report);

// ---------------------------------------------------------------------------
// Synthetic profiles

struct SynthEngine {
  std::string name;
  // One hardware config per entry; an empty list means a single config with
  // no options.
  std::vector<std::map<std::string, std::string>> option_sets;
};

struct SynthSpec {
  std::string device_name = "synthetic";
  int model_count = 3;
  int task_count = 1;
  std::vector<SynthEngine> engines;
  int samples_per_record = 16;
  double latency_min_ms = 2.0;
  double latency_max_ms = 80.0;
  double latency_cv = 0.1;
  double memory_min_mb = 4.0;
  double memory_max_mb = 160.0;
  bool with_energy = true;
};

/// Deterministic in (seed, spec): the generator draws raw 64-bit words from
/// mt19937_64 and maps them to reals itself, so output does not depend on the
/// standard library's distribution implementations.
ProfileDB synth_profiles(std::uint64_t seed, const SynthSpec& spec);

}  // namespace rass
