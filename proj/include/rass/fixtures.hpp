#pragma once

#include <string>
#include <vector>

#include "rass/moo.hpp"
#include "rass/profile.hpp"
#include "rass/runtime.hpp"

// Bundled use-case fixtures. Model metadata (FLOPs, parameters, accuracy per
// precision) is real; latencies, memory and energy come from a per-device
// analytic model with seeded sample noise.
namespace rass::fixtures {

/// Image classification, eight ImageNet models, CPU/GPU/NPU phone.
ProfileDB uc1_s20();
/// Same models on a second high-end phone with the same engine set.
ProfileDB uc1_p7();
/// Text classification, three Transformer encoders.
ProfileDB uc2_s20();
/// Scene recognition: audio task then vision task, on a CPU/GPU/DSP phone.
ProfileDB uc3_a71();
/// UC3 models on a phone without a DSP.
ProfileDB uc3_p7();
/// Gender, age and ethnicity heads, batch 4.
ProfileDB uc4_s20();

SLOSpec uc1_slo();
SLOSpec uc2_slo();
SLOSpec uc3_slo();
SLOSpec uc4_slo();

/// CPU overload then memory pressure.
std::vector<RuntimeEvent> uc1_trace();
/// DSP overload, memory pressure, GPU overload, recovery, DSP overload again.
std::vector<RuntimeEvent> uc3_trace();

struct BundledFile {
  std::string name;  // file name under data/fixtures or data/traces
  std::string subdir;
  std::string content;
};

/// Every bundled document with its canonical text.
std::vector<BundledFile> bundled_files();

}  // namespace rass::fixtures
