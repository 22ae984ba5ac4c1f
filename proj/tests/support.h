// Shared fixtures: shipped data paths and independent reference oracles.
#ifndef RFCC_TESTS_SUPPORT_H_
#define RFCC_TESTS_SUPPORT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "rfcc/harness.h"

namespace rfcc::testing {

inline std::string DataPath(const std::string& rel) { return std::string(RFCC_DATA_DIR) + "/" + rel; }

inline PipelineConfig ShippedConfig(const std::string& spec = {}, const std::string& annotations = {}) {
  PipelineConfig c;
  c.spec = spec.empty() ? "" : DataPath(spec);
  c.dictionary = DataPath("terms.txt");
  c.lexicons = {DataPath("lexicon.txt")};
  c.registries = {DataPath("predicates.txt")};
  c.checks = {DataPath("checks.txt")};
  c.contexts = {DataPath("context.txt")};
  if (!annotations.empty()) c.annotations = DataPath(annotations);
  return c;
}

inline Resources ShippedResources(const std::string& annotations = {}) {
  return Resources::Load(ShippedConfig({}, annotations));
}

inline RunResult RunShipped(const std::string& spec, const std::string& annotations = {}) {
  Resources res = ShippedResources(annotations);
  return RunPipeline(ReadFile(DataPath(spec)), res);
}

// Reference checksum: add each 16-bit big-endian word and fold the carry
// back in immediately, one word at a time.
inline uint16_t OracleChecksum(const std::vector<uint8_t>& bytes) {
  uint32_t acc = 0;
  for (size_t i = 0; i < bytes.size(); i += 2) {
    uint32_t hi = bytes[i];
    uint32_t lo = i + 1 < bytes.size() ? bytes[i + 1] : 0;
    acc += (hi << 8) | lo;
    if (acc > 0xFFFF) acc = (acc & 0xFFFF) + 1;
  }
  return static_cast<uint16_t>(~acc & 0xFFFF);
}

}  // namespace rfcc::testing

#endif  // RFCC_TESTS_SUPPORT_H_
