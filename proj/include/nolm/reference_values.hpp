#pragma once

// Versioned table of reference values and acceptance bands used by scenario verdicts.
// `kind` records where a value comes from:
//   measured   - a published experimental result reproduced by simulation
//   calibrated - a published value used to set a model knob (checks consistency only)
//   derived    - follows from the model itself (closed form or independent numerics)

#include <string>
#include <vector>

namespace nolm::experiments {

inline constexpr const char* kReferenceTableVersion = "1.0.0";

struct ReferenceValue {
  std::string id;
  double reference = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string kind;
  std::string description;
};

const std::vector<ReferenceValue>& reference_table();
// Throws std::out_of_range for an unknown id.
const ReferenceValue& reference(const std::string& id);

}  // namespace nolm::experiments
