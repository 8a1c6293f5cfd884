#pragma once

// CSV form of tomography count records. Columns:
//   setting_id, qwp_s, hwp_s, qwp_i, hwp_i, n_pulses, raw, singles_s, singles_i,
//   accidentals, corrected
// One row per analyzer setting; angles in degrees.

#include "nolm/tomography.hpp"

#include <istream>
#include <string>
#include <vector>

namespace nolm::tomo {

inline constexpr const char* kCountCsvHeader =
    "setting_id,qwp_s,hwp_s,qwp_i,hwp_i,n_pulses,raw,singles_s,singles_i,accidentals,corrected";

// `settings` must be indexable by each record's setting_id.
std::string format_counts_csv(const std::vector<CountRecord>& records,
                              const std::vector<AnalyzerSetting>& settings);

struct CountTable {
  std::vector<CountRecord> records;
  // Indexed by setting_id; ids need not be contiguous, missing ids get default angles
  // and are never referenced by a record.
  std::vector<AnalyzerSetting> settings;
};

// Parses the schema above. The header must match exactly; throws std::runtime_error
// with the offending line number on malformed input or duplicate setting ids.
CountTable parse_counts_csv(std::istream& in);
CountTable read_counts_csv(const std::string& path);

}  // namespace nolm::tomo
