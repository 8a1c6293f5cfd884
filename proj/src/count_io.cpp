#include "nolm/count_io.hpp"

#include "nolm/output.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nolm::tomo {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("counts CSV line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) fail(line, "trailing characters in '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "not a number: '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "not an integer: '" + s + "'");
  return v;
}

}  // namespace

std::string format_counts_csv(const std::vector<CountRecord>& records,
                              const std::vector<AnalyzerSetting>& settings) {
  CsvWriter csv(kCountCsvHeader);
  for (const auto& r : records) {
    const auto& s = settings.at(static_cast<std::size_t>(r.setting_id));
    csv.row() << r.setting_id << s.qwp_signal_deg << s.hwp_signal_deg << s.qwp_idler_deg
              << s.hwp_idler_deg << r.n_pulses << r.coincidences_raw << r.singles_signal
              << r.singles_idler << r.accidentals_est << r.coincidences_corrected;
  }
  return csv.str();
}

CountTable parse_counts_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw std::runtime_error("counts CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCountCsvHeader) fail(line_no, "unexpected header");

  CountTable table;
  std::set<int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 11) fail(line_no, "expected 11 fields, found " + std::to_string(f.size()));
    CountRecord r;
    const auto id = to_int(f[0], line_no);
    if (id < 0 || id > 100000) fail(line_no, "setting_id out of range");
    r.setting_id = static_cast<int>(id);
    if (!seen.insert(r.setting_id).second) fail(line_no, "duplicate setting_id");
    AnalyzerSetting s{to_double(f[1], line_no), to_double(f[2], line_no), to_double(f[3], line_no),
                      to_double(f[4], line_no)};
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      fail(line_no, e.what());
    }
    r.n_pulses = to_int(f[5], line_no);
    r.coincidences_raw = to_int(f[6], line_no);
    r.singles_signal = to_int(f[7], line_no);
    r.singles_idler = to_int(f[8], line_no);
    r.accidentals_est = to_double(f[9], line_no);
    r.coincidences_corrected = to_double(f[10], line_no);
    if (r.n_pulses <= 0) fail(line_no, "n_pulses must be positive");
    if (r.coincidences_raw < 0 || r.singles_signal < 0 || r.singles_idler < 0) {
      fail(line_no, "counts must be nonnegative");
    }
    if (table.settings.size() <= static_cast<std::size_t>(r.setting_id)) {
      table.settings.resize(static_cast<std::size_t>(r.setting_id) + 1);
    }
    table.settings[static_cast<std::size_t>(r.setting_id)] = s;
    table.records.push_back(r);
  }
  if (table.records.empty()) throw std::runtime_error("counts CSV: no data rows");
  return table;
}

CountTable read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open counts CSV: " + path);
  return parse_counts_csv(in);
}

}  // namespace nolm::tomo
