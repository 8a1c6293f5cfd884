#pragma once

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>

namespace nolm {

// Writes to a sibling temporary file and renames it over `path`, so readers never see
// a partial file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// 12 significant digits ("%.12g"), with -0 folded to 0.
std::string format_number(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& header) { out_ << header << '\n'; }

  class Row {
   public:
    explicit Row(CsvWriter& w) : w_(w) {}
    Row(const Row&) = delete;
    ~Row() { w_.out_ << '\n'; }
    Row& operator<<(double v) { return put(format_number(v)); }
    Row& operator<<(int v) { return put(std::to_string(v)); }
    Row& operator<<(std::int64_t v) { return put(std::to_string(v)); }
    Row& operator<<(const std::string& v) { return put(v); }
    Row& operator<<(const char* v) { return put(v); }

   private:
    Row& put(const std::string& s) {
      if (!first_) w_.out_ << ',';
      first_ = false;
      w_.out_ << s;
      return *this;
    }
    CsvWriter& w_;
    bool first_ = true;
  };

  Row row() { return Row(*this); }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

}  // namespace nolm
