#ifndef SLICESIM_CSV_HPP_
#define SLICESIM_CSV_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace slicesim {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Comma-separated writer with a fixed header. Fields are never quoted, so
/// callers must not pass commas or newlines inside text fields.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& field(double v);
  CsvWriter& field(std::int64_t v);
  CsvWriter& field(int v) { return field(std::int64_t(v)); }
  CsvWriter& field(std::uint64_t v);
  CsvWriter& field(bool v) { return field(std::int64_t(v ? 1 : 0)); }
  CsvWriter& field(std::string_view v);
  CsvWriter& field(const char* v) { return field(std::string_view(v)); }
  /// Throws std::logic_error unless exactly one value per column was given.
  void end_row();

  std::size_t rows() const { return rows_; }

 private:
  void sep();

  std::ostream& out_;
  std::vector<std::string> header_;
  std::size_t column_ = 0;
  std::size_t rows_ = 0;
};

/// Whole-file reader used by tests and aggregation.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static CsvTable read(const std::string& path);
  static CsvTable parse(std::string_view text);
  /// Throws std::out_of_range for an unknown column.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

}  // namespace slicesim

#endif  // SLICESIM_CSV_HPP_
